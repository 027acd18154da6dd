#pragma once

// Lowering of controlled and multi-qubit gates to single-qubit gates plus CNOT.

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "dqsim/circuit.hpp"
#include "dqsim/matrix.hpp"

namespace dqsim {

namespace synth {

inline bool near_identity(const Mat2& u, double tol = 1e-12) { return (u - Mat2::Identity()).cwiseAbs().maxCoeff() < tol; }

/// Collects emitted instructions. Every emitted op inherits the condition and
/// noise tags of the instruction being lowered.
struct Emitter {
  std::vector<Instruction> ops;
  double phase = 0;
  std::optional<Condition> condition;
  NoiseTag noise = NoiseTag::gate;
  std::optional<double> eps_override;

  Instruction& push(GateKind k, std::vector<std::size_t> qubits, std::vector<double> params = {}) {
    Instruction in;
    in.kind = k;
    in.qubits = std::move(qubits);
    in.params = std::move(params);
    in.condition = condition;
    in.noise = noise;
    in.eps_override = eps_override;
    ops.push_back(std::move(in));
    return ops.back();
  }

  void h(std::size_t q) { push(GateKind::H, {q}); }
  void x(std::size_t q) { push(GateKind::X, {q}); }
  void p(double theta, std::size_t q) {
    if (std::abs(std::remainder(theta, 2 * kPi)) > 1e-15) push(GateKind::P, {q}, {theta});
  }
  void ry(double theta, std::size_t q) { push(GateKind::RY, {q}, {theta}); }
  void cx(std::size_t c, std::size_t t) { push(GateKind::CNOT, {c, t}); }
  void u1(const Mat2& u, std::size_t q) {
    if (near_identity(u)) return;
    Instruction& in = push(GateKind::Unitary, {q});
    in.matrix = u;
  }
};

/// Exact controlled-u (phase of u included) with at most two CNOTs.
inline void controlled_1q(Emitter& e, const Mat2& u, std::size_t c, std::size_t t) {
  const Matrix um = u;
  if (auto a = phase_relative_to(um, Matrix(Mat2::Identity()), 1e-12)) {
    e.p(*a, c);
    return;
  }
  if (auto a = phase_relative_to(um, Matrix(gates::x()), 1e-12)) {
    e.p(*a, c);
    e.cx(c, t);
    return;
  }
  if (auto a = phase_relative_to(um, Matrix(gates::z()), 1e-12)) {
    e.p(*a, c);
    e.h(t);
    e.cx(c, t);
    e.h(t);
    return;
  }
  if (auto a = phase_relative_to(um, Matrix(gates::y()), 1e-12)) {
    e.p(*a, c);
    e.p(-kPi / 2, t);
    e.cx(c, t);
    e.p(kPi / 2, t);
    return;
  }
  // u = e^{i alpha} A X B X C with ABC = I
  const ZyzAngles z = zyz_decompose(u);
  const Mat2 a = gates::rz(z.beta) * gates::ry(z.gamma / 2);
  const Mat2 b = gates::ry(-z.gamma / 2) * gates::rz(-(z.delta + z.beta) / 2);
  const Mat2 cm = gates::rz((z.delta - z.beta) / 2);
  e.u1(cm, t);
  e.cx(c, t);
  e.u1(b, t);
  e.cx(c, t);
  e.u1(a, t);
  e.p(z.alpha, c);
}

/// Phase e^{i phi} on the all-ones state of `qubits`, as a parity-phase polynomial
/// walked in Gray-code order: 2^len - 2 CNOTs, no ancilla.
inline void mc_phase(Emitter& e, const std::vector<std::size_t>& qubits, double phi) {
  const std::size_t n = qubits.size();
  if (n == 0) {
    e.phase += phi;
    return;
  }
  const double unit = phi / std::ldexp(1.0, static_cast<int>(n - 1));
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t count = std::size_t{1} << j;
    for (std::size_t i = 0; i < count; ++i) {
      if (i > 0) {
        const std::size_t changed = static_cast<std::size_t>(std::countr_zero(i));
        e.cx(qubits[changed], qubits[j]);
      }
      const std::size_t gray = i ^ (i >> 1);
      const int size = std::popcount(gray) + 1;
      e.p(size % 2 == 1 ? unit : -unit, qubits[j]);
    }
    if (j > 0) e.cx(qubits[j - 1], qubits[j]);
  }
}

inline void toffoli(Emitter& e, std::size_t a, std::size_t b, std::size_t t) {
  const double q = kPi / 4;
  e.h(t);
  e.cx(b, t);
  e.p(-q, t);
  e.cx(a, t);
  e.p(q, t);
  e.cx(b, t);
  e.p(-q, t);
  e.cx(a, t);
  e.p(q, b);
  e.p(q, t);
  e.h(t);
  e.cx(a, b);
  e.p(q, a);
  e.p(-q, b);
  e.cx(a, b);
}

inline void mc_unitary(Emitter& e, const std::vector<std::size_t>& controls, std::size_t t, const Mat2& u);

inline void mcx(Emitter& e, const std::vector<std::size_t>& controls, std::size_t t) {
  const std::size_t k = controls.size();
  if (k == 0) {
    e.x(t);
  } else if (k == 1) {
    e.cx(controls[0], t);
  } else if (k == 2) {
    toffoli(e, controls[0], controls[1], t);
  } else if (k <= 5) {
    std::vector<std::size_t> all = controls;
    all.push_back(t);
    e.h(t);
    mc_phase(e, all, kPi);
    e.h(t);
  } else {
    mc_unitary(e, controls, t, gates::x());
  }
}

/// k-controlled u: C(V), C^{k-1}X, C(V^dagger), C^{k-1}X, C^{k-1}(V) with V^2 = u.
inline void mc_unitary(Emitter& e, const std::vector<std::size_t>& controls, std::size_t t, const Mat2& u) {
  const std::size_t k = controls.size();
  if (k == 0) {
    e.u1(u, t);
    return;
  }
  if (k == 1) {
    controlled_1q(e, u, controls[0], t);
    return;
  }
  const Matrix um = u;
  if (auto a = phase_relative_to(um, Matrix(Mat2::Identity()), 1e-12)) {
    mc_phase(e, controls, *a);
    return;
  }
  if (auto a = phase_relative_to(um, Matrix(gates::x()), 1e-12); a && k <= 5) {
    mc_phase(e, controls, *a);
    mcx(e, controls, t);
    return;
  }
  const Mat2 v = unitary_sqrt(u);
  const std::vector<std::size_t> rest(controls.begin(), controls.end() - 1);
  const std::size_t last = controls.back();
  controlled_1q(e, v, last, t);
  mcx(e, rest, last);
  controlled_1q(e, v.adjoint(), last, t);
  mcx(e, rest, last);
  mc_unitary(e, rest, t, v);
}

/// Arbitrary unitary on `qubits` (matrix bit i <-> qubits[i]) as a product of
/// two-level rotations between Gray-code neighbours, each a multi-controlled
/// single-qubit gate.
inline void two_level(Emitter& e, const std::vector<std::size_t>& qubits, const Matrix& u) {
  const std::size_t n = qubits.size();
  const Eigen::Index d = Eigen::Index{1} << n;
  std::vector<Eigen::Index> g(static_cast<std::size_t>(d));
  for (Eigen::Index i = 0; i < d; ++i) g[static_cast<std::size_t>(i)] = i ^ (i >> 1);
  Matrix m(d, d);
  for (Eigen::Index r = 0; r < d; ++r)
    for (Eigen::Index c = 0; c < d; ++c) m(r, c) = u(g[static_cast<std::size_t>(r)], g[static_cast<std::size_t>(c)]);

  struct Step {
    Eigen::Index row;  // acts on Gray positions row-1, row
    Mat2 g;
  };
  std::vector<Step> steps;
  auto rotate = [&](Eigen::Index row, const Mat2& gm) {
    for (Eigen::Index c = 0; c < d; ++c) {
      const Complex a = m(row - 1, c), b = m(row, c);
      m(row - 1, c) = gm(0, 0) * a + gm(0, 1) * b;
      m(row, c) = gm(1, 0) * a + gm(1, 1) * b;
    }
    steps.push_back({row, gm});
  };
  for (Eigen::Index c = 0; c + 1 < d; ++c) {
    for (Eigen::Index r = d - 1; r > c; --r) {
      const Complex a = m(r - 1, c), b = m(r, c);
      if (std::abs(b) < 1e-14 && !(r - 1 == c && std::abs(a - 1.0) > 1e-14)) continue;
      const double nrm = std::sqrt(std::norm(a) + std::norm(b));
      Mat2 gm;
      gm << std::conj(a) / nrm, std::conj(b) / nrm, -b / nrm, a / nrm;
      rotate(r, gm);
    }
  }
  // m is now diag(1, ..., 1, e^{i phi}) up to rounding
  std::vector<Step> all;
  const Complex last = m(d - 1, d - 1);
  if (std::abs(last - 1.0) > 1e-14) {
    Mat2 gm = Mat2::Identity();
    gm(1, 1) = std::conj(last);
    all.push_back({d - 1, gm});
  }
  // G_k ... G_1 u = m, so in time order: the diagonal fix, then G_k^dagger, ..., G_1^dagger
  for (auto it = steps.rbegin(); it != steps.rend(); ++it) all.push_back(*it);
  for (const Step& s : all) {
    const Eigen::Index lo = g[static_cast<std::size_t>(s.row - 1)], hi = g[static_cast<std::size_t>(s.row)];
    const Eigen::Index diff = lo ^ hi;
    std::size_t bit = 0;
    while ((Eigen::Index{1} << bit) != diff) ++bit;
    Mat2 w = s.g.adjoint();
    if (lo & diff) {
      Mat2 sw;
      sw << w(1, 1), w(1, 0), w(0, 1), w(0, 0);
      w = sw;
    }
    if (near_identity(w)) continue;
    std::vector<std::size_t> controls;
    std::vector<std::size_t> flips;
    for (std::size_t b = 0; b < n; ++b) {
      if (b == bit) continue;
      controls.push_back(qubits[b]);
      if (!(hi & (Eigen::Index{1} << b))) flips.push_back(qubits[b]);
    }
    for (std::size_t q : flips) e.x(q);
    mc_unitary(e, controls, qubits[bit], w);
    for (std::size_t q : flips) e.x(q);
  }
}

/// Lowers one unitary instruction to single-qubit gates and CNOTs.
inline void lower_instruction(Emitter& e, const Instruction& in) {
  e.condition = in.condition;
  e.noise = in.noise;
  e.eps_override = in.eps_override;
  const auto& q = in.qubits;
  switch (in.kind) {
    case GateKind::CNOT: e.ops.push_back(in); return;
    case GateKind::CP: {
      const double th = in.params[0];
      e.p(th / 2, q[0]);
      e.cx(q[0], q[1]);
      e.p(-th / 2, q[1]);
      e.cx(q[0], q[1]);
      e.p(th / 2, q[1]);
      return;
    }
    case GateKind::CRY: {
      const double th = in.params[0];
      e.ry(th / 2, q[1]);
      e.cx(q[0], q[1]);
      e.ry(-th / 2, q[1]);
      e.cx(q[0], q[1]);
      return;
    }
    case GateKind::MCX: mcx(e, std::vector<std::size_t>(q.begin(), q.end() - 1), q.back()); return;
    case GateKind::CU: {
      const std::vector<std::size_t> targets(q.begin() + 1, q.end());
      if (auto f = factor_tensor_product(in.matrix)) {
        for (std::size_t i = 0; i < targets.size(); ++i) controlled_1q(e, (*f)[i], q[0], targets[i]);
        return;
      }
      two_level(e, q, gate_matrix(in));
      return;
    }
    case GateKind::Unitary: {
      if (q.size() == 1) {
        e.ops.push_back(in);
        return;
      }
      if (auto f = factor_tensor_product(in.matrix)) {
        for (std::size_t i = 0; i < q.size(); ++i) e.u1((*f)[i], q[i]);
        return;
      }
      two_level(e, q, in.matrix);
      return;
    }
    default: e.ops.push_back(in); return;
  }
}

}  // namespace synth

/// k-controlled X on k+1 qubits: controls 0..k-1, target k. Single-qubit gates and
/// CNOTs only; exact including global phase.
inline Circuit decompose_mcx(std::size_t k) {
  Circuit c(k + 1, 0);
  synth::Emitter e;
  std::vector<std::size_t> controls;
  for (std::size_t i = 0; i < k; ++i) controls.push_back(i);
  synth::mcx(e, controls, k);
  c.instructions = std::move(e.ops);
  c.global_phase = e.phase;
  return c;
}

inline std::size_t cnot_count(const Circuit& c) {
  return static_cast<std::size_t>(std::count_if(c.instructions.begin(), c.instructions.end(),
                                                [](const Instruction& in) { return in.kind == GateKind::CNOT; }));
}

/// Rewrites every unitary instruction selected by `lower_it` into single-qubit gates
/// and CNOTs. Phases from unconditioned gates accumulate in global_phase.
inline Circuit lower_gates(const Circuit& c, const std::function<bool(const Instruction&)>& lower_it) {
  Circuit out = c;
  out.instructions.clear();
  for (const Instruction& in : c.instructions) {
    if (!is_unitary_kind(in.kind) || !lower_it(in)) {
      out.instructions.push_back(in);
      continue;
    }
    synth::Emitter e;
    synth::lower_instruction(e, in);
    for (auto& op : e.ops) out.instructions.push_back(std::move(op));
    if (!in.condition) out.global_phase += e.phase;
  }
  return out;
}

/// Gates on three or more qubits lowered; one- and two-qubit gates kept.
inline Circuit lower_wide_gates(const Circuit& c) {
  return lower_gates(c, [](const Instruction& in) { return in.qubits.size() >= 3; });
}

/// Everything lowered to single-qubit gates and CNOT.
inline Circuit lower_to_cnot(const Circuit& c) {
  return lower_gates(c, [](const Instruction& in) { return in.qubits.size() >= 2 && in.kind != GateKind::CNOT; });
}

}  // namespace dqsim
