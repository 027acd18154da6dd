#pragma once

// Dynamic QFT: a (inverse-)QFT block followed by measurement, rewritten as
// mid-circuit measurements driving classically conditioned phase gates.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "dqsim/circuit.hpp"
#include "dqsim/dqc.hpp"
#include "dqsim/error.hpp"

namespace dqsim {

/// Coherent QFT without terminal swaps. The inverse form processes qubit j after
/// qubits 0..j-1: CP(-pi/2^(j-i)) from each i < j, then H(j).
inline Circuit build_qft(std::size_t n, bool inverse) {
  if (n < 1) throw ValidationError("QFT needs at least one qubit");
  Circuit c(n, 0);
  if (inverse) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < j; ++i) c.cp(-kPi / std::ldexp(1.0, static_cast<int>(j - i)), i, j);
      c.h(j);
    }
  } else {
    for (std::size_t j = n; j-- > 0;) {
      c.h(j);
      for (std::size_t i = j; i-- > 0;) c.cp(kPi / std::ldexp(1.0, static_cast<int>(j - i)), i, j);
    }
  }
  return c;
}

struct DynamicOptions {
  // When set, conditioned phases whose measured qubit and target share a node use
  // `intra_node_eps` instead of the classical-communication rate.
  const NodeMap* nodes = nullptr;
  std::optional<double> intra_node_eps;
};

namespace detail {

inline void tag_feedback(Instruction& in, std::size_t measured, std::size_t target, const DynamicOptions& opt,
                         const std::vector<std::size_t>& owner) {
  in.noise = NoiseTag::comm;
  if (opt.intra_node_eps && !owner.empty() && measured < owner.size() && target < owner.size() &&
      owner[measured] == owner[target])
    in.eps_override = *opt.intra_node_eps;
}

inline std::vector<std::size_t> owner_of(const DynamicOptions& opt, std::size_t num_qubits) {
  if (!opt.nodes) return {};
  std::vector<std::size_t> owner(num_qubits, SIZE_MAX);
  for (std::size_t k = 0; k < opt.nodes->nodes.size(); ++k)
    for (std::size_t q : opt.nodes->nodes[k].second)
      if (q < num_qubits) owner[q] = k;
  return owner;
}

/// Semi-classical (inverse-)QFT on `qubits`, qubits[j] measured into clbits[j].
inline void emit_dynamic(Circuit& c, const std::vector<std::size_t>& qubits, const std::vector<std::size_t>& clbits,
                         bool inverse, const DynamicOptions& opt) {
  const std::size_t n = qubits.size();
  const auto owner = owner_of(opt, c.num_qubits);
  auto step = [&](std::size_t j, const std::vector<std::size_t>& earlier, double sign) {
    for (std::size_t i : earlier) {
      const std::size_t d = i > j ? i - j : j - i;
      Instruction& in = c.p(sign * kPi / std::ldexp(1.0, static_cast<int>(d)), qubits[j]).c_if(clbits[i], 1);
      tag_feedback(in, qubits[i], qubits[j], opt, owner);
    }
    c.h(qubits[j]);
    c.measure(qubits[j], clbits[j]);
  };
  if (inverse) {
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<std::size_t> earlier;
      for (std::size_t i = 0; i < j; ++i) earlier.push_back(i);
      step(j, earlier, -1.0);
    }
  } else {
    for (std::size_t j = n; j-- > 0;) {
      std::vector<std::size_t> earlier;
      for (std::size_t i = n - 1; i > j; --i) earlier.push_back(i);
      step(j, earlier, 1.0);
    }
  }
}

// Layer-canonical form: CPs between consecutive Hs sorted, CP qubits unordered.
using CanonOp = std::tuple<int, std::size_t, std::size_t, long long>;

inline std::vector<CanonOp> canonical(const std::vector<Instruction>& ops, const std::vector<std::size_t>& local) {
  std::vector<CanonOp> out;
  std::size_t layer_start = 0;
  auto close_layer = [&] { std::sort(out.begin() + static_cast<std::ptrdiff_t>(layer_start), out.end()); };
  for (const Instruction& in : ops) {
    if (in.kind == GateKind::H) {
      close_layer();
      out.emplace_back(0, local[in.qubits[0]], 0, 0);
      layer_start = out.size();
    } else {
      std::size_t a = local[in.qubits[0]], b = local[in.qubits[1]];
      if (a > b) std::swap(a, b);
      out.emplace_back(1, a, b, std::llround(std::remainder(in.params[0], 2 * kPi) * 1e9));
    }
  }
  close_layer();
  return out;
}

}  // namespace detail

/// Semi-classical inverse QFT on n qubits: qubit j measured into clbit j.
inline Circuit build_dynamic_qft(std::size_t n, const DynamicOptions& opt = {}) {
  if (n < 1) throw ValidationError("QFT needs at least one qubit");
  Circuit c(n, n);
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  detail::emit_dynamic(c, idx, idx, true, opt);
  return c;
}

/// Replaces the (inverse-)QFT block acting on `qft_qubits` (position j = template
/// qubit j) and the measurements that follow it by the dynamic form.
inline Circuit rewrite_terminal_qft(const Circuit& circuit, const std::vector<std::size_t>& qft_qubits,
                                    const DynamicOptions& opt = {}) {
  validate(circuit);
  const std::size_t n = qft_qubits.size();
  if (n == 0) throw RewriteRefused("no QFT qubits given");
  std::vector<std::size_t> local(circuit.num_qubits, SIZE_MAX);
  for (std::size_t j = 0; j < n; ++j) {
    if (qft_qubits[j] >= circuit.num_qubits) throw IndexError("QFT qubit " + std::to_string(qft_qubits[j]) + " out of range");
    if (local[qft_qubits[j]] != SIZE_MAX) throw RewriteRefused("QFT qubit " + std::to_string(qft_qubits[j]) + " listed twice");
    local[qft_qubits[j]] = j;
  }
  auto touches = [&](const Instruction& in) {
    if (in.kind == GateKind::Barrier && in.qubits.empty()) return false;
    return std::any_of(in.qubits.begin(), in.qubits.end(), [&](std::size_t q) { return local[q] != SIZE_MAX; });
  };

  // terminal measurement of every QFT qubit
  const auto& ops = circuit.instructions;
  std::vector<std::size_t> meas_at(n, SIZE_MAX), clbits(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = ops.size(); i-- > 0;) {
      if (!touches(ops[i]) || std::find(ops[i].qubits.begin(), ops[i].qubits.end(), qft_qubits[j]) == ops[i].qubits.end())
        continue;
      if (ops[i].kind != GateKind::Measure || ops[i].condition)
        throw RewriteRefused("qubit " + std::to_string(qft_qubits[j]) + ": last operation is " + describe(ops[i], i) +
                             ", not a measurement following the QFT");
      meas_at[j] = i;
      clbits[j] = *ops[i].clbit;
      break;
    }
    if (meas_at[j] == SIZE_MAX) throw RewriteRefused("qubit " + std::to_string(qft_qubits[j]) + " is never measured");
  }
  std::vector<std::size_t> sorted_bits = clbits;
  std::sort(sorted_bits.begin(), sorted_bits.end());
  if (std::adjacent_find(sorted_bits.begin(), sorted_bits.end()) != sorted_bits.end())
    throw RewriteRefused("QFT qubits share a measurement clbit");

  // the block: the last n + n(n-1)/2 operations on QFT qubits before the measurements
  const std::size_t block_len = n + n * (n - 1) / 2;
  std::vector<std::size_t> block;
  for (std::size_t i = ops.size(); i-- > 0 && block.size() < block_len;) {
    if (!touches(ops[i]) || std::find(meas_at.begin(), meas_at.end(), i) != meas_at.end()) continue;
    const Instruction& in = ops[i];
    const bool inside = std::all_of(in.qubits.begin(), in.qubits.end(), [&](std::size_t q) { return local[q] != SIZE_MAX; });
    if (in.condition || !inside || (in.kind != GateKind::H && in.kind != GateKind::CP))
      throw RewriteRefused(describe(in, i) + " sits between the QFT block and its measurements");
    block.push_back(i);
  }
  if (block.size() < block_len) throw RewriteRefused("fewer operations on the QFT qubits than a QFT block needs");
  std::reverse(block.begin(), block.end());
  std::vector<Instruction> block_ops;
  for (std::size_t i : block) block_ops.push_back(ops[i]);

  std::vector<std::size_t> identity(n);
  for (std::size_t j = 0; j < n; ++j) identity[j] = j;
  const auto got = detail::canonical(block_ops, local);
  std::optional<bool> inverse;
  for (bool inv : {true, false})
    if (!inverse && got == detail::canonical(build_qft(n, inv).instructions, identity)) inverse = inv;
  if (!inverse) throw RewriteRefused("operations on the QFT qubits do not match the QFT or inverse-QFT template");

  const std::size_t first = block.front();
  const std::size_t last = *std::max_element(meas_at.begin(), meas_at.end());
  for (std::size_t i = first; i <= last; ++i) {
    if (touches(ops[i])) continue;
    const auto& in = ops[i];
    const bool reads = in.condition && std::count(clbits.begin(), clbits.end(), in.condition->clbit);
    const bool writes = in.clbit && std::count(clbits.begin(), clbits.end(), *in.clbit);
    if (reads || writes)
      throw RewriteRefused(describe(in, i) + " uses a QFT measurement clbit inside the block");
  }

  Circuit out = circuit;
  out.instructions.clear();
  for (std::size_t i = 0; i < ops.size(); ++i) {
    if (i == first) detail::emit_dynamic(out, qft_qubits, clbits, *inverse, opt);
    if (i >= first && i <= last && touches(ops[i])) continue;
    out.instructions.push_back(ops[i]);
  }
  return out;
}

}  // namespace dqsim
