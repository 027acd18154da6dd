#pragma once

// Execution engines behind run(). Both keep qubits that hold a known classical
// value "parked" outside the amplitude array, so communication qubits that are
// measured and reset between gadgets do not count against backend capacity.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dqsim/circuit.hpp"
#include "dqsim/density_matrix.hpp"
#include "dqsim/histogram.hpp"
#include "dqsim/noise.hpp"
#include "dqsim/rng.hpp"

namespace dqsim {

using ClassicalStore = std::vector<std::uint8_t>;

// ---------------------------------------------------------------------------
// Single-state operations on full (unparked) states.

inline bool condition_holds(const Instruction& in, const ClassicalStore& clbits) {
  return !in.condition || clbits.at(in.condition->clbit) == in.condition->value;
}

inline int measure(StateVector& psi, std::size_t q, Rng& rng) {
  if (q >= psi.num_qubits()) throw IndexError("qubit " + std::to_string(q) + " out of range");
  const int bit = uniform01(rng) < psi.prob_one(q) ? 1 : 0;
  psi.collapse(q, bit);
  return bit;
}

/// Born-sampled projective measurement; the matrix is projected and renormalized.
inline int measure(DensityMatrix& rho, std::size_t q, Rng& rng) {
  if (q >= rho.num_qubits()) throw IndexError("qubit " + std::to_string(q) + " out of range");
  const unsigned n = static_cast<unsigned>(rho.num_qubits());
  const double p1 = dm::prob_one(rho.data(), n, static_cast<unsigned>(q)) / rho.trace();
  const int bit = uniform01(rng) < p1 ? 1 : 0;
  dm::project(rho.data(), n, static_cast<unsigned>(q), bit);
  const double t = rho.trace();
  for (auto& v : rho.data()) v /= t;
  return bit;
}

inline void apply_instruction(StateVector& psi, const Instruction& in, ClassicalStore& clbits, Rng& rng) {
  validate_instruction(in, 0, psi.num_qubits(), clbits.size());
  if (!condition_holds(in, clbits)) return;
  switch (in.kind) {
    case GateKind::Barrier: return;
    case GateKind::Measure: clbits[*in.clbit] = static_cast<std::uint8_t>(measure(psi, in.qubits[0], rng)); return;
    case GateKind::Reset:
      if (measure(psi, in.qubits[0], rng)) kernels::apply_pauli(psi.amplitudes(), static_cast<unsigned>(in.qubits[0]), 1);
      return;
    default: psi.apply(in);
  }
}

inline void apply_instruction(DensityMatrix& rho, const Instruction& in, ClassicalStore& clbits, Rng& rng) {
  validate_instruction(in, 0, rho.num_qubits(), clbits.size());
  if (!condition_holds(in, clbits)) return;
  const unsigned n = static_cast<unsigned>(rho.num_qubits());
  switch (in.kind) {
    case GateKind::Barrier: return;
    case GateKind::Measure: clbits[*in.clbit] = static_cast<std::uint8_t>(measure(rho, in.qubits[0], rng)); return;
    case GateKind::Reset: {
      const unsigned q = static_cast<unsigned>(in.qubits[0]);
      std::vector<Complex> one(rho.data().begin(), rho.data().end());
      dm::project(rho.data(), n, q, 0);
      dm::project(one, n, q, 1);
      dm::apply_1q(one, n, q, gates::x());
      for (std::size_t i = 0; i < one.size(); ++i) rho.data()[i] += one[i];
      return;
    }
    default: rho.apply(in);
  }
}

// ---------------------------------------------------------------------------
// Static analyses.

/// Depolarizing rate attached to a unitary instruction.
inline double gate_noise_rate(const Instruction& in, const NoiseParams& p) {
  if (in.eps_override) return *in.eps_override;
  if (in.qubits.size() == 1) return in.noise == NoiseTag::comm ? p.comm_eps() : p.eps_d;
  return p.eps_g;
}

/// kill[i]: clbits referenced by instruction i whose value is never needed afterwards.
inline std::vector<std::vector<std::size_t>> clbit_kill_sets(const Circuit& c, const std::vector<std::size_t>& outputs) {
  std::vector<char> live(c.num_clbits, 0);
  for (std::size_t o : outputs) live.at(o) = 1;
  std::vector<std::vector<std::size_t>> kill(c.instructions.size());
  for (std::size_t i = c.instructions.size(); i-- > 0;) {
    const Instruction& in = c.instructions[i];
    if (in.clbit && !live[*in.clbit]) kill[i].push_back(*in.clbit);
    if (in.condition && !live[in.condition->clbit]) {
      if (!in.clbit || *in.clbit != in.condition->clbit) kill[i].push_back(in.condition->clbit);
    }
    if (in.kind == GateKind::Measure && !in.condition) live[*in.clbit] = 0;
    if (in.condition) live[in.condition->clbit] = 1;
  }
  return kill;
}

/// Peak number of simultaneously live qubits under the engines' parking rules.
/// `park_on_measure` selects the trajectory rule (measurement leaves a classical value).
inline std::size_t peak_live_qubits(const Circuit& c, bool park_on_measure) {
  std::vector<char> live(c.num_qubits, 0);
  std::size_t count = 0, peak = 0;
  for (const Instruction& in : c.instructions) {
    if (in.kind == GateKind::Barrier) continue;
    const bool readout = in.kind == GateKind::Reset || (in.kind == GateKind::Measure && park_on_measure);
    if (readout) {
      if (!in.condition && live[in.qubits[0]]) {
        live[in.qubits[0]] = 0;
        --count;
      }
      if (!in.condition || park_on_measure) continue;
    }
    for (std::size_t q : in.qubits)
      if (!live[q]) {
        live[q] = 1;
        ++count;
      }
    peak = std::max(peak, count);
  }
  return peak;
}

/// Clbits reported by default: every clbit not consumed by a distributed gadget.
inline std::vector<std::size_t> default_outputs(const Circuit& c) {
  std::vector<char> internal(c.num_clbits, 0);
  for (const auto& g : c.gadgets) {
    internal.at(g.clbit_x) = 1;
    internal.at(g.clbit_z) = 1;
  }
  std::vector<std::size_t> out;
  for (std::size_t b = 0; b < c.num_clbits; ++b)
    if (!internal[b]) out.push_back(b);
  return out;
}

namespace detail {

class QubitLayout {
 public:
  explicit QubitLayout(std::size_t n) : slot_(n, -1), parked_p1_(n, 0.0) {}

  bool live(std::size_t q) const { return slot_[q] >= 0; }
  unsigned slot(std::size_t q) const { return static_cast<unsigned>(slot_[q]); }
  std::size_t size() const { return order_.size(); }
  double& parked_p1(std::size_t q) { return parked_p1_[q]; }

  unsigned add(std::size_t q) {
    slot_[q] = static_cast<int>(order_.size());
    order_.push_back(q);
    return slot(q);
  }

  void remove(std::size_t q) {
    const unsigned s = slot(q);
    order_.erase(order_.begin() + s);
    slot_[q] = -1;
    for (std::size_t i = s; i < order_.size(); ++i) slot_[order_[i]] = static_cast<int>(i);
  }

 private:
  std::vector<int> slot_;
  std::vector<double> parked_p1_;
  std::vector<std::size_t> order_;
};

inline std::string capacity_message(const char* backend, std::size_t capacity) {
  return std::string("circuit needs more than ") + std::to_string(capacity) +
         " simultaneously live qubits (" + backend + " backend capacity)";
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Trajectory register: one pure state per shot.

class TrajectoryRegister {
 public:
  TrajectoryRegister(std::size_t num_qubits, std::size_t capacity)
      : layout_(num_qubits), capacity_(capacity), amps_(1, Complex{1}) {}

  std::size_t live_count() const { return layout_.size(); }

  unsigned ensure_live(std::size_t q) {
    if (layout_.live(q)) return layout_.slot(q);
    if (layout_.size() + 1 > capacity_) throw CapacityError(detail::capacity_message("trajectory", capacity_));
    const std::size_t old = amps_.size();
    amps_.resize(2 * old, Complex{0});
    if (layout_.parked_p1(q) > 0.5) {
      std::copy(amps_.begin(), amps_.begin() + static_cast<std::ptrdiff_t>(old), amps_.begin() + static_cast<std::ptrdiff_t>(old));
      std::fill(amps_.begin(), amps_.begin() + static_cast<std::ptrdiff_t>(old), Complex{0});
    }
    return layout_.add(q);
  }

  void apply(const Instruction& in) {
    bits_.clear();
    for (std::size_t q : in.qubits) bits_.push_back(ensure_live(q));
    apply_unitary(amps_, bits_, in);
  }

  void pauli(std::size_t q, int p) {
    if (p == 0) return;
    if (!layout_.live(q)) {
      if (p == 1 || p == 2) layout_.parked_p1(q) = 1.0 - layout_.parked_p1(q);
      return;
    }
    kernels::apply_pauli(amps_, layout_.slot(q), p);
  }

  /// Born-sampled measurement; the qubit is parked with the outcome.
  int measure(std::size_t q, Rng& rng) {
    if (!layout_.live(q)) return layout_.parked_p1(q) > 0.5 ? 1 : 0;
    const unsigned s = layout_.slot(q);
    int bit = uniform01(rng) < kernels::prob_one(amps_, s) ? 1 : 0;
    const std::size_t half = amps_.size() / 2;
    std::vector<Complex> out(half);
    for (int attempt = 0; attempt < 2; ++attempt) {
      double norm = 0;
      const kernels::Index set = bit ? (kernels::Index{1} << s) : 0;
      for (std::size_t i = 0; i < half; ++i) {
        out[i] = amps_[kernels::insert_zero(i, s) | set];
        norm += std::norm(out[i]);
      }
      if (norm > 0) {
        const double f = 1.0 / std::sqrt(norm);
        for (auto& v : out) v *= f;
        break;
      }
      bit ^= 1;
    }
    amps_ = std::move(out);
    layout_.remove(q);
    layout_.parked_p1(q) = bit;
    return bit;
  }

  void reset(std::size_t q, Rng& rng) {
    measure(q, rng);
    layout_.parked_p1(q) = 0;
  }

 private:
  detail::QubitLayout layout_;
  std::size_t capacity_;
  std::vector<Complex> amps_;
  std::vector<unsigned> bits_;
};

/// One noisy shot. Gates on three or more qubits must already be lowered when noise is on.
inline void run_trajectory_shot(const Circuit& c, const NoiseParams* noise, std::size_t capacity, Rng& rng,
                                ClassicalStore& clbits) {
  TrajectoryRegister reg(c.num_qubits, capacity);
  std::fill(clbits.begin(), clbits.end(), 0);
  for (const Instruction& in : c.instructions) {
    if (!condition_holds(in, clbits)) continue;
    switch (in.kind) {
      case GateKind::Barrier: break;
      case GateKind::Measure: {
        int bit = reg.measure(in.qubits[0], rng);
        if (noise) bit = flip_measurement(bit, noise->eps_m, rng);
        clbits[*in.clbit] = static_cast<std::uint8_t>(bit);
        break;
      }
      case GateKind::Reset:
        reg.reset(in.qubits[0], rng);
        if (noise && noise->eps_reset > 0 && bernoulli(rng, noise->eps_reset)) reg.pauli(in.qubits[0], 1);
        break;
      default: {
        reg.apply(in);
        if (!noise) break;
        const double eps = gate_noise_rate(in, *noise);
        if (eps <= 0) break;
        if (in.qubits.size() == 1) {
          reg.pauli(in.qubits[0], sample_pauli_1q(eps, rng));
        } else if (in.qubits.size() == 2) {
          auto [pa, pb] = sample_pauli_2q(eps, rng);
          reg.pauli(in.qubits[0], pa);
          reg.pauli(in.qubits[1], pb);
        } else {
          throw ContractError("noisy gate on more than two qubits must be lowered first");
        }
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Exact evaluator: density matrices branched on every classical record that is
// still needed, merged as soon as a record is dead. Exact outcome distributions
// without per-shot sampling.

class ExactEvaluator {
 public:
  using Key = std::vector<std::uint8_t>;

  ExactEvaluator(const Circuit& c, const NoiseParams* noise, std::size_t capacity)
      : circuit_(c), noise_(noise), capacity_(capacity), layout_(c.num_qubits) {
    branches_[Key(c.num_clbits, 0)] = std::vector<Complex>{Complex{1}};
  }

  /// Outcome distribution over `outputs` (character j = clbit outputs[j]).
  Distribution distribution(const std::vector<std::size_t>& outputs) {
    auto kill = clbit_kill_sets(circuit_, outputs);
    std::size_t suffix = circuit_.instructions.size();
    while (suffix > 0) {
      const Instruction& in = circuit_.instructions[suffix - 1];
      if (in.condition || (in.kind != GateKind::Measure && in.kind != GateKind::Barrier)) break;
      --suffix;
    }
    for (std::size_t i = 0; i < suffix; ++i) step(i, kill[i]);
    return terminal(suffix, outputs);
  }

  /// State of all qubits, classical records discarded (branches summed), logical order.
  DensityMatrix final_state() {
    auto kill = clbit_kill_sets(circuit_, {});
    for (std::size_t i = 0; i < circuit_.instructions.size(); ++i) step(i, kill[i]);
    for (std::size_t q = 0; q < circuit_.num_qubits; ++q) ensure_live(q);
    const std::size_t d = std::size_t{1} << n_;
    std::vector<Complex> sum(d * d, Complex{0});
    for (const auto& [_, rho] : branches_)
      for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += rho[i];
    std::vector<unsigned> src(circuit_.num_qubits);
    for (std::size_t q = 0; q < circuit_.num_qubits; ++q) src[q] = layout_.slot(q);
    return DensityMatrix(n_, std::move(sum)).permuted(src);
  }

  std::size_t branch_count() const { return branches_.size(); }

 private:
  static constexpr double kDropBelow = 1e-15;

  bool matches(const Key& key, const Instruction& in) const {
    return !in.condition || key[in.condition->clbit] == in.condition->value;
  }

  unsigned ensure_live(std::size_t q) {
    if (layout_.live(q)) return layout_.slot(q);
    if (layout_.size() + 1 > capacity_) throw CapacityError(detail::capacity_message("density", capacity_));
    const double p1 = layout_.parked_p1(q);
    for (auto& [_, rho] : branches_) rho = dm::add_top_qubit(rho, n_, p1);
    ++n_;
    return layout_.add(q);
  }

  static void accumulate(std::map<Key, std::vector<Complex>>& into, const Key& key, std::vector<Complex>&& rho) {
    auto it = into.find(key);
    if (it == into.end()) {
      into.emplace(key, std::move(rho));
      return;
    }
    for (std::size_t i = 0; i < rho.size(); ++i) it->second[i] += rho[i];
  }

  void step(std::size_t index, const std::vector<std::size_t>& kill) {
    const Instruction& in = circuit_.instructions[index];
    switch (in.kind) {
      case GateKind::Barrier: break;
      case GateKind::Measure: measure(in); break;
      case GateKind::Reset: reset(in); break;
      default: gate(in);
    }
    for (std::size_t c : kill) forget(c);
  }

  void gate(const Instruction& in) {
    bits_.clear();
    for (std::size_t q : in.qubits) bits_.push_back(ensure_live(q));
    const double eps = noise_ ? gate_noise_rate(in, *noise_) : 0.0;
    if (eps > 0 && bits_.size() > 2) throw ContractError("noisy gate on more than two qubits must be lowered first");
    for (auto& [key, rho] : branches_) {
      if (!matches(key, in)) continue;
      dm::apply(rho, n_, bits_, in);
      if (eps <= 0) continue;
      if (bits_.size() == 1) dm::depolarize_1q(rho, n_, bits_[0], eps);
      else dm::depolarize_2q(rho, n_, bits_[0], bits_[1], eps);
    }
  }

  void measure(const Instruction& in) {
    const unsigned s = ensure_live(in.qubits[0]);
    const std::size_t c = *in.clbit;
    const double eps = noise_ ? noise_->eps_m : 0.0;
    std::map<Key, std::vector<Complex>> next;
    for (auto& [key, rho] : branches_) {
      if (!matches(key, in)) {
        accumulate(next, key, std::move(rho));
        continue;
      }
      std::vector<Complex> r0 = rho, r1 = std::move(rho);
      dm::project(r0, n_, s, 0);
      dm::project(r1, n_, s, 1);
      if (eps > 0) {
        std::vector<Complex> m0(r0.size()), m1(r0.size());
        for (std::size_t i = 0; i < r0.size(); ++i) {
          m0[i] = (1 - eps) * r0[i] + eps * r1[i];
          m1[i] = eps * r0[i] + (1 - eps) * r1[i];
        }
        r0 = std::move(m0);
        r1 = std::move(m1);
      }
      Key k0 = key, k1 = key;
      k0[c] = 0;
      k1[c] = 1;
      if (dm::trace(r0, n_) > kDropBelow) accumulate(next, k0, std::move(r0));
      if (dm::trace(r1, n_) > kDropBelow) accumulate(next, k1, std::move(r1));
    }
    branches_ = std::move(next);
  }

  void reset(const Instruction& in) {
    const std::size_t q = in.qubits[0];
    const double eps = noise_ ? noise_->eps_reset : 0.0;
    if (!in.condition) {
      if (layout_.live(q)) {
        const unsigned s = layout_.slot(q);
        for (auto& [_, rho] : branches_) rho = dm::trace_out(rho, n_, s);
        --n_;
        layout_.remove(q);
      }
      layout_.parked_p1(q) = eps;
      return;
    }
    const unsigned s = ensure_live(q);
    for (auto& [key, rho] : branches_) {
      if (!matches(key, in)) continue;
      std::vector<Complex> one = rho;
      dm::project(rho, n_, s, 0);
      dm::project(one, n_, s, 1);
      dm::apply_1q(one, n_, s, gates::x());
      for (std::size_t i = 0; i < one.size(); ++i) rho[i] += one[i];
      if (eps > 0) {
        std::vector<Complex> flipped = rho;
        dm::apply_1q(flipped, n_, s, gates::x());
        for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = (1 - eps) * rho[i] + eps * flipped[i];
      }
    }
  }

  void forget(std::size_t c) {
    bool any = false;
    for (const auto& [key, _] : branches_) any = any || key[c] != 0;
    if (!any) return;
    std::map<Key, std::vector<Complex>> next;
    for (auto& [key, rho] : branches_) {
      Key k = key;
      k[c] = 0;
      accumulate(next, k, std::move(rho));
    }
    branches_ = std::move(next);
  }

  Distribution terminal(std::size_t suffix, const std::vector<std::size_t>& outputs) {
    std::vector<const Instruction*> meas;
    for (std::size_t i = suffix; i < circuit_.instructions.size(); ++i)
      if (circuit_.instructions[i].kind == GateKind::Measure) meas.push_back(&circuit_.instructions[i]);
    for (const Instruction* m : meas) ensure_live(m->qubits[0]);

    std::vector<int> position(circuit_.num_clbits, -1);
    for (std::size_t j = 0; j < outputs.size(); ++j) position[outputs[j]] = static_cast<int>(j);

    Distribution dist;
    std::string label(outputs.size(), '0');
    for (const auto& [key, rho] : branches_) {
      const auto diag = dm::diagonal(rho, n_);
      for (std::size_t j = 0; j < outputs.size(); ++j) label[j] = key[outputs[j]] ? '1' : '0';
      for (std::size_t idx = 0; idx < diag.size(); ++idx) {
        if (diag[idx] <= 0) continue;
        std::string l = label;
        for (const Instruction* m : meas) {
          const int pos = position[*m->clbit];
          if (pos >= 0) l[static_cast<std::size_t>(pos)] = (idx >> layout_.slot(m->qubits[0])) & 1 ? '1' : '0';
        }
        dist[l] += diag[idx];
      }
    }

    const double eps = noise_ ? noise_->eps_m : 0.0;
    if (eps > 0) {
      std::vector<char> flipped(circuit_.num_clbits, 0);
      for (const Instruction* m : meas) {
        const std::size_t c = *m->clbit;
        if (flipped[c] || position[c] < 0) continue;
        flipped[c] = 1;
        const auto pos = static_cast<std::size_t>(position[c]);
        Distribution next;
        for (const auto& [l, p] : dist) {
          std::string other = l;
          other[pos] = l[pos] == '1' ? '0' : '1';
          next[l] += (1 - eps) * p;
          next[other] += eps * p;
        }
        dist = std::move(next);
      }
    }
    return dist;
  }

  const Circuit& circuit_;
  const NoiseParams* noise_;
  std::size_t capacity_;
  detail::QubitLayout layout_;
  unsigned n_ = 0;
  std::map<Key, std::vector<Complex>> branches_;
  std::vector<unsigned> bits_;
};

}  // namespace dqsim
