#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <thread>
#include <vector>

#include "dqsim/engine.hpp"
#include "dqsim/synthesis.hpp"

namespace dqsim {

enum class Backend {
  automatic,   // density when the circuit fits, trajectory otherwise
  density,     // exact channels, outcomes sampled from the exact distribution
  trajectory,  // one noisy pure state per shot
};

struct RunOptions {
  Backend backend = Backend::automatic;
  std::size_t density_capacity = 10;
  std::size_t trajectory_capacity = 24;
  std::optional<std::vector<std::size_t>> outputs;  // default: every clbit not owned by a gadget
  unsigned threads = 1;
};

namespace detail {

inline const NoiseParams* active(const std::optional<NoiseParams>& noise) {
  if (!noise) return nullptr;
  validate(*noise);
  return noise->is_noiseless() ? nullptr : &*noise;
}

/// Noise is attached per physical gate, so wide gates are lowered first.
inline Circuit prepare(const Circuit& c, const NoiseParams* noise) {
  validate(c);
  if (!noise) return c;
  const bool wide = std::any_of(c.instructions.begin(), c.instructions.end(),
                                [](const Instruction& in) { return is_unitary_kind(in.kind) && in.qubits.size() >= 3; });
  return wide ? lower_wide_gates(c) : c;
}

}  // namespace detail

inline Backend choose_backend(const Circuit& c, const RunOptions& opt = {}) {
  if (opt.backend != Backend::automatic) return opt.backend;
  return peak_live_qubits(c, false) <= opt.density_capacity ? Backend::density : Backend::trajectory;
}

/// Exact outcome distribution (density backend).
inline Distribution exact_distribution(const Circuit& circuit, const std::optional<NoiseParams>& noise = std::nullopt,
                                       const RunOptions& opt = {}) {
  const NoiseParams* np = detail::active(noise);
  const Circuit c = detail::prepare(circuit, np);
  if (peak_live_qubits(c, false) > opt.density_capacity)
    throw CapacityError(detail::capacity_message("density", opt.density_capacity));
  ExactEvaluator ev(c, np, opt.density_capacity);
  return ev.distribution(opt.outputs ? *opt.outputs : default_outputs(c));
}

/// Final state with classical records discarded (density backend).
inline DensityMatrix final_density(const Circuit& circuit, const std::optional<NoiseParams>& noise = std::nullopt,
                                   const RunOptions& opt = {}) {
  const NoiseParams* np = detail::active(noise);
  const Circuit c = detail::prepare(circuit, np);
  ExactEvaluator ev(c, np, opt.density_capacity);
  return ev.final_state();
}

/// Noiseless pure final state; rejects measurement, reset and conditions.
inline StateVector statevector(const Circuit& c) {
  validate(c);
  StateVector psi(c.num_qubits);
  for (std::size_t i = 0; i < c.instructions.size(); ++i) {
    const Instruction& in = c.instructions[i];
    if (in.kind == GateKind::Barrier) continue;
    if (in.kind == GateKind::Measure || in.kind == GateKind::Reset || in.condition)
      throw ContractError(describe(in, i) + ": statevector() needs a measurement-free circuit");
    psi.apply(in);
  }
  if (c.global_phase != 0) psi.scale(std::polar(1.0, c.global_phase));
  return psi;
}

/// Draws `shots` outcomes from a distribution; deterministic in `seed`.
inline Histogram sample(const Distribution& d, std::uint64_t shots, std::uint64_t seed) {
  std::vector<const std::string*> labels;
  std::vector<double> cdf;
  double total = 0;
  for (const auto& [k, p] : d) {
    if (p <= 0) continue;
    total += p;
    labels.push_back(&k);
    cdf.push_back(total);
  }
  Histogram h;
  if (labels.empty()) return h;
  std::vector<std::uint64_t> counts(labels.size(), 0);
  Rng rng(derive_seed(seed, 0));
  for (std::uint64_t s = 0; s < shots; ++s) {
    const double u = uniform01(rng) * total;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    ++counts[static_cast<std::size_t>(it - cdf.begin())];
  }
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (counts[i]) h.add(*labels[i], counts[i]);
  return h;
}

/// Shot-based execution. Identical (circuit, noise, seed, options) give identical histograms.
inline Histogram run(const Circuit& circuit, std::uint64_t shots, const std::optional<NoiseParams>& noise,
                     std::uint64_t seed, const RunOptions& opt = {}) {
  if (shots < 1) throw ValidationError("shots must be >= 1");
  const NoiseParams* np = detail::active(noise);
  const Circuit c = detail::prepare(circuit, np);
  const std::vector<std::size_t> outputs = opt.outputs ? *opt.outputs : default_outputs(c);
  for (std::size_t o : outputs)
    if (o >= c.num_clbits) throw IndexError("output clbit " + std::to_string(o) + " out of range");

  if (choose_backend(c, opt) == Backend::density) {
    if (peak_live_qubits(c, false) > opt.density_capacity)
      throw CapacityError(detail::capacity_message("density", opt.density_capacity));
    ExactEvaluator ev(c, np, opt.density_capacity);
    return sample(ev.distribution(outputs), shots, seed);
  }

  if (peak_live_qubits(c, true) > opt.trajectory_capacity)
    throw CapacityError(detail::capacity_message("trajectory", opt.trajectory_capacity));
  auto work = [&](std::uint64_t begin, std::uint64_t end, Histogram& h) {
    ClassicalStore clbits(c.num_clbits, 0);
    std::string label(outputs.size(), '0');
    for (std::uint64_t s = begin; s < end; ++s) {
      Rng rng(derive_seed(seed, s));
      run_trajectory_shot(c, np, opt.trajectory_capacity, rng, clbits);
      for (std::size_t j = 0; j < outputs.size(); ++j) label[j] = clbits[outputs[j]] ? '1' : '0';
      h.add(label);
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(opt.threads, static_cast<unsigned>(shots)));
  if (workers == 1) {
    Histogram h;
    work(0, shots, h);
    return h;
  }
  std::vector<Histogram> parts(workers);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    const std::uint64_t begin = shots * w / workers, end = shots * (w + 1) / workers;
    pool.emplace_back(work, begin, end, std::ref(parts[w]));
  }
  for (auto& t : pool) t.join();
  Histogram h;
  for (const auto& p : parts) h.merge(p);
  return h;
}

}  // namespace dqsim
