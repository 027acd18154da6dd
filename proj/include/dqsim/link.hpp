#pragma once

// Probabilistic entanglement generation: success probabilities and geometric
// trial counts per delivered Bell pair.

#include <cmath>
#include <cstdint>
#include <string>

#include "dqsim/dqc.hpp"
#include "dqsim/error.hpp"
#include "dqsim/rng.hpp"

namespace dqsim {

struct LinkParams {
  double p = 1.0;         // per-trial channel efficiency
  std::size_t m = 1;      // parallel communication qubit pairs
};

struct LinkStats {
  std::uint64_t total_trials = 0;
  std::uint64_t gadget_count = 0;
};

inline void validate(const LinkParams& l) {
  if (!(l.p > 0 && l.p <= 1)) throw ValidationError("link efficiency p must lie in (0, 1], got " + std::to_string(l.p));
  if (l.m < 1) throw ValidationError("link needs at least one communication qubit pair");
}

/// Probability of at least one entangled pair in k trials.
inline double success_prob_single(double p, std::uint64_t k) {
  return -std::expm1(static_cast<double>(k) * std::log1p(-p));
}

/// Same with m pairs attempted in parallel per trial.
inline double success_prob_multi(double p, std::uint64_t k, std::size_t m) {
  if (m < 1) throw ValidationError("m must be >= 1");
  return -std::expm1(static_cast<double>(k) * static_cast<double>(m) * std::log1p(-p));
}

/// Attempts up to and including the first success.
inline std::uint64_t sample_trials(double p, Rng& rng) {
  if (!(p > 0)) throw DomainError("link efficiency p = 0 never produces a Bell pair");
  if (p >= 1) return 1;
  const double u = 1.0 - uniform01(rng);  // (0, 1]
  return 1 + static_cast<std::uint64_t>(std::floor(std::log(u) / std::log1p(-p)));
}

inline LinkStats account_run(const DistributedCircuit& d, const LinkParams& link, Rng& rng) {
  if (!d.gate_app) throw ContractError("circuit was not successfully distributed (gate_app = 0)");
  validate(link);
  const double per_trial = link.m == 1 ? link.p : success_prob_multi(link.p, 1, link.m);
  LinkStats s;
  for (std::size_t g = 0; g < d.gadgets().size(); ++g) {
    s.total_trials += sample_trials(per_trial, rng);
    ++s.gadget_count;
  }
  return s;
}

}  // namespace dqsim
