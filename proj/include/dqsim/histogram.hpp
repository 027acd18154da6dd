#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "dqsim/error.hpp"

namespace dqsim {

/// Outcome bitstring (clbit 0 leftmost) -> probability.
using Distribution = std::map<std::string, double>;

struct Histogram {
  std::map<std::string, std::uint64_t> counts;
  std::uint64_t shots = 0;

  void add(const std::string& outcome, std::uint64_t n = 1) {
    counts[outcome] += n;
    shots += n;
  }

  void merge(const Histogram& other) {
    for (const auto& [k, v] : other.counts) counts[k] += v;
    shots += other.shots;
  }

  std::uint64_t count(const std::string& outcome) const {
    auto it = counts.find(outcome);
    return it == counts.end() ? 0 : it->second;
  }

  double probability(const std::string& outcome) const {
    return shots == 0 ? 0.0 : static_cast<double>(count(outcome)) / static_cast<double>(shots);
  }

  Distribution distribution() const {
    Distribution d;
    for (const auto& [k, v] : counts) d[k] = static_cast<double>(v) / static_cast<double>(shots);
    return d;
  }
};

inline double total_variation(const Distribution& p, const Distribution& q) {
  std::set<std::string> keys;
  for (const auto& [k, _] : p) keys.insert(k);
  for (const auto& [k, _] : q) keys.insert(k);
  double s = 0;
  for (const auto& k : keys) {
    auto a = p.find(k), b = q.find(k);
    s += std::abs((a == p.end() ? 0.0 : a->second) - (b == q.end() ? 0.0 : b->second));
  }
  return 0.5 * s;
}

/// Keeps only the characters at `positions` of each outcome, summing collisions.
inline Distribution marginal(const Distribution& d, const std::vector<std::size_t>& positions) {
  Distribution out;
  for (const auto& [k, v] : d) {
    std::string key;
    for (std::size_t p : positions) key.push_back(k.at(p));
    out[key] += v;
  }
  return out;
}

/// Dense probability vector over n bits (bit i of the index = character i) to a Distribution.
inline Distribution distribution_from_probabilities(const std::vector<double>& probs, std::size_t n_bits,
                                                    double drop_below = 0.0) {
  Distribution d;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= drop_below) continue;
    std::string key(n_bits, '0');
    for (std::size_t b = 0; b < n_bits; ++b)
      if (i & (std::size_t{1} << b)) key[b] = '1';
    d[key] += probs[i];
  }
  return d;
}

}  // namespace dqsim
