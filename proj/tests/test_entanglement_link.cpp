#include <gtest/gtest.h>

#include <cmath>

#include "dqsim/dqsim.hpp"

using namespace dqsim;

namespace {

DistributedCircuit chain(std::size_t gadgets) {
  Circuit c(2, 0);
  for (std::size_t i = 0; i < gadgets; ++i) c.cx(0, 1);
  return create_distributed_circuit(c, NodeMap({{"1", {0}}, {"2", {1}}}));
}

double mean_trials(double p, int draws, std::uint64_t seed) {
  Rng rng(seed);
  double sum = 0;
  for (int i = 0; i < draws; ++i) sum += static_cast<double>(sample_trials(p, rng));
  return sum / draws;
}

}  // namespace

TEST(success_prob_single, values) {
  EXPECT_EQ(success_prob_single(0.3, 0), 0.0);
  EXPECT_EQ(success_prob_single(1.0, 1), 1.0);
  EXPECT_NEAR(success_prob_single(0.5, 3), 0.875, 1e-15);
}

TEST(success_prob_single, monotone_in_p_and_k) {
  for (double p = 0.05; p < 0.95; p += 0.1)
    for (std::uint64_t k = 1; k < 10; ++k) {
      EXPECT_LT(success_prob_single(p, k), success_prob_single(p + 0.05, k));
      EXPECT_LT(success_prob_single(p, k), success_prob_single(p, k + 1));
    }
}

TEST(success_prob_multi, values_and_identity) {
  EXPECT_NEAR(success_prob_multi(0.5, 1, 2), 0.75, 1e-15);
  EXPECT_EQ(success_prob_multi(1.0, 3, 4), 1.0);
  for (double p : {0.1, 0.37, 0.8})
    for (std::uint64_t k : {0u, 1u, 4u})
      for (std::size_t m : {1u, 2u, 5u}) {
        if (m == 1) {
          EXPECT_EQ(success_prob_multi(p, k, m), success_prob_single(p, k));
        }
        const double nested = 1 - std::pow(1 - success_prob_single(p, k), static_cast<double>(m));
        EXPECT_NEAR(success_prob_multi(p, k, m), nested, 1e-12);
        EXPECT_NEAR(success_prob_multi(p, k, m), 1 - std::pow(1 - p, static_cast<double>(k * m)), 1e-12);
      }
  EXPECT_THROW(success_prob_multi(0.5, 1, 0), ValidationError);
}

TEST(sample_trials, geometric_means) {
  Rng rng(1);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sample_trials(1.0, rng), 1u);
  EXPECT_NEAR(mean_trials(0.5, 100000, 2), 2.0, 0.05);
  EXPECT_NEAR(mean_trials(0.8, 100000, 3), 1.25, 0.02);
  EXPECT_THROW(sample_trials(0.0, rng), DomainError);
}

TEST(sample_trials, distribution_shape) {
  Rng rng(4);
  const int draws = 200000;
  std::map<std::uint64_t, int> seen;
  for (int i = 0; i < draws; ++i) ++seen[sample_trials(0.3, rng)];
  for (std::uint64_t k = 1; k <= 5; ++k) {
    const double want = std::pow(0.7, static_cast<double>(k - 1)) * 0.3;
    EXPECT_NEAR(seen[k] / double(draws), want, 4 * std::sqrt(want * (1 - want) / draws)) << k;
  }
}

TEST(account_run, certain_link_counts_gadgets) {
  Rng rng(5);
  const DistributedCircuit d = chain(6);
  const LinkStats s = account_run(d, LinkParams{1.0, 1}, rng);
  EXPECT_EQ(s.total_trials, 6u);
  EXPECT_EQ(s.gadget_count, 6u);
  EXPECT_EQ(account_run(chain(0), LinkParams{0.5, 1}, rng).total_trials, 0u);
}

TEST(account_run, mean_within_three_sigma) {
  const std::size_t n = 6;
  const DistributedCircuit d = chain(n);
  for (double p : {0.8, 0.5}) {
    Rng rng(6);
    const int runs = 10000;
    double sum = 0;
    for (int r = 0; r < runs; ++r) {
      const LinkStats s = account_run(d, LinkParams{p, 1}, rng);
      EXPECT_GE(s.total_trials, s.gadget_count);
      sum += static_cast<double>(s.total_trials);
    }
    const double sigma = std::sqrt(n * (1 - p) / (p * p)) / std::sqrt(double(runs));
    EXPECT_NEAR(sum / runs, n / p, 3 * sigma) << p;
  }
}

TEST(account_run, parallel_pairs_shorten_runs) {
  const DistributedCircuit d = chain(4);
  Rng a(7), b(7);
  double one = 0, two = 0;
  for (int r = 0; r < 5000; ++r) {
    one += static_cast<double>(account_run(d, LinkParams{0.3, 1}, a).total_trials);
    two += static_cast<double>(account_run(d, LinkParams{0.3, 2}, b).total_trials);
  }
  EXPECT_NEAR(two / 5000, 4 / 0.51, 0.15);
  EXPECT_LT(two, one);
}

TEST(account_run, preconditions) {
  Rng rng(8);
  DistributedCircuit failed;
  EXPECT_THROW(account_run(failed, LinkParams{}, rng), ContractError);
  EXPECT_THROW(account_run(chain(1), LinkParams{1.5, 1}, rng), ValidationError);
  EXPECT_THROW(account_run(chain(1), LinkParams{0.5, 0}, rng), ValidationError);
}
