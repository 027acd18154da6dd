#include <gtest/gtest.h>

#include <random>

#include "dqsim/dqsim.hpp"
#include "oracle.hpp"

using namespace dqsim;

namespace {

Circuit snippet_one() {
  Circuit c(3, 3);
  c.h(0);
  c.h(1);
  c.cx(0, 2);
  c.measure_all();
  return c;
}

}  // namespace

TEST(gates, literal_matrices) {
  const double s = 1 / std::sqrt(2.0);
  Mat2 h;
  h << s, s, s, -s;
  EXPECT_LT((gates::h() - h).cwiseAbs().maxCoeff(), 1e-15);
  Mat2 y;
  y << 0, Complex(0, -1), Complex(0, 1), 0;
  EXPECT_LT((gates::y() - y).cwiseAbs().maxCoeff(), 1e-15);
  // RX(t) = exp(-i t X / 2)
  const double t = 0.731;
  Mat2 rx;
  rx << std::cos(t / 2), Complex(0, -std::sin(t / 2)), Complex(0, -std::sin(t / 2)), std::cos(t / 2);
  EXPECT_LT((gates::rx(t) - rx).cwiseAbs().maxCoeff(), 1e-15);

  Circuit c(2, 0);
  c.cx(0, 1);
  Matrix cnot = Matrix::Zero(4, 4);
  cnot(0, 0) = cnot(2, 2) = cnot(3, 1) = cnot(1, 3) = 1;  // |q1 q0>: control q0
  EXPECT_LT((gate_matrix(c.instructions[0]) - cnot).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(apply_instruction, hadamard_on_zero) {
  StateVector psi(1);
  ClassicalStore bits;
  Rng rng(1);
  Instruction h;
  h.kind = GateKind::H;
  h.qubits = {0};
  apply_instruction(psi, h, bits, rng);
  EXPECT_NEAR(psi[0].real(), 1 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(psi[1].real(), 1 / std::sqrt(2.0), 1e-15);
}

TEST(apply_instruction, condition_mismatch_is_identity) {
  StateVector psi(1);
  ClassicalStore bits{1};
  Rng rng(1);
  Instruction x;
  x.kind = GateKind::X;
  x.qubits = {0};
  x.c_if(0, 0);
  apply_instruction(psi, x, bits, rng);
  EXPECT_EQ(psi[0], Complex(1));
  bits[0] = 0;
  apply_instruction(psi, x, bits, rng);
  EXPECT_EQ(psi[1], Complex(1));
}

TEST(apply_instruction, cnot_makes_bell_state) {
  Circuit c(2, 0);
  c.h(0);
  c.cx(0, 1);
  const StateVector psi = statevector(c);
  const double s = 1 / std::sqrt(2.0);
  EXPECT_NEAR(std::abs(psi[0] - s), 0, 1e-15);
  EXPECT_NEAR(std::abs(psi[3] - s), 0, 1e-15);
  EXPECT_NEAR(std::abs(psi[1]), 0, 1e-15);
  EXPECT_NEAR(std::abs(psi[2]), 0, 1e-15);
}

TEST(apply_instruction, errors) {
  StateVector psi(2);
  ClassicalStore bits(1);
  Rng rng(1);
  Instruction x;
  x.kind = GateKind::X;
  x.qubits = {2};
  EXPECT_THROW(apply_instruction(psi, x, bits, rng), IndexError);
  Instruction u;
  u.kind = GateKind::Unitary;
  u.qubits = {0};
  u.matrix = Matrix::Identity(2, 2) * 1.01;
  EXPECT_THROW(apply_instruction(psi, u, bits, rng), ValidationError);
}

TEST(measure, basis_state) {
  StateVector psi(1);
  psi.apply(Circuit(1, 0).x(0));
  Rng rng(3);
  EXPECT_EQ(measure(psi, 0, rng), 1);
  EXPECT_NEAR(std::abs(psi[1]), 1.0, 1e-15);
}

TEST(measure, born_statistics) {
  Rng rng(12345);
  int ones = 0;
  const int shots = 100000;
  for (int s = 0; s < shots; ++s) {
    StateVector psi(1);
    psi.apply(Circuit(1, 0).h(0));
    ones += measure(psi, 0, rng);
  }
  EXPECT_NEAR(ones / double(shots), 0.5, 0.01);
}

TEST(measure, density_matrix_projects_and_renormalizes) {
  Circuit c(2, 0);
  c.h(0);
  c.cx(0, 1);
  DensityMatrix rho = DensityMatrix::from_pure(statevector(c));
  Rng rng(5);
  const int bit = measure(rho, 0, rng);
  EXPECT_NEAR(rho.trace(), 1.0, 1e-12);
  const std::size_t idx = bit ? 3 : 0;
  EXPECT_NEAR(rho(idx, idx).real(), 1.0, 1e-12);
}

TEST(run, snippet_one_keeps_q2_equal_to_q0) {
  const Histogram h = run(snippet_one(), 4000, std::nullopt, 7);
  EXPECT_EQ(h.shots, 4000u);
  for (const auto& [k, v] : h.counts) EXPECT_EQ(k[0], k[2]) << k;
  const Distribution exact = exact_distribution(snippet_one());
  EXPECT_EQ(exact.size(), 4u);
  for (const auto& [k, p] : exact) EXPECT_NEAR(p, 0.25, 1e-12) << k;
}

TEST(run, empty_circuit) {
  Circuit c(4, 4);
  const Histogram h = run(c, 100, std::nullopt, 1);
  EXPECT_EQ(h.count("0000"), 100u);
}

TEST(run, rejects_zero_shots) { EXPECT_THROW(run(Circuit(1, 1), 0, std::nullopt, 1), ValidationError); }

TEST(run, deterministic_for_a_seed) {
  std::mt19937_64 gen(2);
  Circuit c = oracle::random_unitary_circuit(4, 20, gen);
  c.measure_all();
  const auto noise = NoiseParams::depolarizing(0.01, 0.05, 0.02);
  RunOptions traj;
  traj.backend = Backend::trajectory;
  const Histogram a = run(c, 2000, noise, 99, traj);
  const Histogram b = run(c, 2000, noise, 99, traj);
  EXPECT_EQ(a.counts, b.counts);
  traj.threads = 3;
  const Histogram threaded = run(c, 2000, noise, 99, traj);
  EXPECT_EQ(a.counts, threaded.counts);
  const Histogram other = run(c, 2000, noise, 100, traj);
  EXPECT_NE(a.counts, other.counts);
  EXPECT_EQ(run(c, 500, noise, 4).counts, run(c, 500, noise, 4).counts);
}

TEST(statevector, hadamard) {
  Circuit c(1, 0);
  c.h(0);
  const StateVector psi = statevector(c);
  EXPECT_NEAR(psi[0].real(), 1 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(psi[1].real(), 1 / std::sqrt(2.0), 1e-15);
}

TEST(statevector, rejects_measurement) {
  Circuit c(1, 1);
  c.measure(0, 0);
  EXPECT_THROW(statevector(c), ContractError);
}

TEST(statevector, matches_unitary_product_oracle) {
  std::mt19937_64 rng(42);
  for (std::size_t n = 1; n <= 8; ++n) {
    for (int rep = 0; rep < 3; ++rep) {
      Circuit c = oracle::random_unitary_circuit(n, 30, rng);
      if (n >= 3) c.mcx({0, 1}, 2);
      if (n >= 4) {
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Random(4, 4);
        Eigen::HouseholderQR<Eigen::MatrixXcd> qr(m);
        c.unitary(qr.householderQ(), {3, 1});
        c.cu(qr.householderQ(), 0, {2, 3});
      }
      const StateVector psi = statevector(c);
      const Matrix u = oracle::circuit_unitary(c);
      EXPECT_LT(oracle::max_abs_diff(psi, u.col(0)), 1e-9) << "n=" << n;
      EXPECT_NEAR(psi.norm(), 1.0, 1e-9);
    }
  }
}

TEST(exact_engine, matches_branch_oracle_on_dynamic_circuits) {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<std::size_t> pick(0, 3);
  for (int rep = 0; rep < 25; ++rep) {
    Circuit c = oracle::random_unitary_circuit(4, 6, rng);
    c.num_clbits = 4;
    c.measure(pick(rng), 0);
    c.x(pick(rng)).c_if(0, 1);
    c.h(pick(rng));
    c.reset(pick(rng));
    c.cx(0, 1);
    c.measure(pick(rng), 1);
    c.ry(0.4, pick(rng)).c_if(1, 0);
    c.measure(2, 2);
    c.measure(3, 3);
    const std::vector<std::size_t> outputs{0, 1, 2, 3};
    const Distribution want = oracle::branch_distribution(c, outputs);
    EXPECT_LT(total_variation(exact_distribution(c), want), 1e-12) << rep;

    const auto noise = NoiseParams::depolarizing(0.02, 0.04, 0.03);
    const Distribution noisy = oracle::branch_distribution(c, outputs, &noise);
    EXPECT_LT(total_variation(exact_distribution(c, noise), noisy), 1e-12) << rep;

    // only the last two clbits reported: internal records must be merged away
    RunOptions opt;
    opt.outputs = std::vector<std::size_t>{3, 2};
    EXPECT_LT(total_variation(exact_distribution(c, noise, opt), marginal(noisy, {3, 2})), 1e-12);
  }
}

TEST(backends, trajectory_agrees_with_density) {
  std::mt19937_64 rng(8);
  for (int rep = 0; rep < 2; ++rep) {
    Circuit c = oracle::random_unitary_circuit(5, 15, rng);
    c.num_clbits = 5;
    c.measure(1, 4);
    c.z(0).c_if(4, 1);
    c.measure(0, 0);
    c.measure(2, 1);
    c.measure(3, 2);
    c.measure(4, 3);
    NoiseParams noise = NoiseParams::depolarizing(0.02, 0.05, 0.03);
    RunOptions traj;
    traj.backend = Backend::trajectory;
    const Histogram h = run(c, 100000, noise, 11 + rep, traj);
    EXPECT_LT(total_variation(h.distribution(), exact_distribution(c, noise)), 0.01);
  }
}

TEST(capacity, density_backend_limit) {
  Circuit c(11, 11);
  c.h(0);
  for (std::size_t q = 1; q < 11; ++q) c.cx(q - 1, q);
  c.measure_all();
  RunOptions opt;
  opt.backend = Backend::density;
  EXPECT_THROW(run(c, 10, std::nullopt, 1, opt), CapacityError);
  // automatic selection falls back to trajectories
  const Histogram h = run(c, 200, std::nullopt, 1);
  for (const auto& [k, v] : h.counts) EXPECT_TRUE(k == std::string(11, '0') || k == std::string(11, '1'));
}

TEST(capacity, trajectory_backend_limit) {
  Circuit c(6, 6);
  for (std::size_t q = 0; q < 6; ++q) c.h(q);
  c.measure_all();
  RunOptions opt;
  opt.backend = Backend::trajectory;
  opt.trajectory_capacity = 5;
  EXPECT_THROW(run(c, 10, std::nullopt, 1, opt), CapacityError);
}

TEST(capacity, reset_qubits_are_reused) {
  // 40 qubits, but at most three hold quantum data at any time
  const std::size_t n = 40;
  Circuit c(n, n);
  for (std::size_t q = 0; q + 2 < n; ++q) {
    c.h(q);
    c.cx(q, q + 1);
    c.cx(q + 1, q + 2);
    c.measure(q + 2, q + 2);
    c.reset(q + 2);
    c.measure(q, q);
    c.reset(q);
  }
  RunOptions opt;
  opt.density_capacity = 3;
  opt.outputs = std::vector<std::size_t>{0, n - 2};
  const Distribution d = exact_distribution(c, std::nullopt, opt);
  // the last GHZ triple leaves q38 uncorrelated with the long-gone q0
  EXPECT_EQ(d.size(), 4u);
  for (const auto& [k, p] : d) EXPECT_NEAR(p, 0.25, 1e-9) << k;
  opt.backend = Backend::trajectory;
  opt.trajectory_capacity = 3;
  EXPECT_NO_THROW(run(c, 20, std::nullopt, 3, opt));
}

TEST(final_density, valid_state) {
  std::mt19937_64 rng(3);
  Circuit c = oracle::random_unitary_circuit(4, 25, rng);
  c.num_clbits = 1;
  c.measure(2, 0);
  c.x(1).c_if(0, 1);
  const DensityMatrix rho = final_density(c, NoiseParams::depolarizing(0.01, 0.02, 0.01));
  EXPECT_NEAR(rho.trace(), 1.0, 1e-9);
  EXPECT_LT(rho.hermiticity_defect(), 1e-9);
  EXPECT_GT(rho.min_eigenvalue(), -1e-9);
}
