// Acceptance run: one line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dqsim/dqsim.hpp"
#include "oracle.hpp"

using namespace dqsim;
namespace ex = dqsim::experiments;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<Outcome()> body;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::vector<std::size_t> range(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

Matrix random_unitary(Eigen::Index dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix a(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r)
    for (Eigen::Index c = 0; c < dim; ++c) a(r, c) = Complex(g(rng), g(rng));
  Eigen::HouseholderQR<Matrix> qr(a);
  return qr.householderQ();
}

// Data-qubit outcomes of the compiled circuit; gadget clbits ignored.
Distribution data_distribution(Circuit c, std::size_t n_data) {
  for (std::size_t q = 0; q < n_data; ++q) c.measure(q, q);
  RunOptions opt;
  opt.backend = Backend::density;
  opt.outputs = range(n_data);
  return exact_distribution(c, std::nullopt, opt);
}

// Born probabilities of a measurement-free circuit from its dense unitary.
Distribution oracle_distribution(const Circuit& c) {
  const Eigen::VectorXcd psi = oracle::circuit_unitary(c).col(0);
  Distribution d;
  for (Eigen::Index i = 0; i < psi.size(); ++i) {
    const double p = std::norm(psi(i));
    if (p < 1e-15) continue;
    std::string key(c.num_qubits, '0');
    for (std::size_t q = 0; q < c.num_qubits; ++q)
      if (static_cast<std::size_t>(i) >> q & 1) key[q] = '1';
    d[key] += p;
  }
  return d;
}

double summation_oracle(std::size_t n, double c) {
  const double N = std::ldexp(1.0, static_cast<int>(n));
  double s = 0;
  for (std::size_t i = 0; i < (std::size_t{1} << n); ++i) {
    const double x = std::sin(c * (static_cast<double>(i) + 0.5) / N);
    s += x * x;
  }
  return s / N;
}

// ---------------------------------------------------------------- criteria

Outcome gadget_correctness() {
  const NodeMap nodes({{"1", {0}}, {"2", {1}}});
  double worst = 0;
  for (int input = 0; input < 4; ++input) {
    Circuit c(2, 2);
    if (input & 1) c.x(0);
    if (input & 2) c.x(1);
    c.cx(0, 1);
    const DistributedCircuit d = create_distributed_circuit(c, nodes);
    worst = std::max(worst, total_variation(data_distribution(d.circuit, 2), oracle_distribution(c)));
  }
  std::mt19937_64 rng(101);
  double worst_rho = 0;
  for (int rep = 0; rep < 50; ++rep) {
    Circuit c(2, 2);
    c.unitary(random_unitary(2, rng), {0});
    c.unitary(random_unitary(2, rng), {1});
    c.cx(0, 1);
    const DistributedCircuit d = create_distributed_circuit(c, nodes);
    worst = std::max(worst, total_variation(data_distribution(d.circuit, 2), oracle_distribution(c)));
    const Eigen::VectorXcd ideal = oracle::circuit_unitary(c).col(0);
    const Matrix rho = final_density(d.circuit).reduced({0, 1}).to_matrix();
    worst_rho = std::max(worst_rho, (rho - ideal * ideal.adjoint()).cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-9 && worst_rho <= 1e-9, "max TV " + fmt("%.2e", worst) + ", max |rho - rho_ideal| " + fmt("%.2e", worst_rho)};
}

Outcome compilation_preserves_distributions() {
  std::mt19937_64 rng(202);
  double worst = 0;
  std::size_t gadgets = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n_nodes = 2 + static_cast<std::size_t>(rng() % 2);
    const std::size_t n = n_nodes + static_cast<std::size_t>(rng() % (6 - n_nodes));  // n_nodes..5
    const std::size_t gates = 1 + static_cast<std::size_t>(rng() % 8);
    const Circuit c = oracle::random_unitary_circuit(n, gates, rng);
    // every node gets at least one qubit, the rest are scattered
    std::vector<std::size_t> owner(n);
    for (std::size_t q = 0; q < n; ++q) owner[q] = q < n_nodes ? q : rng() % n_nodes;
    std::shuffle(owner.begin(), owner.end(), rng);
    std::vector<std::pair<std::string, std::vector<std::size_t>>> parts(n_nodes);
    for (std::size_t k = 0; k < n_nodes; ++k) parts[k].first = std::to_string(k + 1);
    for (std::size_t q = 0; q < n; ++q) parts[owner[q]].second.push_back(q);
    const DistributedCircuit d = create_distributed_circuit(c, NodeMap(parts));
    gadgets += d.nonlocal_count;
    worst = std::max(worst, total_variation(data_distribution(d.circuit, n), oracle_distribution(c)));
  }
  return {worst <= 1e-9, "200 circuits, " + std::to_string(gadgets) + " gadgets, max TV " + fmt("%.2e", worst)};
}

Outcome dynamic_qft_equivalence() {
  double worst = 0, worst_fourier = 0;
  for (std::size_t n = 2; n <= 5; ++n)
    for (std::size_t x = 0; x < (std::size_t{1} << n); ++x) {
      for (bool fourier_input : {false, true}) {
        Circuit prep(n, n);
        for (std::size_t q = 0; q < n; ++q)
          if (x >> q & 1) prep.x(q);
        if (fourier_input) prep.compose(build_qft(n, false), range(n));
        Circuit coherent = prep;
        coherent.compose(build_qft(n, true), range(n));
        Circuit dynamic = prep;
        dynamic.compose(build_dynamic_qft(n), range(n), range(n));
        const double tv = total_variation(oracle_distribution(coherent), exact_distribution(dynamic));
        (fourier_input ? worst_fourier : worst) = std::max(fourier_input ? worst_fourier : worst, tv);
      }
    }
  return {worst <= 1e-9 && worst_fourier <= 1e-9,
          "basis inputs max TV " + fmt("%.2e", worst) + ", Fourier-basis inputs max TV " + fmt("%.2e", worst_fourier)};
}

Outcome qpe_exact_case() {
  Circuit one(1, 0);
  one.x(0);
  const double pz = exact_distribution(build_qpe(gates::z(), 3, one))["100"];
  const Matrix u = rx_ry_example();
  const double prx = exact_distribution(build_qpe(u, 3, prep_state(eigenvector_for(u, Complex(-1, 0)))))["100"];
  return {pz >= 1 - 1e-6 && prx >= 0.999, "P(100) Z: " + fmt("%.12f", pz) + ", RX(pi) x RY(pi): " + fmt("%.12f", prx)};
}

Outcome noise_channel_exactness() {
  std::mt19937_64 rng(505);
  auto random_rho = [&](std::size_t n) {
    const Matrix a = random_unitary(Eigen::Index{1} << n, rng);
    std::uniform_real_distribution<double> w(0, 1);
    Eigen::VectorXd p(a.rows());
    for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = w(rng);
    p /= p.sum();
    return Matrix(a * p.cast<Complex>().asDiagonal() * a.adjoint());
  };
  // closed form: (1 - eps) rho + eps Tr_qs(rho) (x) I / 2^k, built by partial trace
  auto replace_with_mixed = [](const Matrix& rho, const std::vector<std::size_t>& qs, std::size_t n) {
    const auto dim = rho.rows();
    std::size_t mask = 0;
    for (std::size_t q : qs) mask |= std::size_t{1} << q;
    Matrix out = Matrix::Zero(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i)
      for (Eigen::Index j = 0; j < dim; ++j) {
        const auto a = static_cast<std::size_t>(i), b = static_cast<std::size_t>(j);
        if ((a & mask) != (b & mask)) continue;
        Complex s = 0;
        for (std::size_t k = 0; k < (std::size_t{1} << n); ++k)
          if ((k & ~mask) == 0) s += rho(static_cast<Eigen::Index>((a & ~mask) | k), static_cast<Eigen::Index>((b & ~mask) | k));
        out(i, j) = s / static_cast<double>(std::size_t{1} << qs.size());
      }
    return out;
  };
  double worst_channel = 0;
  for (int rep = 0; rep < 20; ++rep) {
    const Matrix rho = random_rho(3);
    const double eps = 0.01 + 0.04 * rep;
    DensityMatrix a = DensityMatrix::from_matrix(rho);
    a.depolarize_1q(1, eps);
    worst_channel = std::max(worst_channel, (a.to_matrix() - ((1 - eps) * rho + eps * replace_with_mixed(rho, {1}, 3))).cwiseAbs().maxCoeff());
    DensityMatrix b = DensityMatrix::from_matrix(rho);
    b.depolarize_2q(2, 0, eps);
    worst_channel = std::max(worst_channel, (b.to_matrix() - ((1 - eps) * rho + eps * replace_with_mixed(rho, {0, 2}, 3))).cwiseAbs().maxCoeff());
  }
  const NoiseParams noise = NoiseParams::depolarizing(0.01, 0.03, 0.02);
  double worst_tv = 0;
  for (int rep = 0; rep < 10; ++rep) {
    Circuit c = oracle::random_unitary_circuit(4, 16, rng);
    c.measure(0, 0);
    c.x(3).c_if(0, 1);
    c.measure(1, 1);
    c.measure(2, 2);
    c.measure(3, 3);
    RunOptions traj;
    traj.backend = Backend::trajectory;
    traj.threads = std::max(1u, std::thread::hardware_concurrency());
    const Histogram h = run(c, 100000, noise, 9000 + static_cast<std::uint64_t>(rep), traj);
    worst_tv = std::max(worst_tv, total_variation(h.distribution(), exact_distribution(c, noise)));
  }
  return {worst_channel <= 1e-12 && worst_tv <= 0.01,
          "channel max diff " + fmt("%.2e", worst_channel) + ", trajectory vs density max TV " + fmt("%.4f", worst_tv)};
}

Outcome first_order_tracking() {
  const NoiseParams noise = NoiseParams::depolarizing(0.001, 0.01, 0.0025);
  const NodeMap nodes({{"1", {0}}, {"2", {1}}});
  bool ok = true;
  std::ostringstream ss;
  for (std::size_t N = 1; N <= 5; ++N) {
    Circuit c(2, 0);
    c.h(0).eps_override = 0.0;  // noiseless input preparation
    for (std::size_t k = 0; k < N; ++k) c.cx(0, 1);
    const DistributedCircuit d = create_distributed_circuit(c, nodes);
    const double f = final_density(d.circuit, noise).reduced({0, 1}).fidelity(statevector(c));
    const double predicted = analytic_gate_fidelity(N, noise);
    const double rel = std::abs(f - predicted) / predicted;
    ok = ok && d.nonlocal_count == N && rel <= 0.10;
    ss << (N > 1 ? ", " : "") << "N=" << N << " F=" << fmt("%.4f", f) << " vs " << fmt("%.4f", predicted);
  }
  return {ok, ss.str()};
}

Outcome dqpe_advantage() {
  ex::QpeSweepConfig cfg;
  cfg.n = 5;
  cfg.eps_m_quarter = true;
  cfg.eps_d_tenth = true;
  cfg.eps_g = {0.002, 0.005, 0.01, 0.02};
  cfg.shots = 20000;
  cfg.replications = 20;
  const ex::Csv csv = ex::cmd_qpe_sweep(cfg, 707);
  bool ok = true;
  std::ostringstream ss;
  for (std::size_t i = 0; i < cfg.eps_g.size(); ++i) {
    const auto &q = csv.rows[2 * i], &d = csv.rows[2 * i + 1];
    const double mq = std::stod(q[9]), sq = std::stod(q[10]), md = std::stod(d[9]), sd = std::stod(d[10]);
    const double band = 3 * std::sqrt(sq * sq + sd * sd);
    ok = ok && q[0] == "QPE" && d[0] == "DQPE" && md - mq > band;
    ss << (i ? ", " : "") << "eps_g=" << cfg.eps_g[i] << ": " << fmt("%.4f", md) << " vs " << fmt("%.4f", mq)
       << " (3sigma " << fmt("%.4f", band) << ")";
  }
  return {ok, ss.str()};
}

Outcome grover_law() {
  const std::size_t n = 2;
  const double c = kPi / 3;
  const double theta = std::asin(std::sqrt(summation_oracle(n, c)));
  double worst = 0;
  for (std::size_t m = 0; m <= 3; ++m) {
    const Circuit g = build_grover_circuit(n, c, m);
    const double p1 = oracle::branch_distribution(g, {0})["1"];
    const double p1_engine = exact_distribution(g)["1"];
    const double want = std::pow(std::sin((2.0 * static_cast<double>(m) + 1) * theta), 2);
    worst = std::max({worst, std::abs(p1 - want), std::abs(p1_engine - want)});
  }
  return {worst <= 1e-8, "max |P(1) - sin^2((2M+1) theta)| " + fmt("%.2e", worst)};
}

Outcome mlae_cramer_rao() {
  const std::size_t n = 3, R = 100, N = 100;
  const double c = kPi / 3;
  const std::vector<std::size_t> schedule{0, 1, 2, 4, 8, 16, 32};
  const double a_true = summation_oracle(n, c), theta = std::asin(std::sqrt(a_true));
  const NodeMap nodes = ex::qae_nodes(n, 2);
  std::vector<double> p1(schedule.size());
  for (std::size_t j = 0; j < schedule.size(); ++j)
    p1[j] = exact_distribution(create_distributed_circuit(build_grover_circuit(n, c, schedule[j]), nodes).circuit)["1"];
  std::vector<double> sq(schedule.size(), 0.0);
  for (std::size_t r = 0; r < R; ++r) {
    Rng rng(derive_seed(909, r));
    std::vector<std::uint64_t> hits(schedule.size(), 0);
    for (std::size_t j = 0; j < schedule.size(); ++j)
      for (std::size_t s = 0; s < N; ++s) hits[j] += bernoulli(rng, p1[j]) ? 1 : 0;
    for (std::size_t j = 0; j < schedule.size(); ++j) {
      const std::vector<std::size_t> powers(schedule.begin(), schedule.begin() + static_cast<std::ptrdiff_t>(j + 1));
      const std::vector<std::uint64_t> h(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(j + 1));
      const double e = *mlae_estimate(h, MlaeSchedule::uniform(powers, N), a_true).estimation_error;
      sq[j] += e * e;
    }
  }
  std::vector<double> rms(schedule.size());
  for (std::size_t j = 0; j < schedule.size(); ++j) rms[j] = std::sqrt(sq[j] / static_cast<double>(R));
  const double cr = cramer_rao_bound(theta, MlaeSchedule::uniform(schedule, N));
  // an RMS over R draws has relative standard error about 1 / sqrt(2R)
  const double rel_se = 1.0 / std::sqrt(2.0 * static_cast<double>(R));
  bool decreasing = true;
  for (std::size_t j = 1; j < schedule.size(); ++j)
    decreasing = decreasing && rms[j] <= rms[j - 1] + 3 * rel_se * std::hypot(rms[j], rms[j - 1]);
  const bool magnitude = rms.front() > 1e-3 && rms.front() < 1e-1 && rms.back() > 5e-5 && rms.back() < 5e-3;
  std::ostringstream ss;
  ss << "RMS by schedule prefix:";
  for (double v : rms) ss << " " << fmt("%.2e", v);
  ss << "; full-schedule RMS / CR = " << fmt("%.3f", rms.back() / cr) << " (CR " << fmt("%.2e", cr) << ")";
  return {rms.back() <= 2 * cr && decreasing && magnitude, ss.str()};
}

Outcome entanglement_accounting() {
  const NodeMap nodes = ex::qae_nodes(3, 2);
  bool ok = true;
  std::ostringstream ss;
  for (std::size_t m : {0, 1}) {
    const DistributedCircuit d = create_distributed_circuit(build_grover_circuit(3, kPi / 3, m), nodes);
    const double N = static_cast<double>(d.nonlocal_count);
    if (m == 0) ok = ok && d.nonlocal_count == 6;
    for (double p : {1.0, 0.8, 0.5}) {
      Rng rng(derive_seed(1010, static_cast<std::uint64_t>(p * 10) + 100 * m));
      const std::size_t R = 10000;
      double sum = 0;
      bool exact = true;
      for (std::size_t r = 0; r < R; ++r) {
        const auto k = account_run(d, LinkParams{p, 1}, rng).total_trials;
        sum += static_cast<double>(k);
        exact = exact && static_cast<double>(k) == N;
      }
      const double mean = sum / R, sigma = std::sqrt(N * (1 - p) / (p * p)) / std::sqrt(double(R));
      ok = ok && std::abs(mean - N / p) <= 3 * sigma && (p < 1 || exact);
      ss << (ss.tellp() ? ", " : "") << "N=" << N << " p=" << p << " mean k " << fmt("%.3f", mean) << " vs "
         << fmt("%.3f", N / p);
    }
  }
  return {ok, ss.str()};
}

Outcome distribution_loading() {
  ex::DistloadConfig cfg;
  cfg.n = 8;
  cfg.mu = 1;
  cfg.sigma = 2;
  cfg.shots = 10000;
  cfg.replications = 20;
  const std::vector<std::size_t> node_counts{1, 2, 4, 8};
  const std::vector<double> eps{0.002, 0.005, 0.009};
  const ex::DistloadPoint clean = ex::distload_point(cfg, 1, 0.0, 1111);
  bool ok = clean.exact >= 1 - 1e-6;
  std::ostringstream ss;
  ss << "noiseless F " << fmt("%.9f", clean.exact);
  auto points = ex::parallel_map(eps.size() * node_counts.size(), [&](std::size_t i) {
    return ex::distload_point(cfg, node_counts[i % node_counts.size()], eps[i / node_counts.size()],
                              derive_seed(1111, i + 1));
  });
  for (std::size_t e = 0; e < eps.size(); ++e) {
    ss << "; eps=" << eps[e] << ":";
    for (std::size_t k = 0; k < node_counts.size(); ++k) {
      const auto& pt = points[e * node_counts.size() + k];
      ss << " " << fmt("%.4f", ex::mean_of(pt.sampled));
      if (k == 0) continue;
      const auto& prev = points[e * node_counts.size() + k - 1];
      const double s0 = ex::stddev_of(prev.sampled), s1 = ex::stddev_of(pt.sampled);
      ok = ok && ex::mean_of(pt.sampled) <= ex::mean_of(prev.sampled) + 3 * std::hypot(s0, s1);
      ok = ok && pt.exact <= prev.exact + 1e-12;
    }
  }
  return {ok, ss.str()};
}

Outcome comm_decoherence_formula() {
  const double eps = comm_depolarization(signal_time(10.0, 2e8), 50e-6);
  const double spec_value = 9.9995e-4;
  const bool four_figures = fmt("%.3e", eps) == fmt("%.3e", spec_value);
  return {four_figures, "computed " + fmt("%.5e", eps) + ", expected " + fmt("%.5e", spec_value) + " to 4 significant figures"};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "gadget correctness", 1, gadget_correctness},
      {2, "distribution-preserving compilation", 30, compilation_preserves_distributions},
      {3, "dynamic-QFT equivalence", 30, dynamic_qft_equivalence},
      {4, "QPE exact case", 5, qpe_exact_case},
      {5, "noise-channel exactness", 120, noise_channel_exactness},
      {6, "first-order fidelity tracking", 60, first_order_tracking},
      {7, "DQPE advantage", 600, dqpe_advantage},
      {8, "Grover law", 5, grover_law},
      {9, "MLAE and Cramer-Rao", 600, mlae_cramer_rao},
      {10, "entanglement accounting", 60, entanglement_accounting},
      {11, "distribution loading", 900, distribution_loading},
      {12, "comm-decoherence formula", 1, comm_decoherence_formula},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.limit_s;
    const bool pass = o.pass && in_time;
    failed += pass ? 0 : 1;
    std::printf("%s %2d %s: %s [%.2f s, limit %.0f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs,
                c.limit_s, in_time ? "" : ", exceeded");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
