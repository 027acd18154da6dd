#pragma once

// Circuit generators and estimators: QPE, the amplitude-estimation operator
// family, maximum-likelihood amplitude estimation and normal-distribution loading.

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dqsim/circuit.hpp"
#include "dqsim/dynamic.hpp"
#include "dqsim/error.hpp"
#include "dqsim/histogram.hpp"
#include "dqsim/matrix.hpp"

namespace dqsim {

// ---------------------------------------------------------------- phase estimation

/// Counting qubits 0..n-1, system register above them. Counting qubit j controls
/// u^(2^(n-1-j)) and is measured into clbit n-1-j, so bitstring character 0 is the
/// most significant bit of the phase fraction.
inline Circuit build_qpe(const Matrix& u, std::size_t n_counting, const Circuit& eigenstate_prep, bool dynamic = false,
                         const DynamicOptions& opt = {}) {
  if (n_counting < 1) throw ValidationError("QPE needs at least one counting qubit");
  if (!is_unitary(u)) throw ValidationError("QPE operator is not unitary");
  const std::size_t s = eigenstate_prep.num_qubits;
  if (u.rows() != (Eigen::Index{1} << s) || u.cols() != u.rows())
    throw ValidationError("operator dimension " + std::to_string(u.rows()) + " does not match a " + std::to_string(s) +
                          "-qubit system register");
  if (eigenstate_prep.has_nonunitary()) throw ValidationError("eigenstate preparation must be unitary");
  const std::size_t n = n_counting;
  Circuit c(n + s, n);
  std::vector<std::size_t> sys(s);
  for (std::size_t i = 0; i < s; ++i) sys[i] = n + i;
  c.compose(eigenstate_prep, sys);
  for (std::size_t j = 0; j < n; ++j) c.h(j);
  Matrix power = u;
  for (std::size_t k = 0; k < n; ++k) {  // power = u^(2^k), applied from counting qubit n-1-k
    c.cu(power, n - 1 - k, sys);
    power = power * power;
  }
  std::vector<std::size_t> counting(n);
  for (std::size_t j = 0; j < n; ++j) counting[j] = j;
  c.compose(build_qft(n, true), counting);
  for (std::size_t j = 0; j < n; ++j) c.measure(j, n - 1 - j);
  c.registers["counting"] = {0, n};
  c.registers["system"] = {n, s};
  return dynamic ? rewrite_terminal_qft(c, counting, opt) : c;
}

/// Bitstring y0 y1 ... y(n-1), y0 most significant, as a fraction of 2^n.
inline double decode_phase(const std::string& bits) {
  if (bits.empty()) throw ValidationError("empty phase bitstring");
  double y = 0;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] != '0' && bits[i] != '1') throw ValidationError("phase bitstring has a non-binary character");
    if (bits[i] == '1') y += std::ldexp(1.0, -static_cast<int>(i + 1));
  }
  return y;
}

/// Inverse of decode_phase for fractions with an exact n-bit expansion.
inline std::string encode_phase(double y, std::size_t n) {
  std::string s(n, '0');
  auto v = static_cast<unsigned long long>(std::llround(y * std::ldexp(1.0, static_cast<int>(n)))) % (1ULL << n);
  for (std::size_t i = 0; i < n; ++i)
    if (v >> (n - 1 - i) & 1) s[i] = '1';
  return s;
}

struct PhaseResult {
  std::string top;
  double y = 0;
  double p_correct = 0;
};

inline PhaseResult phase_result(const Distribution& d, const std::string& correct) {
  if (d.empty()) throw ValidationError("empty distribution");
  PhaseResult r;
  double best = -1;
  for (const auto& [k, p] : d)
    if (p > best) {
      best = p;
      r.top = k;
    }
  r.y = decode_phase(r.top);
  auto it = d.find(correct);
  r.p_correct = it == d.end() ? 0.0 : it->second;
  return r;
}

/// Eigenvector of u whose eigenvalue is closest to `eigenvalue`.
inline Eigen::VectorXcd eigenvector_for(const Matrix& u, Complex eigenvalue) {
  Eigen::ComplexEigenSolver<Matrix> es(u);
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < es.eigenvalues().size(); ++i)
    if (std::abs(es.eigenvalues()(i) - eigenvalue) < std::abs(es.eigenvalues()(best) - eigenvalue)) best = i;
  if (std::abs(es.eigenvalues()(best) - eigenvalue) > 1e-8)
    throw DomainError("operator has no eigenvalue near the requested one");
  return es.eigenvectors().col(best).normalized();
}

/// Unitary block whose first column is `v` (prepares v from |0...0>).
inline Matrix state_prep_matrix(const Eigen::VectorXcd& v) {
  const Eigen::Index dim = v.size();
  Matrix basis(dim, dim);
  basis.col(0) = v.normalized();
  basis.rightCols(dim - 1) = Matrix::Identity(dim, dim).rightCols(dim - 1);
  Eigen::HouseholderQR<Matrix> qr(basis);
  Matrix q = qr.householderQ();
  // fix the phase of the first column so it equals v exactly
  const Complex ph = q.col(0).dot(v.normalized());
  q.col(0) *= ph / std::abs(ph);
  return q;
}

/// The two-qubit example operator RX(pi) (x) RY(pi), as a block on 2 qubits
/// (matrix bit 0 = first qubit, acted on by RX).
inline Matrix rx_ry_example() { return kron(gates::ry(kPi), gates::rx(kPi)); }

inline Circuit prep_state(const Eigen::VectorXcd& v) {
  const auto s = static_cast<std::size_t>(std::llround(std::log2(static_cast<double>(v.size()))));
  Circuit c(s, 0);
  std::vector<std::size_t> qs(s);
  for (std::size_t i = 0; i < s; ++i) qs[i] = i;
  c.unitary(state_prep_matrix(v), qs);
  return c;
}

// ---------------------------------------------------------------- amplitude estimation

/// f(x_i) = sin^2(c (i + 1/2) / 2^n) for i = 0 .. 2^n - 1.
inline std::vector<double> sin2_samples(std::size_t n, double c) {
  std::vector<double> f(std::size_t{1} << n);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double s = std::sin(c * (static_cast<double>(i) + 0.5) / static_cast<double>(f.size()));
    f[i] = s * s;
  }
  return f;
}

inline double expectation_from_uniform(const std::vector<double>& f) {
  if (f.empty()) throw ValidationError("no function samples");
  double sum = 0;
  for (double v : f) {
    if (!(v >= 0 && v <= 1)) throw DomainError("function sample " + std::to_string(v) + " outside [0, 1]");
    sum += v;
  }
  return sum / static_cast<double>(f.size());
}

/// Index qubits 0..n-1, ancilla n. P(ancilla = 1) = mean of sin2_samples(n, c).
inline Circuit build_A_sin2(std::size_t n, double c) {
  if (n < 1) throw ValidationError("A operator needs at least one index qubit");
  if (!(c > 0 && c <= kPi)) throw ValidationError("c must lie in (0, pi]");
  Circuit a(n + 1, 1);
  for (std::size_t k = 0; k < n; ++k) a.h(k);
  a.ry(c / std::ldexp(1.0, static_cast<int>(n)), n);
  for (std::size_t k = 0; k < n; ++k) a.cry(c / std::ldexp(1.0, static_cast<int>(n - 1 - k)), k, n);
  return a;
}

/// Q = -A S0 A^-1 S_X on n index qubits plus the ancilla (qubit n).
inline Circuit build_grover_Q(const Circuit& a, std::size_t n) {
  if (a.has_nonunitary()) throw ContractError("A operator contains measurement, reset or classical control");
  if (n < 1 || a.num_qubits != n + 1) throw ValidationError("A operator must act on n + 1 qubits");
  Circuit q(n + 1, a.num_clbits);
  std::vector<std::size_t> all(n + 1);
  for (std::size_t i = 0; i <= n; ++i) all[i] = i;
  q.z(n);
  q.compose(inverse(a), all);
  for (std::size_t i = 0; i <= n; ++i) q.x(i);
  q.h(n);
  q.mcx(std::vector<std::size_t>(all.begin(), all.end() - 1), n);
  q.h(n);
  for (std::size_t i = 0; i <= n; ++i) q.x(i);
  q.compose(a, all);
  q.global_phase += kPi;
  return q;
}

/// A followed by Q^m, ancilla measured into clbit 0.
inline Circuit build_grover_circuit(std::size_t n, double c, std::size_t m) {
  const Circuit a = build_A_sin2(n, c);
  const Circuit q = build_grover_Q(a, n);
  Circuit out(n + 1, 1);
  std::vector<std::size_t> all(n + 1);
  for (std::size_t i = 0; i <= n; ++i) all[i] = i;
  out.compose(a, all);
  for (std::size_t k = 0; k < m; ++k) out.compose(q, all);
  out.measure(n, 0);
  return out;
}

struct MlaeSchedule {
  std::vector<std::size_t> powers;
  std::vector<std::uint64_t> shots;

  static MlaeSchedule uniform(std::vector<std::size_t> powers, std::uint64_t shots) {
    MlaeSchedule s;
    s.shots.assign(powers.size(), shots);
    s.powers = std::move(powers);
    return s;
  }
};

struct MlaeResult {
  double a_hat = 0;
  double theta_hat = 0;
  std::optional<double> estimation_error;
  double cramer_rao_bound = 0;
  bool multimodal = false;
};

inline void validate(const MlaeSchedule& s) {
  if (s.powers.empty() || s.powers.size() != s.shots.size())
    throw ValidationError("schedule needs matching, nonempty power and shot lists");
  for (std::size_t j = 0; j < s.powers.size(); ++j) {
    if (j > 0 && s.powers[j] <= s.powers[j - 1]) throw ValidationError("Grover powers must be strictly increasing");
    if (s.shots[j] < 1) throw ValidationError("every schedule entry needs at least one shot");
  }
}

inline double mlae_log_likelihood(double theta, const std::vector<std::uint64_t>& hits, const MlaeSchedule& s) {
  double ll = 0;
  for (std::size_t j = 0; j < hits.size(); ++j) {
    const double angle = (2.0 * static_cast<double>(s.powers[j]) + 1) * theta;
    const double p1 = std::sin(angle) * std::sin(angle), p0 = std::cos(angle) * std::cos(angle);
    const auto h = static_cast<double>(hits[j]), miss = static_cast<double>(s.shots[j] - hits[j]);
    if (h > 0) ll += h * std::log(std::max(p1, 1e-300));
    if (miss > 0) ll += miss * std::log(std::max(p0, 1e-300));
  }
  return ll;
}

/// Standard-deviation lower bound for a = sin^2(theta).
inline double cramer_rao_bound(double theta, const MlaeSchedule& s) {
  double fisher = 0;
  for (std::size_t j = 0; j < s.powers.size(); ++j) {
    const double k = 2.0 * static_cast<double>(s.powers[j]) + 1;
    fisher += 4.0 * static_cast<double>(s.shots[j]) * k * k;
  }
  return std::abs(std::sin(2 * theta)) / std::sqrt(fisher);
}

inline double mlae_score(double theta, const std::vector<std::uint64_t>& hits, const MlaeSchedule& s) {
  double d = 0;
  for (std::size_t j = 0; j < hits.size(); ++j) {
    const double k = 2.0 * static_cast<double>(s.powers[j]) + 1;
    const auto h = static_cast<double>(hits[j]), miss = static_cast<double>(s.shots[j] - hits[j]);
    if (h > 0) d += 2 * k * h / std::tan(k * theta);
    if (miss > 0) d -= 2 * k * miss * std::tan(k * theta);
  }
  return d;
}

inline MlaeResult mlae_estimate(const std::vector<std::uint64_t>& hits, const MlaeSchedule& s,
                                std::optional<double> a_true = std::nullopt) {
  validate(s);
  if (hits.size() != s.powers.size()) throw ValidationError("one hit count per schedule entry expected");
  for (std::size_t j = 0; j < hits.size(); ++j)
    if (hits[j] > s.shots[j]) throw ValidationError("hit count exceeds shots at schedule entry " + std::to_string(j));

  constexpr std::size_t grid = 10000;
  const double step = (kPi / 2) / static_cast<double>(grid - 1);
  auto at = [&](std::size_t g) { return g + 1 == grid ? kPi / 2 : static_cast<double>(g) * step; };
  std::vector<double> ll(grid);
  for (std::size_t g = 0; g < grid; ++g) ll[g] = mlae_log_likelihood(at(g), hits, s);
  const double top = *std::max_element(ll.begin(), ll.end());

  // refine every grid peak close to the top, then keep the smallest maximizer
  auto refine = [&](std::size_t g) {
    double lo = g == 0 ? 0.0 : at(g - 1), hi = g + 1 == grid ? kPi / 2 : at(g + 1);
    const double dlo = mlae_score(lo, hits, s), dhi = mlae_score(hi, hits, s);
    if (dlo > 0 && dhi < 0) {
      for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = (lo + hi) / 2;
        (mlae_score(mid, hits, s) > 0 ? lo : hi) = mid;
      }
      return (lo + hi) / 2;
    }
    return at(g);
  };
  std::vector<std::pair<double, double>> peaks;  // (theta, log-likelihood)
  for (std::size_t g = 0; g < grid; ++g) {
    const bool peak = (g == 0 || ll[g] >= ll[g - 1]) && (g + 1 == grid || ll[g] >= ll[g + 1]);
    if (!peak || ll[g] < top - 1.0) continue;
    const double th = refine(g);
    peaks.emplace_back(th, mlae_log_likelihood(th, hits, s));
  }
  double best_ll = -std::numeric_limits<double>::infinity();
  for (const auto& [_, v] : peaks) best_ll = std::max(best_ll, v);
  const double tol = 1e-9 * std::max(1.0, std::abs(best_ll));
  MlaeResult res;
  res.theta_hat = kPi;
  std::size_t maximizers = 0;
  for (const auto& [th, v] : peaks) {
    if (v < best_ll - tol) continue;
    if (maximizers == 0 || std::abs(th - res.theta_hat) > 2 * step) ++maximizers;
    res.theta_hat = std::min(res.theta_hat, th);
  }
  res.multimodal = maximizers > 1;
  res.a_hat = std::sin(res.theta_hat) * std::sin(res.theta_hat);
  res.cramer_rao_bound = cramer_rao_bound(res.theta_hat, s);
  if (a_true) res.estimation_error = std::abs(res.a_hat - *a_true);
  return res;
}

// ---------------------------------------------------------------- distribution loading

/// exp(-(x - mu)^2 / (2 sigma^2)) at 2^n equally spaced points over mu +- 3 sigma, normalized.
inline std::vector<double> normal_samples(std::size_t n, double mu, double sigma) {
  if (n < 1) throw ValidationError("need at least one qubit");
  if (!(sigma > 0)) throw ValidationError("sigma must be positive");
  const std::size_t dim = std::size_t{1} << n;
  std::vector<double> p(dim);
  double sum = 0;
  for (std::size_t i = 0; i < dim; ++i) {
    const double x = mu - 3 * sigma + 6 * sigma * static_cast<double>(i) / static_cast<double>(dim - 1);
    p[i] = std::exp(-(x - mu) * (x - mu) / (2 * sigma * sigma));
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

/// Amplitudes sqrt(p[i]) with qubit 0 the least significant bit of i. The most
/// significant qubit is rotated first; each later qubit gets a uniformly controlled
/// RY on the qubits above it.
inline Circuit load_distribution(const std::vector<double>& p) {
  const std::size_t dim = p.size();
  if (dim < 2 || (dim & (dim - 1))) throw ValidationError("probability vector length must be a power of two >= 2");
  const auto n = static_cast<std::size_t>(std::countr_zero(dim));
  Circuit c(n, n);
  for (std::size_t level = 0; level < n; ++level) {
    const std::size_t t = n - 1 - level, k = level;
    const std::size_t block = std::size_t{1} << (t + 1), half = block / 2;
    const std::size_t cases = std::size_t{1} << k;
    std::vector<double> alpha(cases);
    for (std::size_t j = 0; j < cases; ++j) {
      double left = 0, total = 0;
      for (std::size_t i = 0; i < block; ++i) {
        total += p[j * block + i];
        if (i < half) left += p[j * block + i];
      }
      alpha[j] = total > 0 ? 2 * std::acos(std::min(1.0, std::sqrt(left / total))) : 0.0;
    }
    if (k == 0) {
      c.ry(alpha[0], t);
      continue;
    }
    // Gray-code multiplexor: theta = M^T alpha / 2^k, M_ji = (-1)^popcount(j & gray(i))
    for (std::size_t i = 0; i < cases; ++i) {
      const std::size_t gi = i ^ (i >> 1);
      double theta = 0;
      for (std::size_t j = 0; j < cases; ++j) theta += (std::popcount(j & gi) & 1 ? -1.0 : 1.0) * alpha[j];
      theta /= static_cast<double>(cases);
      c.ry(theta, t);
      const std::size_t bit = i + 1 == cases ? k - 1 : static_cast<std::size_t>(std::countr_zero(i + 1));
      c.cx(t + 1 + bit, t);
    }
  }
  return c;
}

inline Circuit load_normal_distribution(std::size_t n, double mu, double sigma) {
  return load_distribution(normal_samples(n, mu, sigma));
}

inline double hellinger_fidelity(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw ValidationError("distributions have different lengths");
  double sp = 0, sq = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] < 0 || q[i] < 0) throw ValidationError("negative probability");
    sp += p[i];
    sq += q[i];
  }
  if (std::abs(sp - 1) > 1e-6 || std::abs(sq - 1) > 1e-6) throw ValidationError("distribution does not sum to 1");
  double bc = 0;
  for (std::size_t i = 0; i < p.size(); ++i) bc += std::sqrt(p[i] / sp * q[i] / sq);
  return std::min(1.0, bc * bc);
}

inline double hellinger_fidelity(const Distribution& p, const Distribution& q) {
  std::size_t width = SIZE_MAX;
  std::map<std::string, std::pair<double, double>> joint;
  auto add = [&](const Distribution& d, bool second) {
    for (const auto& [k, v] : d) {
      if (width != SIZE_MAX && k.size() != width) throw ValidationError("bitstrings of different widths");
      width = k.size();
      (second ? joint[k].second : joint[k].first) = v;
    }
  };
  add(p, false);
  add(q, true);
  std::vector<double> a, b;
  for (const auto& [_, v] : joint) {
    a.push_back(v.first);
    b.push_back(v.second);
  }
  return hellinger_fidelity(a, b);
}

}  // namespace dqsim
