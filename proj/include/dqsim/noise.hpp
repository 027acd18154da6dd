#pragma once

#include <cmath>
#include <span>
#include <string>

#include "dqsim/density_matrix.hpp"
#include "dqsim/error.hpp"
#include "dqsim/rng.hpp"

namespace dqsim {

struct NoiseParams {
  double eps_d = 0;      // single-qubit depolarization per gate
  double eps_g = 0;      // two-qubit depolarization per gate
  double eps_m = 0;      // measurement bit flip
  double eps_reset = 0;  // post-reset flip
  double t_comm = 0;     // classical communication time [s]
  double T2 = 0;         // coherence time [s]

  /// eps_reset follows eps_m unless set separately.
  static NoiseParams depolarizing(double eps_d, double eps_g, double eps_m) {
    NoiseParams p;
    p.eps_d = eps_d;
    p.eps_g = eps_g;
    p.eps_m = eps_m;
    p.eps_reset = eps_m;
    return p;
  }

  bool is_noiseless() const { return eps_d == 0 && eps_g == 0 && eps_m == 0 && eps_reset == 0 && comm_eps() == 0; }

  /// Rate applied to classically conditioned corrections: 1 - exp(-t/T2) when a
  /// communication time is configured, otherwise the single-qubit rate.
  double comm_eps() const { return t_comm > 0 ? 1.0 - std::exp(-t_comm / T2) : eps_d; }
};

inline void validate(const NoiseParams& p) {
  auto check = [](double v, const char* name) {
    if (!(v >= 0 && v <= 1)) throw ValidationError(std::string(name) + " must lie in [0,1]");
  };
  check(p.eps_d, "eps_d");
  check(p.eps_g, "eps_g");
  check(p.eps_m, "eps_m");
  check(p.eps_reset, "eps_reset");
  if (p.t_comm < 0) throw ValidationError("t_comm_s must be non-negative");
  if (p.t_comm > 0 && !(p.T2 > 0)) throw ValidationError("T2_s must be positive when t_comm_s > 0");
}

/// 1 - exp(-t/T2)
inline double comm_depolarization(double t_comm, double T2) {
  if (!(T2 > 0)) throw DomainError("T2 must be positive");
  return 1.0 - std::exp(-t_comm / T2);
}

/// Communication time for a link of `distance_m` metres at `speed_m_per_s`.
inline double signal_time(double distance_m, double speed_m_per_s) { return distance_m / speed_m_per_s; }

/// First-order fidelity after N distributed gates: (1 - (eps_d + eps_g + 2 eps_m))^N.
inline double analytic_gate_fidelity(std::size_t nonlocal_gates, const NoiseParams& p) {
  const double base = 1.0 - (p.eps_d + p.eps_g + 2 * p.eps_m);
  if (base < 0)
    throw DomainError("eps_d + eps_g + 2 eps_m = " + std::to_string(1 - base) +
                      " exceeds 1; parameters are outside the first-order regime");
  return std::pow(base, static_cast<double>(nonlocal_gates));
}

/// Phase-estimation fidelity estimate. Local: (1-eps_g)^(N + n(n-1)/2) with a
/// static QFT; distributed with dynamic QFT: (1-eps_g)^(2N).
inline double qpe_fidelity_theory(std::size_t counting_qubits, std::size_t controlled_gates, double eps_g,
                                  bool distributed) {
  if (counting_qubits < 1) throw DomainError("at least one counting qubit is required");
  const double n = static_cast<double>(counting_qubits);
  const double big_n = static_cast<double>(controlled_gates);
  const double exponent = distributed ? 2 * big_n : big_n + n * (n - 1) / 2;
  return std::pow(1.0 - eps_g, exponent);
}

inline int flip_measurement(int bit, double eps_m, Rng& rng) {
  if (eps_m > 0 && bernoulli(rng, eps_m)) return bit ^ 1;
  return bit;
}

// Trajectory forms: a uniformly drawn Pauli (identity included) with probability eps.

/// Returns the Pauli index (0..3) to apply, 0 when nothing happens.
inline int sample_pauli_1q(double eps, Rng& rng) {
  if (eps <= 0 || !bernoulli(rng, eps)) return 0;
  return static_cast<int>(rng() % 4);
}

/// Returns a pair of Pauli indices for the two qubits.
inline std::pair<int, int> sample_pauli_2q(double eps, Rng& rng) {
  if (eps <= 0 || !bernoulli(rng, eps)) return {0, 0};
  const int k = static_cast<int>(rng() % 16);
  return {k & 3, k >> 2};
}

inline void depolarize_1q(StateVector& psi, std::size_t q, double eps, Rng& rng) {
  kernels::apply_pauli(psi.amplitudes(), static_cast<unsigned>(q), sample_pauli_1q(eps, rng));
}

inline void depolarize_2q(StateVector& psi, std::size_t a, std::size_t b, double eps, Rng& rng) {
  auto [pa, pb] = sample_pauli_2q(eps, rng);
  kernels::apply_pauli(psi.amplitudes(), static_cast<unsigned>(a), pa);
  kernels::apply_pauli(psi.amplitudes(), static_cast<unsigned>(b), pb);
}

inline void depolarize_1q(DensityMatrix& rho, std::size_t q, double eps) { rho.depolarize_1q(q, eps); }

inline void depolarize_2q(DensityMatrix& rho, std::size_t a, std::size_t b, double eps) {
  rho.depolarize_2q(a, b, eps);
}

}  // namespace dqsim
