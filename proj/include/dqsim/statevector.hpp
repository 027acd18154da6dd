#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dqsim/circuit.hpp"
#include "dqsim/kernels.hpp"

namespace dqsim {

/// Applies a unitary instruction to an amplitude array; bits[j] is the array bit
/// holding in.qubits[j]. With `conjugate`, applies the elementwise conjugate matrix
/// (the column half of U rho U^dagger).
inline void apply_unitary(std::span<Complex> a, std::span<const unsigned> bits, const Instruction& in,
                          bool conjugate = false) {
  using kernels::Index;
  auto cj = [&](const Mat2& m) -> Mat2 { return conjugate ? Mat2(m.conjugate()) : m; };
  switch (in.kind) {
    case GateKind::CNOT: kernels::apply_cnot(a, bits[0], bits[1]); return;
    case GateKind::CP: {
      const Complex ph = std::polar(1.0, conjugate ? -in.params[0] : in.params[0]);
      kernels::apply_phase_mask(a, (Index{1} << bits[0]) | (Index{1} << bits[1]), ph);
      return;
    }
    case GateKind::CRY:
      kernels::apply_controlled_1q(a, Index{1} << bits[0], bits[1], gates::ry(in.params[0]));
      return;
    case GateKind::MCX: {
      Index mask = 0;
      for (std::size_t i = 0; i + 1 < bits.size(); ++i) mask |= Index{1} << bits[i];
      kernels::apply_controlled_1q(a, mask, bits.back(), gates::x());
      return;
    }
    case GateKind::CU:
      if (bits.size() == 2) {
        kernels::apply_controlled_1q(a, Index{1} << bits[0], bits[1], cj(Mat2(in.matrix)));
        return;
      }
      break;
    case GateKind::Unitary:
      if (bits.size() == 1) {
        kernels::apply_1q(a, bits[0], cj(Mat2(in.matrix)));
        return;
      }
      break;
    case GateKind::Measure:
    case GateKind::Reset:
    case GateKind::Barrier: throw ContractError("apply_unitary on a non-unitary instruction");
    default: kernels::apply_1q(a, bits[0], cj(single_qubit_matrix(in))); return;
  }
  Matrix m = gate_matrix(in);
  if (conjugate) m = m.conjugate().eval();
  kernels::apply_matrix(a, bits, m);
}

/// Dense pure state. Qubit 0 is the least-significant bit of the basis index.
class StateVector {
 public:
  explicit StateVector(std::size_t num_qubits)
      : num_qubits_(num_qubits), amps_(std::size_t{1} << num_qubits, Complex{0}) {
    amps_[0] = 1;
  }
  StateVector(std::size_t num_qubits, std::vector<Complex> amps) : num_qubits_(num_qubits), amps_(std::move(amps)) {
    if (amps_.size() != (std::size_t{1} << num_qubits)) throw ValidationError("amplitude count is not 2^n");
  }

  std::size_t num_qubits() const { return num_qubits_; }
  std::span<Complex> amplitudes() { return amps_; }
  std::span<const Complex> amplitudes() const { return amps_; }
  const Complex& operator[](std::size_t i) const { return amps_[i]; }

  void apply(const Instruction& in) {
    std::vector<unsigned> bits(in.qubits.begin(), in.qubits.end());
    for (std::size_t q : in.qubits)
      if (q >= num_qubits_) throw IndexError("qubit " + std::to_string(q) + " out of range");
    apply_unitary(amps_, bits, in);
  }

  double prob_one(std::size_t q) const { return kernels::prob_one(amps_, static_cast<unsigned>(q)); }
  double norm() const { return kernels::norm_squared(amps_); }

  /// Projects qubit q onto `bit` and renormalizes.
  void collapse(std::size_t q, int bit) {
    const std::uint64_t m = std::uint64_t{1} << q;
    double kept = 0;
    for (std::uint64_t i = 0; i < amps_.size(); ++i) {
      if (((i & m) != 0) != (bit == 1)) amps_[i] = 0;
      else kept += std::norm(amps_[i]);
    }
    const double s = 1.0 / std::sqrt(kept);
    for (auto& v : amps_) v *= s;
  }

  std::vector<double> probabilities() const {
    std::vector<double> p(amps_.size());
    for (std::size_t i = 0; i < amps_.size(); ++i) p[i] = std::norm(amps_[i]);
    return p;
  }

  void scale(Complex f) {
    for (auto& v : amps_) v *= f;
  }

 private:
  std::size_t num_qubits_;
  std::vector<Complex> amps_;
};

}  // namespace dqsim
