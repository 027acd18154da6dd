#pragma once

// Amplitude-array kernels. A density matrix of n qubits is handled as a 2n-qubit
// array: column index in the low n bits, row index in the high n bits.

#include <cstdint>
#include <span>
#include <vector>

#include "dqsim/matrix.hpp"

namespace dqsim::kernels {

using Index = std::uint64_t;

inline Index insert_zero(Index i, unsigned bit) {
  const Index low = i & ((Index{1} << bit) - 1);
  return ((i >> bit) << (bit + 1)) | low;
}

inline void apply_1q(std::span<Complex> a, unsigned bit, const Mat2& u) {
  const Index half = a.size() / 2;
  const Index stride = Index{1} << bit;
  const Complex u00 = u(0, 0), u01 = u(0, 1), u10 = u(1, 0), u11 = u(1, 1);
  for (Index i = 0; i < half; ++i) {
    const Index i0 = insert_zero(i, bit);
    const Index i1 = i0 | stride;
    const Complex v0 = a[i0], v1 = a[i1];
    a[i0] = u00 * v0 + u01 * v1;
    a[i1] = u10 * v0 + u11 * v1;
  }
}

/// Applies u to `target` on the subspace where every bit of `control_mask` is set.
inline void apply_controlled_1q(std::span<Complex> a, Index control_mask, unsigned target, const Mat2& u) {
  const Index half = a.size() / 2;
  const Index stride = Index{1} << target;
  const Complex u00 = u(0, 0), u01 = u(0, 1), u10 = u(1, 0), u11 = u(1, 1);
  for (Index i = 0; i < half; ++i) {
    const Index i0 = insert_zero(i, target);
    if ((i0 & control_mask) != control_mask) continue;
    const Index i1 = i0 | stride;
    const Complex v0 = a[i0], v1 = a[i1];
    a[i0] = u00 * v0 + u01 * v1;
    a[i1] = u10 * v0 + u11 * v1;
  }
}

inline void apply_cnot(std::span<Complex> a, unsigned control, unsigned target) {
  const Index cmask = Index{1} << control;
  const Index tmask = Index{1} << target;
  const Index half = a.size() / 2;
  for (Index i = 0; i < half; ++i) {
    const Index i0 = insert_zero(i, target);
    if (i0 & cmask) std::swap(a[i0], a[i0 | tmask]);
  }
}

/// Multiplies by `phase` every amplitude whose index has all bits of `mask` set.
inline void apply_phase_mask(std::span<Complex> a, Index mask, Complex phase) {
  for (Index i = 0; i < a.size(); ++i)
    if ((i & mask) == mask) a[i] *= phase;
}

/// Generic k-qubit matrix; local index bit j <-> bits[j].
inline void apply_matrix(std::span<Complex> a, std::span<const unsigned> bits, const Matrix& u) {
  const std::size_t k = bits.size();
  const Index dim = Index{1} << k;
  std::vector<Index> offset(dim, 0);
  Index mask = 0;
  for (Index j = 0; j < dim; ++j)
    for (std::size_t l = 0; l < k; ++l)
      if (j & (Index{1} << l)) offset[j] |= Index{1} << bits[l];
  for (unsigned b : bits) mask |= Index{1} << b;
  std::vector<Complex> in(dim), out(dim);
  for (Index base = 0; base < a.size(); ++base) {
    if (base & mask) continue;
    for (Index j = 0; j < dim; ++j) in[j] = a[base + offset[j]];
    for (Index r = 0; r < dim; ++r) {
      Complex acc = 0;
      for (Index c = 0; c < dim; ++c) acc += u(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) * in[c];
      out[r] = acc;
    }
    for (Index j = 0; j < dim; ++j) a[base + offset[j]] = out[j];
  }
}

/// Pauli: 0 = I, 1 = X, 2 = Y, 3 = Z.
inline void apply_pauli(std::span<Complex> a, unsigned bit, int pauli) {
  const Index m = Index{1} << bit;
  switch (pauli) {
    case 1:
      for (Index i = 0; i < a.size(); ++i)
        if (!(i & m)) std::swap(a[i], a[i | m]);
      break;
    case 2:
      for (Index i = 0; i < a.size(); ++i)
        if (!(i & m)) {
          const Complex v0 = a[i], v1 = a[i | m];
          a[i] = -kI * v1;
          a[i | m] = kI * v0;
        }
      break;
    case 3:
      for (Index i = 0; i < a.size(); ++i)
        if (i & m) a[i] = -a[i];
      break;
    default: break;
  }
}

inline double prob_one(std::span<const Complex> a, unsigned bit) {
  const Index m = Index{1} << bit;
  double p = 0;
  for (Index i = 0; i < a.size(); ++i)
    if (i & m) p += std::norm(a[i]);
  return p;
}

inline double norm_squared(std::span<const Complex> a) {
  double s = 0;
  for (const auto& v : a) s += std::norm(v);
  return s;
}

}  // namespace dqsim::kernels
