#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "dqsim/statevector.hpp"

namespace dqsim {

namespace dm {

using kernels::Index;

/// rho -> U rho U^dagger for a unitary instruction on array bits `bits` of an n-qubit matrix.
inline void apply(std::span<Complex> rho, unsigned n, std::span<const unsigned> bits, const Instruction& in) {
  std::vector<unsigned> rows(bits.begin(), bits.end());
  for (auto& b : rows) b += n;
  apply_unitary(rho, rows, in, false);
  apply_unitary(rho, bits, in, true);
}

inline void apply_1q(std::span<Complex> rho, unsigned n, unsigned q, const Mat2& u) {
  kernels::apply_1q(rho, q + n, u);
  kernels::apply_1q(rho, q, u.conjugate());
}

/// rho -> (1-eps) rho + eps Tr_q(rho) (x) I/2
inline void depolarize_1q(std::span<Complex> rho, unsigned n, unsigned q, double eps) {
  if (eps == 0) return;
  const Index cm = Index{1} << q, rm = Index{1} << (q + n);
  const double keep = 1 - eps;
  for (Index base = 0; base < rho.size(); ++base) {
    if (base & (cm | rm)) continue;
    const Index i01 = base | cm, i10 = base | rm, i11 = base | cm | rm;
    const Complex avg = 0.5 * (rho[base] + rho[i11]);
    rho[base] = keep * rho[base] + eps * avg;
    rho[i11] = keep * rho[i11] + eps * avg;
    rho[i01] *= keep;
    rho[i10] *= keep;
  }
}

/// rho -> (1-eps) rho + eps Tr_{q1,q2}(rho) (x) I/4
inline void depolarize_2q(std::span<Complex> rho, unsigned n, unsigned q1, unsigned q2, double eps) {
  if (eps == 0) return;
  const Index c1 = Index{1} << q1, c2 = Index{1} << q2;
  const Index r1 = c1 << n, r2 = c2 << n;
  const Index all = c1 | c2 | r1 | r2;
  const double keep = 1 - eps;
  auto sub_col = [&](int s) { return ((s & 1) ? c1 : 0) | ((s & 2) ? c2 : 0); };
  auto sub_row = [&](int s) { return ((s & 1) ? r1 : 0) | ((s & 2) ? r2 : 0); };
  for (Index base = 0; base < rho.size(); ++base) {
    if (base & all) continue;
    Complex avg = 0;
    for (int s = 0; s < 4; ++s) avg += rho[base | sub_row(s) | sub_col(s)];
    avg *= 0.25;
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) {
        Complex& v = rho[base | sub_row(r) | sub_col(c)];
        v = keep * v + (r == c ? eps * avg : Complex{0});
      }
  }
}

/// Zeroes every entry outside the qubit-q = bit block (unnormalized projection).
inline void project(std::span<Complex> rho, unsigned n, unsigned q, int bit) {
  const Index cm = Index{1} << q, rm = Index{1} << (q + n);
  const bool want = bit == 1;
  for (Index i = 0; i < rho.size(); ++i)
    if (((i & cm) != 0) != want || ((i & rm) != 0) != want) rho[i] = 0;
}

inline double trace(std::span<const Complex> rho, unsigned n) {
  const Index dim = Index{1} << n;
  double t = 0;
  for (Index i = 0; i < dim; ++i) t += rho[i * dim + i].real();
  return t;
}

inline double prob_one(std::span<const Complex> rho, unsigned n, unsigned q) {
  const Index dim = Index{1} << n;
  double p = 0;
  for (Index i = 0; i < dim; ++i)
    if (i & (Index{1} << q)) p += rho[i * dim + i].real();
  return p;
}

/// Partial trace over array qubit q; remaining qubits keep their relative order.
inline std::vector<Complex> trace_out(std::span<const Complex> rho, unsigned n, unsigned q) {
  const Index dim_out = Index{1} << (n - 1);
  std::vector<Complex> out(dim_out * dim_out, Complex{0});
  const Index dim = Index{1} << n;
  for (Index r = 0; r < dim_out; ++r)
    for (Index c = 0; c < dim_out; ++c) {
      const Index r0 = kernels::insert_zero(r, q), c0 = kernels::insert_zero(c, q);
      const Index m = Index{1} << q;
      out[r * dim_out + c] = rho[r0 * dim + c0] + rho[(r0 | m) * dim + (c0 | m)];
    }
  return out;
}

/// rho (x) diag(1-p1, p1) with the new qubit as the top array bit.
inline std::vector<Complex> add_top_qubit(std::span<const Complex> rho, unsigned n, double p1) {
  const Index dim = Index{1} << n;
  const Index dim2 = dim * 2;
  std::vector<Complex> out(dim2 * dim2, Complex{0});
  for (Index r = 0; r < dim; ++r)
    for (Index c = 0; c < dim; ++c) {
      const Complex v = rho[r * dim + c];
      out[r * dim2 + c] = (1 - p1) * v;
      out[(r + dim) * dim2 + (c + dim)] = p1 * v;
    }
  return out;
}

inline std::vector<double> diagonal(std::span<const Complex> rho, unsigned n) {
  const Index dim = Index{1} << n;
  std::vector<double> d(dim);
  for (Index i = 0; i < dim; ++i) d[i] = rho[i * dim + i].real();
  return d;
}

}  // namespace dm

/// Mixed state of n qubits, row-major 2^n x 2^n.
class DensityMatrix {
 public:
  explicit DensityMatrix(std::size_t num_qubits) : n_(num_qubits), rho_(dim() * dim(), Complex{0}) { rho_[0] = 1; }
  DensityMatrix(std::size_t num_qubits, std::vector<Complex> rho) : n_(num_qubits), rho_(std::move(rho)) {
    if (rho_.size() != dim() * dim()) throw ValidationError("density matrix size is not 4^n");
  }
  static DensityMatrix from_pure(const StateVector& psi) {
    DensityMatrix out(psi.num_qubits());
    const auto a = psi.amplitudes();
    const std::size_t d = a.size();
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t c = 0; c < d; ++c) out.rho_[r * d + c] = a[r] * std::conj(a[c]);
    return out;
  }
  static DensityMatrix from_matrix(const Matrix& m) {
    std::size_t n = 0;
    while ((Eigen::Index{1} << n) < m.rows()) ++n;
    DensityMatrix out(n);
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) out.rho_[r * m.cols() + c] = m(r, c);
    return out;
  }

  std::size_t num_qubits() const { return n_; }
  std::size_t dim() const { return std::size_t{1} << n_; }
  Complex operator()(std::size_t r, std::size_t c) const { return rho_[r * dim() + c]; }
  std::span<Complex> data() { return rho_; }
  std::span<const Complex> data() const { return rho_; }

  Matrix to_matrix() const {
    Matrix m(dim(), dim());
    for (std::size_t r = 0; r < dim(); ++r)
      for (std::size_t c = 0; c < dim(); ++c) m(r, c) = rho_[r * dim() + c];
    return m;
  }

  void apply(const Instruction& in) {
    std::vector<unsigned> bits(in.qubits.begin(), in.qubits.end());
    dm::apply(rho_, static_cast<unsigned>(n_), bits, in);
  }
  void depolarize_1q(std::size_t q, double eps) { dm::depolarize_1q(rho_, static_cast<unsigned>(n_), q, eps); }
  void depolarize_2q(std::size_t a, std::size_t b, double eps) {
    dm::depolarize_2q(rho_, static_cast<unsigned>(n_), static_cast<unsigned>(a), static_cast<unsigned>(b), eps);
  }

  double trace() const { return dm::trace(rho_, static_cast<unsigned>(n_)); }
  std::vector<double> probabilities() const { return dm::diagonal(rho_, static_cast<unsigned>(n_)); }

  double hermiticity_defect() const {
    double worst = 0;
    for (std::size_t r = 0; r < dim(); ++r)
      for (std::size_t c = 0; c < dim(); ++c)
        worst = std::max(worst, std::abs(rho_[r * dim() + c] - std::conj(rho_[c * dim() + r])));
    return worst;
  }

  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Matrix> es(to_matrix());
    return es.eigenvalues().minCoeff();
  }

  /// <psi| rho |psi>
  double fidelity(const StateVector& psi) const {
    const auto a = psi.amplitudes();
    Complex acc = 0;
    for (std::size_t r = 0; r < dim(); ++r)
      for (std::size_t c = 0; c < dim(); ++c) acc += std::conj(a[r]) * rho_[r * dim() + c] * a[c];
    return acc.real();
  }

  /// Reduced state of `keep` (ascending order kept as given: keep[i] becomes qubit i).
  DensityMatrix reduced(const std::vector<std::size_t>& keep) const {
    std::vector<Complex> cur = rho_;
    std::vector<std::size_t> order;  // logical qubit held at each array bit
    for (std::size_t q = 0; q < n_; ++q) order.push_back(q);
    unsigned n = static_cast<unsigned>(n_);
    for (std::size_t bit = n_; bit-- > 0;) {
      if (std::find(keep.begin(), keep.end(), order[bit]) != keep.end()) continue;
      cur = dm::trace_out(cur, n, static_cast<unsigned>(bit));
      order.erase(order.begin() + static_cast<std::ptrdiff_t>(bit));
      --n;
    }
    DensityMatrix out(n, std::move(cur));
    // permute so that keep[i] sits at bit i
    std::vector<unsigned> where(keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i)
      where[i] = static_cast<unsigned>(std::find(order.begin(), order.end(), keep[i]) - order.begin());
    return out.permuted(where);
  }

  /// New matrix whose bit i holds this matrix's bit src[i].
  DensityMatrix permuted(const std::vector<unsigned>& src) const {
    const std::size_t d = dim();
    std::vector<Complex> out(d * d);
    auto map = [&](std::size_t i) {
      std::size_t j = 0;
      for (std::size_t b = 0; b < src.size(); ++b)
        if (i & (std::size_t{1} << b)) j |= std::size_t{1} << src[b];
      return j;
    };
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t c = 0; c < d; ++c) out[r * d + c] = rho_[map(r) * d + map(c)];
    return DensityMatrix(n_, std::move(out));
  }

 private:
  std::size_t n_;
  std::vector<Complex> rho_;
};

}  // namespace dqsim
