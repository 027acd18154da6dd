#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <vector>

namespace dqsim {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Mat2 = Eigen::Matrix2cd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr Complex kI{0.0, 1.0};

namespace gates {

inline Mat2 identity() { return Mat2::Identity(); }

inline Mat2 h() {
  Mat2 m;
  const double r = 1.0 / std::sqrt(2.0);
  m << r, r, r, -r;
  return m;
}

inline Mat2 x() {
  Mat2 m;
  m << 0, 1, 1, 0;
  return m;
}

inline Mat2 y() {
  Mat2 m;
  m << 0, -kI, kI, 0;
  return m;
}

inline Mat2 z() {
  Mat2 m;
  m << 1, 0, 0, -1;
  return m;
}

inline Mat2 phase(double theta) {
  Mat2 m;
  m << 1, 0, 0, std::polar(1.0, theta);
  return m;
}

inline Mat2 rx(double theta) {
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  Mat2 m;
  m << c, -kI * s, -kI * s, c;
  return m;
}

inline Mat2 ry(double theta) {
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  Mat2 m;
  m << c, -s, s, c;
  return m;
}

inline Mat2 rz(double theta) {
  Mat2 m;
  m << std::polar(1.0, -theta / 2), 0, 0, std::polar(1.0, theta / 2);
  return m;
}

}  // namespace gates

/// max |(U^dagger U - I)_ij|
inline double unitarity_defect(const Matrix& u) {
  if (u.rows() != u.cols()) return INFINITY;
  const Matrix d = u.adjoint() * u - Matrix::Identity(u.rows(), u.cols());
  return d.cwiseAbs().maxCoeff();
}

inline bool is_unitary(const Matrix& u, double tol = 1e-10) {
  return u.rows() == u.cols() && u.rows() > 0 && unitarity_defect(u) <= tol;
}

/// If u == e^{i phi} v, returns phi.
inline std::optional<double> phase_relative_to(const Matrix& u, const Matrix& v, double tol = 1e-9) {
  if (u.rows() != v.rows() || u.cols() != v.cols()) return std::nullopt;
  Eigen::Index r = 0, c = 0;
  v.cwiseAbs().maxCoeff(&r, &c);
  if (std::abs(v(r, c)) < 1e-12) return std::nullopt;
  const Complex ratio = u(r, c) / v(r, c);
  if (std::abs(std::abs(ratio) - 1.0) > tol) return std::nullopt;
  if ((u - ratio * v).cwiseAbs().maxCoeff() > tol) return std::nullopt;
  return std::arg(ratio);
}

/// U = e^{i alpha} RZ(beta) RY(gamma) RZ(delta)
struct ZyzAngles {
  double alpha = 0, beta = 0, gamma = 0, delta = 0;
};

inline ZyzAngles zyz_decompose(const Mat2& u) {
  const Complex det = u.determinant();
  ZyzAngles out;
  out.alpha = std::arg(det) / 2;
  const Mat2 v = u * std::polar(1.0, -out.alpha);
  const Complex a = v(0, 0), b = v(1, 0);
  out.gamma = 2 * std::atan2(std::abs(b), std::abs(a));
  const double arg_a = std::abs(a) > 1e-14 ? std::arg(a) : 0.0;
  const double arg_b = std::abs(b) > 1e-14 ? std::arg(b) : 0.0;
  out.beta = arg_b - arg_a;
  out.delta = -arg_a - arg_b;
  return out;
}

/// Principal square root of a 2x2 unitary.
inline Mat2 unitary_sqrt(const Mat2& u) {
  Eigen::ComplexEigenSolver<Mat2> es(u);
  const auto& vals = es.eigenvalues();
  if (std::abs(vals(0) - vals(1)) < 1e-12) {
    return Mat2::Identity() * std::sqrt(vals(0));
  }
  Mat2 w = es.eigenvectors();
  w.col(0).normalize();
  w.col(1).normalize();
  Mat2 d = Mat2::Zero();
  d(0, 0) = std::sqrt(vals(0));
  d(1, 1) = std::sqrt(vals(1));
  return w * d * w.adjoint();
}

/// Kronecker product a (x) b: a acts on the high index bits.
inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Splits a 2^k unitary into single-qubit factors, factor i acting on index bit i.
/// Returns nullopt when the matrix is entangling.
inline std::optional<std::vector<Mat2>> factor_tensor_product(const Matrix& u, double tol = 1e-9) {
  const Eigen::Index dim = u.rows();
  if (dim == 2) return std::vector<Mat2>{Mat2(u)};
  const Eigen::Index half = dim / 2;
  // u = A (x) B with A on the top bit.
  Eigen::Index best_r = 0, best_c = 0;
  double best = -1;
  for (Eigen::Index r = 0; r < 2; ++r)
    for (Eigen::Index c = 0; c < 2; ++c) {
      const double n = u.block(r * half, c * half, half, half).norm();
      if (n > best) best = n, best_r = r, best_c = c;
    }
  const double scale = best / std::sqrt(static_cast<double>(half));
  if (scale < 1e-12) return std::nullopt;
  Matrix b = u.block(best_r * half, best_c * half, half, half) / scale;
  if (!is_unitary(b, 1e-8)) return std::nullopt;
  Mat2 a;
  for (Eigen::Index r = 0; r < 2; ++r)
    for (Eigen::Index c = 0; c < 2; ++c)
      a(r, c) = (b.adjoint() * u.block(r * half, c * half, half, half)).trace() /
                static_cast<double>(half);
  if ((kron(a, b) - u).cwiseAbs().maxCoeff() > tol) return std::nullopt;
  auto rest = factor_tensor_product(b, tol);
  if (!rest) return std::nullopt;
  rest->push_back(a);
  return rest;
}

}  // namespace dqsim
