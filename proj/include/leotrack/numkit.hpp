#pragma once

// Dense kernels shared by the estimators and the CRLB code. Everything here is
// templated on the Eigen expression type so real and complex inputs both work.

#include <Eigen/Dense>
#include <cmath>
#include <complex>

#include "leotrack/errors.hpp"

namespace leotrack::num {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
struct HermitianEig {
  using Real = typename Eigen::NumTraits<Scalar>::Real;
  Eigen::Matrix<Real, Eigen::Dynamic, 1> eigenvalues;  // ascending
  Mat<Scalar> eigenvectors;                            // columns, unitary
};

/// Full spectral decomposition of a Hermitian matrix.
///
/// Eigenvalues come back ascending. Each eigenvector is rotated so that its
/// first component with non-negligible magnitude is real and positive, which
/// makes repeated runs bit-reproducible.
template <typename Derived>
HermitianEig<typename Derived::Scalar> hermitian_eig(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  using Real = typename Eigen::NumTraits<Scalar>::Real;
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw ContractViolation("hermitian_eig: matrix must be square and nonempty");
  }
  const Mat<Scalar> m = a;
  const Real scale = m.norm();
  if ((m - m.adjoint()).norm() > Real(1e-12) * std::max(scale, Real(1e-300))) {
    throw ContractViolation("hermitian_eig: matrix is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<Mat<Scalar>> solver(m);
  if (solver.info() != Eigen::Success) {
    throw ContractViolation("hermitian_eig: solver did not converge");
  }
  HermitianEig<Scalar> out{solver.eigenvalues(), solver.eigenvectors()};
  for (Eigen::Index k = 0; k < out.eigenvectors.cols(); ++k) {
    auto col = out.eigenvectors.col(k);
    for (Eigen::Index i = 0; i < col.size(); ++i) {
      if (std::abs(col(i)) > Real(1e-8)) {
        const Scalar phase = col(i) / Scalar(std::abs(col(i)));
        col /= phase;
        break;
      }
    }
  }
  return out;
}

/// Moore-Penrose pseudo-inverse. Singular values below rel_tol * sigma_max are
/// treated as zero; an all-zero input yields an all-zero (transposed) output.
template <typename Scalar>
struct PseudoInverse {
  Mat<Scalar> matrix;
  Eigen::Index rank = 0;
};

/// Pseudo-inverse together with the numerical rank used to build it.
template <typename Derived>
PseudoInverse<typename Derived::Scalar> pseudo_inverse_with_rank(
    const Eigen::MatrixBase<Derived>& a, double rel_tol = 1e-12) {
  using Scalar = typename Derived::Scalar;
  if (a.size() == 0) throw ContractViolation("pseudo_inverse: empty matrix");
  const Mat<Scalar> m = a;
  Eigen::JacobiSVD<Mat<Scalar>> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  PseudoInverse<Scalar> out{Mat<Scalar>::Zero(m.cols(), m.rows()), 0};
  if (s.size() == 0 || s(0) == 0) return out;
  const double cut = rel_tol * s(0);
  while (out.rank < s.size() && s(out.rank) > cut) ++out.rank;
  const auto r = out.rank;
  out.matrix.noalias() = svd.matrixV().leftCols(r) *
                         s.head(r).cwiseInverse().template cast<Scalar>().asDiagonal() *
                         svd.matrixU().leftCols(r).adjoint();
  return out;
}

/// Moore-Penrose pseudo-inverse. Singular values below rel_tol * sigma_max are
/// treated as zero; an all-zero input yields an all-zero (transposed) output.
template <typename Derived>
Mat<typename Derived::Scalar> pseudo_inverse(const Eigen::MatrixBase<Derived>& a,
                                             double rel_tol = 1e-12) {
  return pseudo_inverse_with_rank(a, rel_tol).matrix;
}

/// Numerical rank with the same truncation rule as pseudo_inverse.
template <typename Derived>
Eigen::Index numerical_rank(const Eigen::MatrixBase<Derived>& a, double rel_tol = 1e-12) {
  using Scalar = typename Derived::Scalar;
  const Mat<Scalar> m = a;
  Eigen::JacobiSVD<Mat<Scalar>> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0) return 0;
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > rel_tol * s(0)) ++r;
  return r;
}

/// Eigenvalue of the rank-1 pencil {r11, r12}, realized as the Rayleigh
/// quotient (v^H r11 v) / (v^H r12 v) on the dominant eigenvector v of r11.
template <typename D1, typename D2>
std::complex<double> solve_rank1_pencil(const Eigen::MatrixBase<D1>& r11,
                                        const Eigen::MatrixBase<D2>& r12) {
  if (r11.rows() != r11.cols() || r12.rows() != r12.cols() || r11.rows() != r12.rows() ||
      r11.rows() < 2) {
    throw ContractViolation("solve_rank1_pencil: need two square matrices of equal size >= 2");
  }
  const Mat<std::complex<double>> a = r11.template cast<std::complex<double>>();
  const Mat<std::complex<double>> b = r12.template cast<std::complex<double>>();
  const auto eig = hermitian_eig(a);
  const Eigen::VectorXcd v = eig.eigenvectors.col(eig.eigenvectors.cols() - 1);
  const std::complex<double> num = v.dot(a * v);  // dot() conjugates the left operand
  const std::complex<double> den = v.dot(b * v);
  if (std::abs(den) <= 1e-14 * b.norm()) {
    throw EstimationError("solve_rank1_pencil: degenerate pencil");
  }
  return num / den;
}

}  // namespace leotrack::num
