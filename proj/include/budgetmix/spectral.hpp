#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace budgetmix {

/// Absolute asymmetry tolerated before a matrix is rejected as non-symmetric.
inline constexpr double kSymmetryTolerance = 1e-12;

template <typename Derived>
bool is_symmetric(const Eigen::MatrixBase<Derived>& a,
                  typename Derived::RealScalar tol = kSymmetryTolerance) {
  if (a.rows() != a.cols()) return false;
  if (a.size() == 0) return true;
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= tol;
}

/// Returns (A + Aᵀ)/2 after checking that A is symmetric within tolerance.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> symmetrized(
    const Eigen::MatrixBase<Derived>& a, typename Derived::RealScalar tol = kSymmetryTolerance) {
  if (a.rows() != a.cols()) throw std::invalid_argument("matrix is not square");
  if (!is_symmetric(a, tol)) throw std::invalid_argument("matrix is not symmetric");
  return (a + a.transpose()) / typename Derived::Scalar(2);
}

/// All eigenvalues of a symmetric matrix, ascending.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> sym_eigenvalues(
    const Eigen::MatrixBase<Derived>& a, typename Derived::RealScalar tol = kSymmetryTolerance) {
  using Mat = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (a.size() == 0) return {};
  Eigen::SelfAdjointEigenSolver<Mat> solver(symmetrized(a, tol), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigensolver did not converge");
  return solver.eigenvalues();
}

/// Largest |λ| of a symmetric matrix, i.e. its spectral norm.
template <typename Derived>
typename Derived::RealScalar spectral_norm(const Eigen::MatrixBase<Derived>& a,
                                           typename Derived::RealScalar tol = kSymmetryTolerance) {
  if (a.size() == 0) return 0;
  auto ev = sym_eigenvalues(a, tol);
  return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

/// Spectral norm together with a unit eigenvector achieving it and the sign of
/// that eigenvalue. Used for subgradients of ‖·‖ over symmetric matrices.
template <typename Scalar>
struct NormWitness {
  Scalar norm = 0;
  Scalar sign = 1;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> vector;
};

template <typename Derived>
NormWitness<typename Derived::Scalar> spectral_norm_witness(
    const Eigen::MatrixBase<Derived>& a, typename Derived::RealScalar tol = kSymmetryTolerance) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Eigen::SelfAdjointEigenSolver<Mat> solver(symmetrized(a, tol));
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigensolver did not converge");
  const auto& ev = solver.eigenvalues();
  const Eigen::Index last = ev.size() - 1;
  NormWitness<Scalar> w;
  if (std::abs(ev(last)) >= std::abs(ev(0))) {
    w.norm = std::abs(ev(last));
    w.sign = Scalar(1);
    w.vector = solver.eigenvectors().col(last);
  } else {
    w.norm = std::abs(ev(0));
    w.sign = Scalar(-1);
    w.vector = solver.eigenvectors().col(0);
  }
  return w;
}

/// J = (1/m)·11ᵀ, the exact-averaging matrix.
inline Eigen::MatrixXd averaging_matrix(Eigen::Index m) {
  return Eigen::MatrixXd::Constant(m, m, 1.0 / static_cast<double>(m));
}

}  // namespace budgetmix
