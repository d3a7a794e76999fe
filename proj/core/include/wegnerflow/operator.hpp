#pragma once

// Dense complex operators in a fixed natural basis.
//
// Storage is 0-based: basis state |u_n> with 1-based label n = 1..d
// lives at row/column index n-1. Reports that print basis labels add one.

#include <Eigen/Dense>

#include <complex>
#include <cstddef>

namespace wegnerflow {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr Complex kI{0.0, 1.0};

/// Hermitian d x d matrix. Always exactly Hermitian once constructed.
class HermitianOperator {
 public:
  HermitianOperator() = default;

  /// Symmetrizes (m + m^dagger)/2 without a tolerance check. For matrices the
  /// caller already knows to be Hermitian up to rounding.
  static HermitianOperator symmetrized(const Matrix& m);

  Eigen::Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  Complex operator()(Eigen::Index r, Eigen::Index c) const { return m_(r, c); }

  RealVector diagonal() const { return m_.diagonal().real(); }
  double frobenius_norm() const { return m_.norm(); }

 private:
  explicit HermitianOperator(Matrix m) : m_(std::move(m)) {}
  Matrix m_;
};

/// Anti-Hermitian d x d matrix (generators eta, G_i).
class AntiHermitianOperator {
 public:
  AntiHermitianOperator() = default;

  static AntiHermitianOperator symmetrized(const Matrix& m);
  static AntiHermitianOperator zero(Eigen::Index d);

  Eigen::Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  Complex operator()(Eigen::Index r, Eigen::Index c) const { return m_(r, c); }
  double frobenius_norm() const { return m_.norm(); }

 private:
  explicit AntiHermitianOperator(Matrix m) : m_(std::move(m)) {}
  Matrix m_;
};

/// Accepts `grid` if max |grid - grid^dagger| <= tol and every entry is
/// finite; returns (grid + grid^dagger)/2.
/// Throws NotHermitian, NonFinite, DimMismatch (non-square).
HermitianOperator validate_hermitian(const Matrix& grid, double tol);

/// A*B - B*A. Throws DimMismatch.
Matrix commutator(const Matrix& a, const Matrix& b);

/// Sum over m != n of |H_mn|^2.
double off_diag_norm_sq(const HermitianOperator& h);

/// exp(K) for anti-Hermitian K through the eigendecomposition of the
/// Hermitian matrix iK. Throws NonFinite.
Matrix expm_antihermitian(const AntiHermitianOperator& k);

/// max_{ij} |U^dagger U - I|_{ij}
double unitarity_defect(const Matrix& u);

double max_abs(const Matrix& m);

bool all_finite(const Matrix& m);

/// Sorted (ascending) eigenvalues of a Hermitian operator.
RealVector sorted_eigenvalues(const HermitianOperator& h);

}  // namespace wegnerflow
