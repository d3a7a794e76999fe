#include "wegnerflow/operator.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

#include "wegnerflow/error.hpp"

namespace wegnerflow {

HermitianOperator HermitianOperator::symmetrized(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::DimMismatch, "Hermitian operator must be square");
  }
  return HermitianOperator(0.5 * (m + m.adjoint()));
}

AntiHermitianOperator AntiHermitianOperator::symmetrized(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::DimMismatch, "anti-Hermitian operator must be square");
  }
  return AntiHermitianOperator(0.5 * (m - m.adjoint()));
}

AntiHermitianOperator AntiHermitianOperator::zero(Eigen::Index d) {
  return AntiHermitianOperator(Matrix::Zero(d, d));
}

bool all_finite(const Matrix& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      if (!std::isfinite(m(r, c).real()) || !std::isfinite(m(r, c).imag())) return false;
    }
  }
  return true;
}

double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

HermitianOperator validate_hermitian(const Matrix& grid, double tol) {
  if (grid.rows() != grid.cols() || grid.rows() == 0) {
    throw Error(ErrorCode::DimMismatch, "matrix grid must be square and non-empty");
  }
  if (tol < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "Hermiticity tolerance must be >= 0");
  }
  if (!all_finite(grid)) {
    throw Error(ErrorCode::NonFinite, "matrix has NaN or Inf entries");
  }
  const double deviation = max_abs(grid - grid.adjoint());
  if (deviation > tol) {
    std::ostringstream os;
    os << "entries[m][n] = conj(entries[n][m]) violated: max deviation " << deviation
       << " > tol " << tol;
    throw Error(ErrorCode::NotHermitian, os.str());
  }
  return HermitianOperator::symmetrized(grid);
}

Matrix commutator(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols()) {
    throw Error(ErrorCode::DimMismatch, "commutator needs square matrices of equal size");
  }
  return a * b - b * a;
}

double off_diag_norm_sq(const HermitianOperator& h) {
  const Matrix& m = h.matrix();
  return m.squaredNorm() - m.diagonal().squaredNorm();
}

Matrix expm_antihermitian(const AntiHermitianOperator& k) {
  if (!all_finite(k.matrix())) {
    throw Error(ErrorCode::NonFinite, "generator has NaN or Inf entries");
  }
  // iK = V diag(w) V^dagger  =>  exp(K) = V diag(exp(-i w)) V^dagger
  const Matrix ik = kI * k.matrix();
  Eigen::SelfAdjointEigenSolver<Matrix> es(ik);
  const Vector phases = (-kI * es.eigenvalues().cast<Complex>()).array().exp().matrix();
  Matrix u = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
  if (!all_finite(u)) {
    throw Error(ErrorCode::NonFinite, "matrix exponential produced NaN or Inf");
  }
  return u;
}

double unitarity_defect(const Matrix& u) {
  return max_abs(u.adjoint() * u - Matrix::Identity(u.cols(), u.cols()));
}

RealVector sorted_eigenvalues(const HermitianOperator& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h.matrix(), Eigen::EigenvaluesOnly);
  return es.eigenvalues();  // ascending
}

}  // namespace wegnerflow
