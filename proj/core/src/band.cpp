#include "wegnerflow/band.hpp"

#include <cmath>
#include <string>

#include "wegnerflow/error.hpp"

namespace wegnerflow {

std::vector<int> BandDecomposition::band_indices() const {
  std::vector<int> out;
  out.reserve(bands.size());
  for (const auto& [offset, coeffs] : bands) out.push_back(offset);
  return out;
}

Complex BandDecomposition::lower(int offset, Eigen::Index row) const {
  const auto it = bands.find(offset);
  if (it == bands.end()) return {0.0, 0.0};
  const Eigen::Index k = row - offset;
  if (k < 0 || k >= it->second.size()) return {0.0, 0.0};
  return it->second[k];
}

double BandDecomposition::band_norm_sq(int offset) const {
  const auto it = bands.find(offset);
  return it == bands.end() ? 0.0 : 2.0 * it->second.squaredNorm();
}

double BandDecomposition::frobenius_norm() const {
  double sum = eps.squaredNorm();
  for (const auto& [offset, coeffs] : bands) sum += 2.0 * coeffs.squaredNorm();
  return std::sqrt(sum);
}

BandDecomposition band_split(const HermitianOperator& h) {
  const Matrix& m = h.matrix();
  const Eigen::Index d = m.rows();
  BandDecomposition bd;
  bd.eps = m.diagonal().real();
  const double threshold = kBandPruneRelative * m.norm();
  for (int offset = 1; offset < d; ++offset) {
    Vector coeffs = m.diagonal(-offset);
    if (coeffs.size() > 0 && coeffs.cwiseAbs().maxCoeff() > threshold) {
      bd.bands.emplace(offset, std::move(coeffs));
    }
  }
  return bd;
}

HermitianOperator band_assemble(const BandDecomposition& bd) {
  const Eigen::Index d = bd.eps.size();
  Matrix m = Matrix::Zero(d, d);
  m.diagonal() = bd.eps.cast<Complex>();
  for (const auto& [offset, coeffs] : bd.bands) {
    if (offset <= 0 || offset >= d) {
      throw Error(ErrorCode::IndexOverflow,
                  "band offset " + std::to_string(offset) + " outside 1.." + std::to_string(d - 1));
    }
    if (coeffs.size() != d - offset) {
      throw Error(ErrorCode::IndexOverflow, "band " + std::to_string(offset) +
                                                " needs " + std::to_string(d - offset) +
                                                " coefficients");
    }
    m.diagonal(-offset) = coeffs;
    m.diagonal(offset) = coeffs.conjugate();
  }
  return HermitianOperator::symmetrized(m);
}

double band_norm_sq(const HermitianOperator& h, int offset) {
  if (offset <= 0 || offset >= h.dim()) return 0.0;
  return 2.0 * h.matrix().diagonal(-offset).squaredNorm();
}

}  // namespace wegnerflow
