#pragma once

// Diagonal part plus off-diagonal bands of a Hermitian matrix.
//
// Band with off-diagonality i stores the lower-triangle coefficients
// C[k] = <u_{k+i}| H |u_k>,  k = 0 .. d-i-1,
// so C[k] is the coefficient of |u_{k+i}><u_k|; the upper triangle holds the
// conjugates. Coefficients whose row index would fall outside 0..d-1 are
// absent and read back as zero.

#include <map>
#include <vector>

#include "wegnerflow/operator.hpp"

namespace wegnerflow {

/// Bands whose largest |C| does not exceed this multiple of ||H||_F are pruned.
inline constexpr double kBandPruneRelative = 1e-14;

struct BandDecomposition {
  RealVector eps;
  std::map<int, Vector> bands;  // off-diagonality -> coefficients, ascending keys

  Eigen::Index dim() const { return eps.size(); }

  /// Off-diagonality indices present, ascending.
  std::vector<int> band_indices() const;

  bool has_band(int offset) const { return bands.count(offset) != 0; }

  /// <u_row| H |u_{row-offset}>, or 0 when the band is absent or the index
  /// leaves the basis.
  Complex lower(int offset, Eigen::Index row) const;

  /// 2 * sum |C|^2 for one band (both triangles); 0 if absent.
  double band_norm_sq(int offset) const;

  double frobenius_norm() const;
};

BandDecomposition band_split(const HermitianOperator& h);

/// Throws IndexOverflow when an offset is not in 1..d-1 or a coefficient
/// vector does not have length d - offset.
HermitianOperator band_assemble(const BandDecomposition& bd);

/// Norm^2 (both triangles) of the diagonal at `offset` read straight from a
/// matrix, without pruning.
double band_norm_sq(const HermitianOperator& h, int offset);

}  // namespace wegnerflow
