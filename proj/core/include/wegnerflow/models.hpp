#pragma once

// The three solvable examples: generalized harmonic oscillator, spin in a
// field and Jaynes-Cummings. Hamiltonian builders, their unitary families,
// the reduced coefficient ODEs and the projection of U(l) onto coordinates.

#include <nlohmann/json.hpp>

#include <map>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "wegnerflow/family.hpp"
#include "wegnerflow/flow.hpp"
#include "wegnerflow/operator.hpp"

namespace wegnerflow {

// ---------------------------------------------------------------- specs

/// H = omega a^dagger a + lambda a^dagger^2 + lambda^* a^2 + mu a^dagger + mu^* a + nu
/// on Fock levels 0..n_max.
struct GhoSpec {
  double omega = 1.0;
  Complex lambda = 0.0;
  Complex mu = 0.0;
  double nu = 0.0;
  int n_max = 40;

  /// Throws SpecViolation (omega <= 2|lambda|, n_max < 4, non-finite fields).
  void validate() const;
};

/// H = S . B for spin s, basis m = s, s-1, ..., -s.
struct SpinSpec {
  double s = 0.5;
  Eigen::Vector3d b_field{0.0, 0.0, 1.0};

  /// Throws SpecViolation (2s not a positive integer, |B| = 0).
  void validate() const;
  Eigen::Index dim() const;
};

/// H = omega0/2 sigma_3 + omega a^dagger a + kappa (sigma_+ a + sigma_- a^dagger)
/// with photon levels 0..n_max. Basis index 2n + atom, atom g = 0, e = 1.
struct JcSpec {
  double omega0 = 1.0;
  double omega = 1.0;
  double kappa = 0.1;
  int n_max = 4;

  /// Throws SpecViolation (n_max < 2, non-finite fields).
  void validate() const;
  Eigen::Index dim() const { return 2 * (static_cast<Eigen::Index>(n_max) + 1); }
};

using ModelSpec = std::variant<GhoSpec, SpinSpec, JcSpec>;

std::string model_name(const ModelSpec& spec);

/// {"model": "gho"|"spin"|"jc", ...fields}. Complex fields accept a number or
/// [re, im]. Throws SpecViolation on unknown models or malformed fields.
ModelSpec parse_model(const nlohmann::json& doc);
nlohmann::json to_json(const ModelSpec& spec);

// ------------------------------------------------------------ operators

/// Truncated annihilation operator on levels 0..n_max.
Matrix annihilation(int n_max);

/// Spin matrices in the basis m = s .. -s.
struct SpinMatrices {
  Matrix sz, splus, sminus;
};
/// Throws SpecViolation when 2s is not a positive integer.
SpinMatrices spin_matrices(double s);

// ------------------------------------------------------------- builders

/// Solves omega alpha + 2 lambda alpha^* - mu = 0. Throws SingularShift
/// when omega^2 = 4|lambda|^2 (relative tolerance 1e-14).
Complex displacement_shift(double omega, Complex lambda, Complex mu);

/// With both mu and lambda nonzero the linear terms are removed by the
/// displacement a -> a - alpha; the result has mu = 0 and a shifted nu.
GhoSpec reduce_gho(const GhoSpec& spec);

/// Applies reduce_gho first when both mu and lambda are nonzero.
HermitianOperator build_gho(const GhoSpec& spec);

/// Verifies [S_z, S_+-] = +-S_+- and [S_+, S_-] = 2 S_z (SpecViolation otherwise).
HermitianOperator build_spin(const SpinSpec& spec);

HermitianOperator build_jc(const JcSpec& spec);

struct JcSector {
  int n = 0;                  // block on {|e,n>, |g,n+1>}
  Eigen::Index e_index = 0;   // basis index of |e,n>
  Eigen::Index g_index = 0;   // basis index of |g,n+1>
  Eigen::Matrix2d block;
};
struct JcSectors {
  double ground = 0.0;  // <g,0|H|g,0>, uncoupled
  std::vector<JcSector> sectors;
};
JcSectors sector_blocks(const JcSpec& spec);

HermitianOperator build_model(const ModelSpec& spec);

// ------------------------------------------------------------- families

/// D(z) = exp(z a^dagger - z^* a), z = (x + i p)/sqrt(2), coordinates (x, p).
/// Compared through the flowed state on interior rows.
ParametrizedFamily displacement_family(int n_max, int base_n = 0);

/// S(xi) = exp((xi a^dagger^2 - xi^* a^2)/2), xi = r e^{-2 i phi}, coordinates
/// (r, phi). Compared through the flowed state on interior rows: the
/// truncated flow is not the truncation of the full operator flow beyond the
/// lowest levels. Throws TruncationTooSmall unless n_max >= base_n + 20.
ParametrizedFamily squeeze_family(int base_n, int n_max);

/// exp(sigma S_+ - sigma^* S_-), sigma = (theta/2) e^{-i varphi}, coordinates
/// (theta, varphi), base |m>.
ParametrizedFamily spin_family(double s, double m);

/// Finite-difference stencils of the JC family stay below this |alpha|: at
/// |alpha| = 1 the chart degenerates (1 - |alpha| is quadratic in the
/// rotation angle) and difference quotients lose accuracy nearby.
inline constexpr double kJcStencilLimit = 0.98;

/// Sector-n block [[alpha, gamma], [delta, beta]] on {|e,n>, |g,n+1>} with
/// coordinates (|alpha|, theta_alpha, theta_gamma), theta_beta = 0 and the
/// phase branch m = 0; identity elsewhere. Base |e,n>.
ParametrizedFamily jc_family(int n_max, int n);

/// Basis indices kept for comparisons on a truncated Fock space: the top
/// 10% of rows (at least one) are dropped.
std::vector<Eigen::Index> interior_indices(Eigen::Index dim);

// ------------------------------------------------- reduced coefficients

enum class ReducedKind { Displacement, Squeeze, Spin, JcSector };
std::string to_string(ReducedKind k);

/// Named coefficient columns sampled on an l grid (real coefficients are
/// stored with zero imaginary part).
struct ReducedCoefficients {
  ReducedKind kind = ReducedKind::Squeeze;
  int sector = 0;
  std::vector<double> l;
  std::map<std::string, std::vector<Complex>> columns;

  const std::vector<Complex>& at(const std::string& name) const;
};

/// Integrates the reduced ODEs from l = 0 and samples them on `l_grid`
/// (non-negative, increasing):
///   Displacement: d mu = -omega^2 mu, d nu = -2 omega |mu|^2
///   Squeeze: d lambda = -4 omega^2 lambda, d omega = -16 omega |lambda|^2,
///            d nu = -8 omega |lambda|^2
///   Spin:    d beta = -beta_z^2 beta, d beta_z = 4 beta_z |beta|^2
///   JC sector: dC = -(A - B)^2 C, dA = 2 C^2 (A - B), dB = -dA
/// The GHO spec is reduced first; JC uses `sector`. Throws IntegratorFailure.
ReducedCoefficients closed_form_flow(const ModelSpec& spec, const std::vector<double>& l_grid,
                                     int sector = 0);

/// Reads the same coefficients off full-matrix flow samples (GHO from the
/// lowest rows, spin from the top 2x2 corner, JC from the sector block).
ReducedCoefficients extract_coefficients(const FlowTrajectory& flow, const ModelSpec& spec,
                                         int sector = 0);

// ------------------------------------------------------------ projection

/// Largest reconstruction residual accepted by coordinate_projection.
inline constexpr double kProjectionTolerance = 1e-6;

/// Maps U(l) of a tracked flow back to coordinates. Angles undefined at a
/// chart pole carry the previous value forward (leading ones are backfilled).
/// alpha_dot solves G_i alpha_dot^i = eta_flow in the least-squares sense on
/// the compared indices; where the generator stencil leaves the chart it
/// falls back to finite differences and tangent_residual is NaN.
/// Throws InvalidArgument (U not tracked), NotInFamily (residual above
/// `tolerance`).
CoordinateTrajectory coordinate_projection(const FlowTrajectory& flow,
                                           const ParametrizedFamily& family,
                                           double tolerance = kProjectionTolerance);

/// Largest |<r|U^dagger|base>| over rows r outside the compared indices:
/// how much of the flowed state reaches the truncation edge.
double edge_amplitude(const Matrix& u, const ParametrizedFamily& family);

}  // namespace wegnerflow
