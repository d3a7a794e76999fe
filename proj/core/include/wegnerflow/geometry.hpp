#pragma once

// Fubini-Study geometry of a parametrized unitary family and the residuals
// that decide whether a flow of |u_n> is geodesic.

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wegnerflow/band.hpp"
#include "wegnerflow/family.hpp"
#include "wegnerflow/flow.hpp"

namespace wegnerflow {

// ---------------------------------------------------------------- condition

struct BandCondition {
  bool holds = true;
  int offset = 0;  // i_a
  /// First offending (band offset i_a', multiple m) with i_a' = m * i_a.
  std::optional<std::pair<int, int>> offender;
};

/// Bands are labelled 1..A in ascending order of their offsets; `a` is such
/// a label. Holds iff no band offset equals 2*i_a or 3*i_a. Throws
/// NoSuchBand when `a` is not a label, InvalidArgument on non-positive
/// offsets.
BandCondition band_condition(std::span<const int> bands, int a);

/// Same test addressed by the offset i_a itself. Throws NoSuchBand when the
/// offset is not in `bands`.
BandCondition band_condition_offset(std::span<const int> bands, int offset);

// ------------------------------------------------------------------- metric

struct MetricOptions {
  bool cross_check = true;       // also evaluate the overlap route
  double route_rel_tol = 1e-5;   // allowed route disagreement, relative to max |g|
  double unitarity_tol = 1e-10;
  bool christoffel = false;      // attach Gamma^h_ij when the metric is invertible
  double christoffel_step = 1e-3;
};

struct MetricSample {
  RealVector alpha;
  RealMatrix g;                          // generator route
  std::optional<RealMatrix> g_overlap;   // overlap route, when cross-checked
  double route_mismatch = 0.0;           // max |g - g_overlap| / max |g|
  std::optional<std::vector<RealMatrix>> christoffel;  // [h](i, j) = Gamma^h_ij
};

/// G_i = (d_i U) U^dagger by five-point central differences with the family
/// fd_step (the stencil reaches 2 fd_step).
std::vector<Matrix> family_generators(const ParametrizedFamily& family, const RealVector& alpha);

/// g_ij = -1/2 <psi|G_i G_j + G_j G_i|psi> + <psi|G_i|psi><psi|G_j|psi>,
/// optionally cross-checked against the quadratic fit of
/// 1 - |<psi(alpha)|psi(alpha + delta)>|^2. Throws RouteMismatch,
/// NonUnitaryFamily.
MetricSample fs_metric(const ParametrizedFamily& family, const RealVector& alpha,
                       const MetricOptions& options = {});

/// Minimum eigenvalue below which the metric counts as degenerate.
inline constexpr double kDegenerateMetric = 1e-10;

/// Gamma_{hij} = 1/2 (d_i g_hj + d_j g_ih - d_h g_ij), returned as [h](i, j);
/// metric derivatives by five-point central differences with `step`.
std::vector<RealMatrix> christoffel_lowered(const ParametrizedFamily& family,
                                            const RealVector& alpha, double step = 1e-3);

/// Gamma^h_ij = g^{hl} Gamma_{lij}. Throws DegenerateMetric.
std::vector<RealMatrix> christoffel(const ParametrizedFamily& family, const RealVector& alpha,
                                    double step = 1e-3);

// ------------------------------------------------------ curve diagnostics

struct GeodesicOptions {
  double christoffel_step = 1e-3;
  double drop_relative = 1e-10;  // drop samples with ds/dl below this times max ds/dl
};

struct GeodesicResidual {
  std::vector<std::size_t> index;  // trajectory sample indices that were evaluated
  std::vector<double> l;
  std::vector<double> s;           // arc length at those samples
  std::vector<RealVector> residual;
  /// True when the metric was degenerate somewhere along the curve and the
  /// residual is reported in lowered form g_hl a''^l + Gamma_hij a'^i a'^j.
  bool lowered = false;
  std::size_t dropped = 0;

  double max_abs() const;
};

/// d^2 alpha^h/ds^2 + Gamma^h_ij (d alpha^i/ds)(d alpha^j/ds) at interior
/// samples. The unit tangent alpha' = alpha_dot / L is differentiated in l
/// and divided by L = ds/dl. Throws TooFewSamples (< 5), StationaryCurve.
GeodesicResidual geodesic_residual(const CoordinateTrajectory& traj,
                                   const ParametrizedFamily& family,
                                   const GeodesicOptions& options = {});

struct ArcLength {
  double total = 0.0;
  std::vector<double> cumulative;
  std::vector<double> speed;  // L = sqrt(g_ij alpha_dot^i alpha_dot^j)
};

/// Integral of L dl, composite trapezoid.
ArcLength arc_length(const CoordinateTrajectory& traj, const ParametrizedFamily& family);

struct VariationalOptions {
  double h_var = 1e-5;
  /// Nodes are the subsequence of samples in which consecutive members
  /// differ by at least this multiple of h_var (max norm).
  double min_segment_over_h = 100.0;
};

struct VariationalGradient {
  std::vector<std::size_t> index;
  std::vector<double> l;
  std::vector<RealVector> gradient;  // dS/d alpha_node divided by the node weight in l

  double max_abs() const;
};

/// Discrete arc length S = sum over node segments of the metric length of the
/// straight coordinate segment (two-point Gauss rule), endpoints fixed;
/// central-difference gradient with respect to each
/// interior node. Throws TooFewSamples (< 7 samples), StationaryCurve
/// (fewer than 3 nodes).
VariationalGradient variational_gradient(const CoordinateTrajectory& traj,
                                         const ParametrizedFamily& family,
                                         const VariationalOptions& options = {});

struct XiResidual {
  std::vector<double> l;
  std::vector<RealVector> x;
  double scale = 0.0;  // largest magnitude of the cancelling terms

  double max_abs() const;
  double max_relative() const;
};

/// Reduced X_i for |psi> = base state, eta = G_i alpha_dot^i:
/// X_i = 2<eta^2><{d eta/dl, G_i}> - <d eta^2/dl><G_i eta + eta G_i>.
/// Throws TooFewSamples (< 3).
XiResidual xi_residual(const ParametrizedFamily& family, const CoordinateTrajectory& traj);

/// Full X_i without assuming <eta> = 0 (reduces to xi_residual on
/// eigenstates of H_d).
XiResidual xi_general(const ParametrizedFamily& family, const CoordinateTrajectory& traj);

/// Per-sample scalar residual; samples whose finite-difference stencil
/// leaves the family chart are left out.
struct SampleResidual {
  std::vector<double> l;
  std::vector<double> value;

  double max() const;
};

/// ||G_i(alpha(l)) alpha_dot^i - eta_flow(l)||_max per sample, alpha_dot from
/// central differences of the projected coordinates; restricted to the
/// family's compare indices. Coordinate samples are matched to flow samples
/// by l. Throws DimMismatch.
SampleResidual generator_consistency(const ParametrizedFamily& family,
                                     const CoordinateTrajectory& coords,
                                     const FlowTrajectory& flow);

/// ||d/dl G_i - d eta/d alpha^i - [eta, G_i]||_max per interior sample,
/// maximized over i, on the family's compared part. Throws TooFewSamples (< 5).
SampleResidual generator_relation_residual(const ParametrizedFamily& family,
                                   const CoordinateTrajectory& traj, double h = 1e-4);

// ------------------------------------------------------ case analysis

enum class Case { A, B, C, None };
std::string to_string(Case c);

inline constexpr double kCaseZeroRelative = 1e-12;
inline constexpr double kGapZeroRelative = 1e-10;

struct CaseLabel {
  /// None: both coefficients nonzero but the band-(2a) consistency gap is
  /// nonzero, so the band structure is not flow-invariant at this state.
  Case value = Case::None;
  double gap = 0.0;  // |eps_{n+a} + eps_{n-a} - 2 eps_n|, 0 when a neighbour is absent
  Complex c_lower;   // <u_n|H|u_{n-a}>
  Complex c_upper;   // <u_{n+a}|H|u_n>
};

/// `offset` is the off-diagonality i_a. Throws NoSuchBand, IndexOverflow
/// (n outside the basis).
CaseLabel case_classify(const BandDecomposition& bd, Eigen::Index n, int offset);

struct SandwichedResidual {
  std::vector<double> l;
  std::vector<double> residual_lower;  // |dC_n/dl + (eps_n - eps_{n-a})^2 C_n|
  std::vector<double> residual_upper;  // |dC_{n+a}/dl + (eps_{n+a} - eps_n)^2 C_{n+a}|
  double scale = 0.0;                  // max |(delta eps)^2 C| over both sides
  double phase_drift = 0.0;            // max |arg C(l) - arg C(0)| over nonzero C

  double max_residual() const;
  double max_relative() const;
};

/// Throws ConditionViolated when band_condition fails for the bands at l = 0
/// or the generator acts on a band other than `offset`; NoSuchBand;
/// TooFewSamples (< 3).
SandwichedResidual sandwiched_ode_residual(const FlowTrajectory& flow, Eigen::Index n,
                                           int offset);

}  // namespace wegnerflow
