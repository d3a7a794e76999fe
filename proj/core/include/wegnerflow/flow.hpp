#pragma once

// Flow equation dH/dl = [eta(l), H(l)] with Wegner's generator
// eta = [H_d, H_od] or the single-band generator eta^(a) = [H_d, H_od^(a)],
// plus the accumulated unitary dU/dl = eta U, U(0) = I.

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "wegnerflow/band.hpp"
#include "wegnerflow/integrator.hpp"
#include "wegnerflow/operator.hpp"

namespace wegnerflow {

struct WegnerGenerator {};
struct BandGenerator {
  int offset = 1;  // off-diagonality i_a of the targeted band
};
using GeneratorChoice = std::variant<WegnerGenerator, BandGenerator>;

std::string describe(const GeneratorChoice& choice);

struct SampleEvery {
  int steps = 1;
};
struct SampleSpacing {
  double dl = 1e-2;
};
using Sampling = std::variant<SampleEvery, SampleSpacing>;

struct FlowConfig {
  ode::Integrator integrator = ode::AdaptiveRk45{};
  double l_max = 100.0;
  double stop_offdiag = 1e-18;  // targeted norm^2 at which the flow counts as converged
  Sampling sampling = SampleEvery{1};
  bool track_unitary = false;
  double cluster_tol_rel = 1e-8;  // relative to ||H||_F, for the block report
  double unitarity_limit = 1e-6;
};

/// ||eta||_F below this multiple of ||H||_F with the target still above
/// stop_offdiag means the flow sits on a fixed point.
inline constexpr double kStallRelative = 1e-14;

enum class StopReason { Converged, MaxL, Stalled, IntegratorFailure };
std::string to_string(StopReason r);

struct FlowSample {
  double l = 0.0;
  HermitianOperator h;
  std::optional<Matrix> u;
  double offdiag_sq = 0.0;
  double eps_sq_sum = 0.0;
  double trace_h = 0.0;
  double trace_h2 = 0.0;
  double target_sq = 0.0;  // norm^2 of what the generator targets
  double eta_norm = 0.0;
  std::map<int, double> band_norms;  // band offset -> norm^2, bands present at l = 0
};

/// Residual off-diagonal weight after grouping near-degenerate diagonal
/// entries into clusters (block-diagonal limit of the flow).
struct BlockReport {
  std::vector<std::vector<int>> clusters;  // basis indices, ascending eps
  double intra_cluster_sq = 0.0;
  double inter_cluster_sq = 0.0;
};

struct FlowTrajectory {
  GeneratorChoice choice;
  std::vector<FlowSample> samples;
  StopReason stop_reason = StopReason::MaxL;
  std::vector<int> initial_bands;
  BlockReport blocks;
  std::vector<std::string> warnings;
  std::size_t steps = 0;

  const FlowSample& front() const { return samples.front(); }
  const FlowSample& back() const { return samples.back(); }
};

AntiHermitianOperator wegner_generator(const HermitianOperator& h);

/// Throws NoSuchBand if `offset` is not a (pruned) band of h.
AntiHermitianOperator band_generator(const HermitianOperator& h, int offset);

/// Generator for a choice without the band-presence check (a decayed band
/// yields zero).
AntiHermitianOperator generator(const HermitianOperator& h, const GeneratorChoice& choice);

/// [eta, H], symmetrized. Throws DimMismatch.
HermitianOperator flow_rhs(const HermitianOperator& h, const AntiHermitianOperator& eta);

/// Norm^2 the choice drives to zero: all off-diagonal weight for Wegner,
/// band weight for BandGenerator.
double target_norm_sq(const HermitianOperator& h, const GeneratorChoice& choice);

/// Integrates the flow. Throws NoSuchBand (band absent at l = 0),
/// UnitarityDrift (tracked U leaves the unitary group beyond the limit).
/// Integrator failures are reported through stop_reason with the samples
/// computed so far.
FlowTrajectory integrate_flow(const HermitianOperator& h0, const GeneratorChoice& choice,
                              const FlowConfig& cfg);

BlockReport block_report(const HermitianOperator& h, double cluster_tol);

struct DecayIdentity {
  std::vector<double> l;
  std::vector<double> numeric_rate;      // d/dl offdiag_sq, central differences
  std::vector<double> analytic_rate;     // -4 sum (eps_{n+i} - eps_n)^2 |C_{n+i}|^2
  std::vector<double> decay_residual;    // |numeric + 4 sum ...|
  std::vector<double> trace_residual;    // |d/dl offdiag_sq + d/dl sum eps^2|
  double scale = 0.0;                    // max |analytic_rate|

  double max_relative_decay_residual() const;
};

/// Checks the decay identity at every interior sample. The analytic side sums
/// over the bands the generator acts on. Throws TooFewSamples (< 3).
DecayIdentity decay_identity_residual(const FlowTrajectory& traj);

}  // namespace wegnerflow
