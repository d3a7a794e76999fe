#pragma once

// flow -> coordinate projection -> geodesic diagnostics, collected into a
// verdict of named checks.

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <vector>

#include "wegnerflow/geometry.hpp"
#include "wegnerflow/models.hpp"
#include "wegnerflow/report.hpp"

namespace wegnerflow {

struct GeodesicCase {
  std::string name;
  ModelSpec model;
  /// Flowed basis state: Fock level (gho), index j with m = s - j (spin),
  /// photon sector n with base |e,n> (jc).
  int base = 0;
  double l_max = 40.0;
  double sample_dl = 1e-2;
  /// The flow stops once the targeted norm^2 falls below this fraction of
  /// its initial value.
  double stop_relative = 1e-8;
};

struct PipelineTolerances {
  double projection = 1e-6;
  double generator_consistency = 1e-5;
  double geodesic = 1e-3;
  std::size_t min_samples = 200;
  double variational = 5e-4;
  double xi_relative = 1e-5;
  double sandwiched_relative = 1e-6;
  double phase_drift = 1e-8;
};

struct PipelineResult {
  GeodesicCase spec;
  std::string family;
  int band = 0;
  FlowTrajectory flow;
  CoordinateTrajectory coords;
  BandCondition condition;
  CaseLabel base_case;
  /// Labels of every basis state with both band neighbours inside the
  /// compared block (interior rows).
  std::vector<Case> interior_cases;
  SampleResidual consistency;
  GeodesicResidual geodesic;
  VariationalGradient variational;
  XiResidual xi;
  SandwichedResidual sandwiched;
  double edge_amplitude = 0.0;
  std::vector<Check> checks;

  bool pass() const { return all_pass(checks); }
  nlohmann::json verdict() const;
};

/// The unitary family matching a model and base state.
ParametrizedFamily family_for(const ModelSpec& model, int base);

/// Runs the whole chain. Errors inside a diagnostic propagate (the CLI
/// maps them to exit code 4); failed tolerances are recorded as checks.
PipelineResult verify_geodesic(const GeodesicCase& spec, const PipelineTolerances& tol = {});

}  // namespace wegnerflow
