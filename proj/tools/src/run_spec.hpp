#pragma once

// Parsing of the JSON run specs consumed by the subcommands.

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "wegnerflow/flow.hpp"
#include "wegnerflow/geometry.hpp"
#include "wegnerflow/models.hpp"
#include "wegnerflow/pipeline.hpp"

namespace wegnerflow::cli {

/// Malformed or inconsistent run spec (exit code 2).
class SpecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunSpec {
  nlohmann::json doc;
  std::filesystem::path dir;  // relative paths inside the spec resolve here

  static RunSpec load(const std::filesystem::path& path);

  /// Throws SpecError when the key is missing or has the wrong type.
  const nlohmann::json& require(const std::string& key) const;
  template <class T>
  T get_or(const std::string& key, T fallback) const {
    if (!doc.contains(key)) return fallback;
    try {
      return doc.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw SpecError("field '" + key + "' has the wrong type");
    }
  }
};

/// "matrix": path or inline matrix JSON, "model": model spec, or
/// "random": {"dim": d[, "band": offset]} drawn with `seed`.
HermitianOperator load_hamiltonian(const RunSpec& spec, std::uint64_t seed);

/// "wegner" (default) or {"band": offset}.
GeneratorChoice parse_generator(const RunSpec& spec);

/// "flow": {l_max, stop_offdiag, sample_every | sample_dl, track_unitary,
/// integrator: {"kind": "rk45", rtol, atol, min_step, max_step} |
/// {"kind": "rk4", step}}.
FlowConfig parse_flow_config(const RunSpec& spec);

/// "points": [[...], ...] and/or "grid": [[lo, hi, count], ...] per coordinate.
std::vector<RealVector> parse_metric_points(const RunSpec& spec, int k);

GeodesicCase parse_geodesic_case(const RunSpec& spec);
PipelineTolerances parse_pipeline_tolerances(const RunSpec& spec);

}  // namespace wegnerflow::cli
