#pragma once

// The acceptance suite: ten numbered criteria, each a list of named checks
// with tolerances pinned below. Shared by the acceptance binary and
// `wegnerflow verify-all`.

#include <nlohmann/json.hpp>

#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "wegnerflow/operator.hpp"
#include "wegnerflow/report.hpp"

namespace wegnerflow {

inline constexpr std::uint64_t kDefaultSeed = 20240611;

/// Every tolerance the suite compares against, by check name.
struct AcceptanceTolerances {
  std::map<std::string, double> values{
      {"c1.eigenvalues", 1e-8},
      {"c1.trace_drift", 1e-9},
      {"c1.trace2_drift", 1e-9},
      {"c2.decay_identity", 1e-6},
      {"c4.displacement", 1e-6},
      {"c4.squeeze", 1e-4},
      {"c4.spin", 1e-5},
      {"c4.jc", 1e-5},
      {"c5.squeeze_ode", 1e-6},
      {"c5.spin_ode", 1e-6},
      {"c5.phase_drift", 1e-8},
      {"c6.geodesic", 1e-3},
      {"c6.variational", 5e-4},
      {"c6.xi_relative", 1e-5},
      {"c6.counter_geodesic", 1e-2},
      {"c6.counter_variational", 1e-2},
      {"c8.ratio", 1e-6},
      {"c9.eta", 1e-14},
      {"c10.consistency", 1e-5},
      {"c10.generator_relation", 1e-3},
  };

  /// Throws InvalidArgument for unknown names.
  double at(const std::string& name) const;
  void set(const std::string& name, double value);
};

struct AcceptanceOptions {
  std::uint64_t seed = kDefaultSeed;
  AcceptanceTolerances tolerances;
  /// Criteria to run (1..10); empty runs all.
  std::set<int> only;
};

struct CriterionResult {
  int id = 0;
  std::string title;
  std::vector<Check> checks;
  /// Set when a check threw; the criterion fails with this message.
  std::string error;

  bool pass() const;
  /// "criterion N PASS|FAIL  title  (failed: a, b)"
  std::string line() const;
};

struct AcceptanceReport {
  std::uint64_t seed = 0;
  std::vector<CriterionResult> criteria;

  bool pass() const;
  std::size_t check_count() const;
  std::vector<int> failed() const;
  nlohmann::json to_json() const;
};

AcceptanceReport run_acceptance(const AcceptanceOptions& options = {});

/// GUE-like draw: complex Gaussian entries, Hermitian part, scaled by
/// 1/sqrt(2d) so the spectrum stays O(1).
HermitianOperator random_hermitian(Eigen::Index d, std::mt19937_64& rng);

/// A random_hermitian draw restricted to its diagonal and the band at
/// `offset`.
HermitianOperator random_band_hermitian(Eigen::Index d, int offset, std::mt19937_64& rng);

}  // namespace wegnerflow
