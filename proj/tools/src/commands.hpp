#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace wegnerflow::cli {

enum ExitCode : int {
  kOk = 0,
  kChecksFailed = 1,
  kSpecError = 2,
  kIntegratorFailure = 3,
  kCheckError = 4,
};

struct CommonArgs {
  std::filesystem::path spec;
  std::filesystem::path out;
  std::uint64_t seed = 0;
  bool seed_given = false;
};

int cmd_flow(const CommonArgs& args);
int cmd_metric(const CommonArgs& args);
int cmd_geodesic(const CommonArgs& args);

struct ConditionArgs {
  std::optional<std::filesystem::path> spec;
  std::optional<std::filesystem::path> out;
  std::string bands;
  std::optional<int> label;
  std::optional<int> offset;
};
int cmd_condition(const ConditionArgs& args);

struct VerifyArgs {
  std::optional<std::filesystem::path> out;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::set<int> only;
  /// name=value overrides of acceptance tolerances (harness testing).
  std::vector<std::string> tolerance_overrides;
};
int cmd_verify_all(const VerifyArgs& args);

}  // namespace wegnerflow::cli
