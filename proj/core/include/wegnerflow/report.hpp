#pragma once

// Report plumbing shared by the CLI and the verification suites: JSON file
// IO, 17-significant-digit number formatting, a small CSV writer and the
// check/verdict records.

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace wegnerflow {

inline constexpr int kReportSchemaVersion = 1;

/// "%.17g"; non-finite values print as nan/inf.
std::string format_double(double x);

nlohmann::json read_json(const std::filesystem::path& path);

/// Pretty-prints with floats at 17 significant digits.
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);
std::string dump_json(const nlohmann::json& doc);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

  void row(const std::vector<double>& values);

 private:
  std::ofstream out_;
  std::size_t width_;
};

/// One pass/fail line of a verdict. `max_residual <= tolerance` passes.
struct Check {
  std::string name;
  double max_residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string note;

  static Check at_most(std::string name, double value, double tolerance, std::string note = {});
  static Check at_least(std::string name, double value, double threshold, std::string note = {});
  static Check boolean(std::string name, bool ok, std::string note = {});
};

nlohmann::json to_json(const Check& c);
nlohmann::json verdict_json(const std::vector<Check>& checks);
bool all_pass(const std::vector<Check>& checks);

}  // namespace wegnerflow
