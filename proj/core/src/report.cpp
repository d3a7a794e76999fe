#include "wegnerflow/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "wegnerflow/error.hpp"

namespace wegnerflow {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::InvalidArgument, path.string() + ": " + e.what());
  }
}

namespace {

void dump(std::ostream& os, const nlohmann::json& j, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ",\n";
        first = false;
        os << inner << nlohmann::json(it.key()).dump() << ": ";
        dump(os, it.value(), indent + 1);
      }
      os << "\n" << pad << "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      // Short numeric arrays (complex pairs, coordinate vectors) stay on one line.
      bool flat = j.size() <= 8;
      for (const auto& e : j) flat = flat && e.is_primitive();
      if (flat) {
        os << "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) os << ", ";
          dump(os, j[i], indent + 1);
        }
        os << "]";
        return;
      }
      os << "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) os << ",\n";
        os << inner;
        dump(os, j[i], indent + 1);
      }
      os << "\n" << pad << "]";
      return;
    }
    case nlohmann::json::value_t::number_float: {
      const double x = j.get<double>();
      // JSON has no NaN/Inf literal
      if (std::isfinite(x)) {
        os << format_double(x);
      } else {
        os << nlohmann::json(format_double(x)).dump();
      }
      return;
    }
    default:
      os << j.dump();
  }
}

}  // namespace

std::string dump_json(const nlohmann::json& doc) {
  std::ostringstream os;
  dump(os, doc, 0);
  os << "\n";
  return os.str();
}

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << dump_json(doc);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path), width_(header.size()) {
  if (!out_) throw Error(ErrorCode::Io, "cannot write " + path.string());
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out_ << ',';
    out_ << header[i];
  }
  out_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != width_) {
    throw Error(ErrorCode::DimMismatch, "CSV row width does not match header");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out_ << ',';
    out_ << format_double(values[i]);
  }
  out_ << '\n';
}

Check Check::at_most(std::string name, double value, double tolerance, std::string note) {
  return Check{std::move(name), value, tolerance, std::isfinite(value) && value <= tolerance,
               std::move(note)};
}

Check Check::at_least(std::string name, double value, double threshold, std::string note) {
  Check c{std::move(name), value, threshold, std::isfinite(value) && value >= threshold,
          std::move(note)};
  if (c.note.empty()) c.note = "counter-control: passes when max_residual >= tolerance";
  return c;
}

Check Check::boolean(std::string name, bool ok, std::string note) {
  return Check{std::move(name), ok ? 0.0 : 1.0, 0.0, ok, std::move(note)};
}

nlohmann::json to_json(const Check& c) {
  nlohmann::json j = {{"name", c.name},
                      {"max_residual", c.max_residual},
                      {"tolerance", c.tolerance},
                      {"pass", c.pass}};
  if (!c.note.empty()) j["note"] = c.note;
  return j;
}

nlohmann::json verdict_json(const std::vector<Check>& checks) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : checks) arr.push_back(to_json(c));
  return {{"schema_version", kReportSchemaVersion}, {"checks", arr}, {"pass", all_pass(checks)}};
}

bool all_pass(const std::vector<Check>& checks) {
  for (const auto& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

}  // namespace wegnerflow
