#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "run_spec.hpp"
#include "wegnerflow/acceptance.hpp"
#include "wegnerflow/matrix_io.hpp"
#include "wegnerflow/report.hpp"

namespace wegnerflow::cli {

namespace fs = std::filesystem;

namespace {

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

void prepare_out(const fs::path& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) throw SpecError("output directory not writable: " + out.string());
}

// Timestamps live only here so every other output is reproducible.
void write_meta(const fs::path& out, const std::string& command, const nlohmann::json& extra = {}) {
  nlohmann::json meta{{"schema_version", kReportSchemaVersion},
                      {"command", command},
                      {"timestamp", utc_timestamp()}};
  for (const auto& [k, v] : extra.items()) meta[k] = v;
  write_json(out / "meta.json", meta);
}

nlohmann::json with_header(nlohmann::json doc, const std::string& command) {
  doc["schema_version"] = kReportSchemaVersion;
  doc["command"] = command;
  return doc;
}

// Runs the spec-reading phase; every failure in it is a spec error.
template <class F>
auto spec_phase(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const SpecError&) {
    throw;
  } catch (const Error& e) {
    throw SpecError(e.what());
  } catch (const nlohmann::json::exception& e) {
    throw SpecError(std::string("malformed spec: ") + e.what());
  }
}

std::vector<int> parse_band_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      throw SpecError("malformed band list '" + text + "'");
    }
    if (used != item.size() || v <= 0) throw SpecError("malformed band list '" + text + "'");
    out.push_back(v);
  }
  if (out.empty()) throw SpecError("empty band list");
  return out;
}

std::vector<std::string> complex_header(const ReducedCoefficients& c) {
  std::vector<std::string> h{"l"};
  for (const auto& [name, column] : c.columns) {
    h.push_back(name + "_re");
    h.push_back(name + "_im");
  }
  return h;
}

void write_coefficients(const fs::path& path, const ReducedCoefficients& c) {
  CsvWriter csv(path, complex_header(c));
  for (std::size_t k = 0; k < c.l.size(); ++k) {
    std::vector<double> row{c.l[k]};
    for (const auto& [name, column] : c.columns) {
      row.push_back(column[k].real());
      row.push_back(column[k].imag());
    }
    csv.row(row);
  }
}

}  // namespace

// ------------------------------------------------------------------ flow

int cmd_flow(const CommonArgs& args) {
  struct Loaded {
    HermitianOperator h0;
    GeneratorChoice choice;
    FlowConfig cfg;
    std::vector<long> dumps;
  };
  const Loaded in = spec_phase([&] {
    const RunSpec spec = RunSpec::load(args.spec);
    Loaded l{load_hamiltonian(spec, args.seed), parse_generator(spec), parse_flow_config(spec), {}};
    l.dumps = spec.get_or<std::vector<long>>("dump_samples", {});
    prepare_out(args.out);
    return l;
  });

  const FlowTrajectory t = [&] {
    try {
      return integrate_flow(in.h0, in.choice, in.cfg);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::NoSuchBand) throw SpecError(e.what());
      throw;
    }
  }();

  std::vector<std::string> header{"l", "trace_h", "trace_h2", "offdiag_sq", "eps_sq_sum"};
  for (int b : t.initial_bands) header.push_back("band_i" + std::to_string(b) + "_sq");
  {
    CsvWriter csv(args.out / "trajectory.csv", header);
    for (const FlowSample& s : t.samples) {
      std::vector<double> row{s.l, s.trace_h, s.trace_h2, s.offdiag_sq, s.eps_sq_sum};
      for (int b : t.initial_bands) row.push_back(s.band_norms.at(b));
      csv.row(row);
    }
  }
  if (!in.dumps.empty()) fs::create_directories(args.out / "matrices");
  for (long k : in.dumps) {
    const long n = static_cast<long>(t.samples.size());
    const long idx = k < 0 ? n + k : k;
    if (idx < 0 || idx >= n) throw SpecError("dump_samples index " + std::to_string(k) + " out of range");
    write_matrix(args.out / "matrices" / ("h_" + std::to_string(idx) + ".json"),
                 t.samples[static_cast<std::size_t>(idx)].h.matrix());
  }

  RealVector diag = t.back().h.diagonal();
  std::sort(diag.begin(), diag.end());
  const RealVector exact = sorted_eigenvalues(in.h0);
  const double scale = std::max(in.h0.frobenius_norm(), 1e-300);
  double tr_drift = 0.0, tr2_drift = 0.0;
  for (const FlowSample& s : t.samples) {
    tr_drift = std::max(tr_drift, std::abs(s.trace_h - t.front().trace_h) / scale);
    tr2_drift = std::max(tr2_drift, std::abs(s.trace_h2 - t.front().trace_h2) / (scale * scale));
  }
  nlohmann::json clusters = nlohmann::json::array();
  for (const auto& c : t.blocks.clusters) clusters.push_back(c);

  const nlohmann::json summary = with_header(
      {{"generator", describe(t.choice)},
       {"dim", in.h0.dim()},
       {"stop_reason", to_string(t.stop_reason)},
       {"l_final", t.back().l},
       {"steps", t.steps},
       {"samples", t.samples.size()},
       {"initial_bands", t.initial_bands},
       {"final_offdiag_sq", t.back().offdiag_sq},
       {"final_eta_norm", t.back().eta_norm},
       {"eigenvalue_match_error", (diag - exact).cwiseAbs().maxCoeff()},
       {"trace_drift", tr_drift},
       {"trace2_drift", tr2_drift},
       {"final_diagonal", std::vector<double>(diag.begin(), diag.end())},
       {"blocks",
        {{"clusters", clusters},
         {"intra_cluster_sq", t.blocks.intra_cluster_sq},
         {"inter_cluster_sq", t.blocks.inter_cluster_sq}}},
       {"warnings", t.warnings}},
      "flow");
  write_json(args.out / "summary.json", summary);
  write_meta(args.out, "flow", {{"spec", args.spec.string()}, {"seed", args.seed}});

  std::cout << "stop_reason " << to_string(t.stop_reason) << "  l_final " << format_double(t.back().l)
            << "  offdiag_sq " << format_double(t.back().offdiag_sq) << '\n';
  for (const std::string& w : t.warnings) std::cout << "warning: " << w << '\n';
  if (t.stop_reason == StopReason::IntegratorFailure) {
    std::cerr << "error: integrator failure"
              << (t.warnings.empty() ? std::string() : ": " + t.warnings.back()) << '\n';
    return kIntegratorFailure;
  }
  return kOk;
}

// ---------------------------------------------------------------- metric

int cmd_metric(const CommonArgs& args) {
  struct Loaded {
    ModelSpec model;
    int base = 0;
    std::vector<RealVector> points;
    MetricOptions options;
  };
  const Loaded in = spec_phase([&] {
    const RunSpec spec = RunSpec::load(args.spec);
    Loaded l;
    l.model = parse_model(spec.require("model"));
    l.base = spec.get_or<int>("base", 0);
    l.options.cross_check = spec.get_or<bool>("cross_check", true);
    l.options.christoffel = spec.get_or<bool>("christoffel", false);
    l.options.route_rel_tol = spec.get_or<double>("route_rel_tol", l.options.route_rel_tol);
    const ParametrizedFamily f = family_for(l.model, l.base);
    l.points = parse_metric_points(spec, f.k());
    prepare_out(args.out);
    return l;
  });

  const ParametrizedFamily family = family_for(in.model, in.base);
  const int k = family.k();
  std::vector<std::string> header{"index"};
  for (int i = 0; i < k; ++i) header.push_back("alpha_" + std::to_string(i));
  for (int i = 0; i < k; ++i) {
    for (int j = i; j < k; ++j) header.push_back("g_" + std::to_string(i) + std::to_string(j));
  }
  header.push_back("route_mismatch");

  CsvWriter csv(args.out / "metric.csv", header);
  double worst_route = 0.0;
  nlohmann::json gammas = nlohmann::json::array();
  for (std::size_t p = 0; p < in.points.size(); ++p) {
    const MetricSample m = fs_metric(family, in.points[p], in.options);
    std::vector<double> row{static_cast<double>(p)};
    for (int i = 0; i < k; ++i) row.push_back(m.alpha[i]);
    for (int i = 0; i < k; ++i) {
      for (int j = i; j < k; ++j) row.push_back(m.g(i, j));
    }
    row.push_back(m.route_mismatch);
    csv.row(row);
    worst_route = std::max(worst_route, m.route_mismatch);
    if (m.christoffel) {
      nlohmann::json g = nlohmann::json::array();
      for (const RealMatrix& gh : *m.christoffel) {
        nlohmann::json rows = nlohmann::json::array();
        for (int i = 0; i < k; ++i) {
          std::vector<double> r;
          for (int j = 0; j < k; ++j) r.push_back(gh(i, j));
          rows.push_back(r);
        }
        g.push_back(rows);
      }
      gammas.push_back({{"index", p}, {"christoffel", g}});
    }
  }
  nlohmann::json summary = with_header({{"family", family.name()},
                                        {"coordinates", family.k()},
                                        {"points", in.points.size()},
                                        {"cross_check", in.options.cross_check},
                                        {"max_route_mismatch", worst_route}},
                                       "metric");
  if (!gammas.empty()) summary["christoffel"] = gammas;
  write_json(args.out / "summary.json", summary);
  write_meta(args.out, "metric", {{"spec", args.spec.string()}});
  std::cout << family.name() << ": " << in.points.size() << " points, max route mismatch "
            << format_double(worst_route) << '\n';
  return kOk;
}

// -------------------------------------------------------------- geodesic

int cmd_geodesic(const CommonArgs& args) {
  struct Loaded {
    GeodesicCase c;
    PipelineTolerances tol;
  };
  const Loaded in = spec_phase([&] {
    const RunSpec spec = RunSpec::load(args.spec);
    Loaded l{parse_geodesic_case(spec), parse_pipeline_tolerances(spec)};
    family_for(l.c.model, l.c.base);
    prepare_out(args.out);
    return l;
  });

  const PipelineResult r = verify_geodesic(in.c, in.tol);
  write_json(args.out / "verdict.json", with_header(r.verdict(), "geodesic"));

  if (!r.coords.l.empty()) {
    const int k = static_cast<int>(r.coords.alpha.front().size());
    std::vector<std::string> header{"l"};
    for (int i = 0; i < k; ++i) header.push_back("alpha_" + std::to_string(i));
    for (int i = 0; i < k; ++i) header.push_back("alpha_dot_" + std::to_string(i));
    header.push_back("reconstruction_residual");
    header.push_back("tangent_residual");
    CsvWriter coords(args.out / "coords.csv", header);
    for (std::size_t j = 0; j < r.coords.size(); ++j) {
      std::vector<double> row{r.coords.l[j]};
      for (int i = 0; i < k; ++i) row.push_back(r.coords.alpha[j][i]);
      for (int i = 0; i < k; ++i) row.push_back(r.coords.alpha_dot[j][i]);
      row.push_back(r.coords.reconstruction_residual[j]);
      row.push_back(r.coords.tangent_residual[j]);
      coords.row(row);
    }

    std::vector<std::string> gh{"l", "s"};
    for (int i = 0; i < k; ++i) gh.push_back("residual_" + std::to_string(i));
    CsvWriter geo(args.out / "geodesic.csv", gh);
    for (std::size_t j = 0; j < r.geodesic.l.size(); ++j) {
      std::vector<double> row{r.geodesic.l[j], r.geodesic.s[j]};
      for (int i = 0; i < k; ++i) row.push_back(r.geodesic.residual[j][i]);
      geo.row(row);
    }
    write_coefficients(args.out / "coefficients.csv", extract_coefficients(r.flow, in.c.model, in.c.base));
  }
  write_meta(args.out, "geodesic", {{"spec", args.spec.string()}});

  for (const Check& c : r.checks) {
    std::cout << (c.pass ? "pass " : "FAIL ") << c.name << "  " << c.max_residual << " / " << c.tolerance
              << '\n';
  }
  std::cout << "case " << to_string(r.base_case.value) << "  verdict " << (r.pass() ? "PASS" : "FAIL") << '\n';
  return kOk;
}

// ------------------------------------------------------------- condition

int cmd_condition(const ConditionArgs& args) {
  std::vector<int> bands;
  std::optional<int> label = args.label;
  std::optional<int> offset = args.offset;
  if (args.spec) {
    spec_phase([&] {
      const RunSpec spec = RunSpec::load(*args.spec);
      bands = spec.require("bands").get<std::vector<int>>();
      if (spec.doc.contains("a")) label = spec.doc.at("a").get<int>();
      if (spec.doc.contains("offset")) offset = spec.doc.at("offset").get<int>();
      return 0;
    });
  } else {
    bands = parse_band_list(args.bands);
  }
  if (label.has_value() == offset.has_value()) throw SpecError("give exactly one of --a and --offset");

  const BandCondition c = spec_phase([&] {
    return label ? band_condition(bands, *label) : band_condition_offset(bands, *offset);
  });
  std::ostringstream line;
  line << (c.holds ? "true" : "false");
  if (c.offender) line << "  offender (" << c.offender->first << ", " << c.offender->second << "x)";
  std::cout << line.str() << '\n';

  if (args.out) {
    prepare_out(*args.out);
    nlohmann::json j{{"bands", bands}, {"offset", c.offset}, {"holds", c.holds}};
    if (label) j["a"] = *label;
    j["offender"] = c.offender ? nlohmann::json{{"offset", c.offender->first}, {"multiple", c.offender->second}}
                               : nlohmann::json(nullptr);
    write_json(*args.out / "condition.json", with_header(j, "condition"));
  }
  return kOk;
}

// ------------------------------------------------------------ verify-all

int cmd_verify_all(const VerifyArgs& args) {
  AcceptanceOptions options;
  if (args.seed_given) options.seed = args.seed;
  options.only = args.only;
  for (int id : options.only) {
    if (id < 1 || id > 10) throw SpecError("--only takes criteria 1..10");
  }
  for (const std::string& o : args.tolerance_overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw SpecError("--set-tolerance expects name=value, got '" + o + "'");
    spec_phase([&] {
      double v = 0.0;
      try {
        v = std::stod(o.substr(eq + 1));
      } catch (const std::exception&) {
        throw SpecError("bad tolerance value in '" + o + "'");
      }
      options.tolerances.set(o.substr(0, eq), v);
      return 0;
    });
  }
  if (args.out) prepare_out(*args.out);

  const AcceptanceReport report = run_acceptance(options);
  for (const CriterionResult& c : report.criteria) std::cout << c.line() << '\n';
  std::cout << report.check_count() << " checks, " << (report.pass() ? "all criteria pass" : "FAILED") << '\n';

  if (args.out) {
    write_json(*args.out / "report.json", report.to_json());
    write_meta(*args.out, "verify-all", {{"seed", report.seed}});
  }
  if (!report.pass()) {
    std::cerr << "failed criteria:";
    for (int id : report.failed()) std::cerr << ' ' << id;
    std::cerr << '\n';
    return kChecksFailed;
  }
  return kOk;
}

}  // namespace wegnerflow::cli
