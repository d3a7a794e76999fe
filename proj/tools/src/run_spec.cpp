#include "run_spec.hpp"

#include <random>

#include "wegnerflow/acceptance.hpp"
#include "wegnerflow/matrix_io.hpp"
#include "wegnerflow/report.hpp"

namespace wegnerflow::cli {

namespace {

double number(const nlohmann::json& j, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw SpecError("field '" + key + "' must be a number");
  return j.at(key).get<double>();
}

}  // namespace

RunSpec RunSpec::load(const std::filesystem::path& path) {
  RunSpec spec;
  try {
    spec.doc = read_json(path);
  } catch (const Error& e) {
    throw SpecError(e.what());
  }
  if (!spec.doc.is_object()) throw SpecError("run spec must be a JSON object");
  spec.dir = path.parent_path();
  return spec;
}

const nlohmann::json& RunSpec::require(const std::string& key) const {
  if (!doc.contains(key)) throw SpecError("missing field '" + key + "'");
  return doc.at(key);
}

HermitianOperator load_hamiltonian(const RunSpec& spec, std::uint64_t seed) {
  const double tol = spec.get_or<double>("hermitian_tol", 1e-12);
  const int sources = static_cast<int>(spec.doc.contains("matrix")) +
                      static_cast<int>(spec.doc.contains("model")) +
                      static_cast<int>(spec.doc.contains("random"));
  if (sources != 1) throw SpecError("exactly one of 'matrix', 'model', 'random' is required");

  if (spec.doc.contains("matrix")) {
    const auto& m = spec.doc.at("matrix");
    if (m.is_string()) {
      std::filesystem::path p = m.get<std::string>();
      if (p.is_relative()) p = spec.dir / p;
      if (!std::filesystem::exists(p)) throw SpecError("matrix file does not exist: " + p.string());
      return read_hermitian(p, tol);
    }
    return validate_hermitian(matrix_from_json(m), tol);
  }
  if (spec.doc.contains("model")) return build_model(parse_model(spec.doc.at("model")));

  const auto& r = spec.doc.at("random");
  if (!r.is_object() || !r.contains("dim")) throw SpecError("'random' needs {\"dim\": d}");
  const auto dim = r.at("dim").get<Eigen::Index>();
  if (dim < 2) throw SpecError("'random.dim' must be at least 2");
  std::mt19937_64 rng(seed);
  if (r.contains("band")) return random_band_hermitian(dim, r.at("band").get<int>(), rng);
  return random_hermitian(dim, rng);
}

GeneratorChoice parse_generator(const RunSpec& spec) {
  if (!spec.doc.contains("generator")) return WegnerGenerator{};
  const auto& g = spec.doc.at("generator");
  if (g.is_string() && g.get<std::string>() == "wegner") return WegnerGenerator{};
  if (g.is_object() && g.contains("band") && g.at("band").is_number_integer()) {
    return BandGenerator{g.at("band").get<int>()};
  }
  throw SpecError("'generator' must be \"wegner\" or {\"band\": offset}");
}

FlowConfig parse_flow_config(const RunSpec& spec) {
  FlowConfig cfg;
  if (!spec.doc.contains("flow")) return cfg;
  const auto& f = spec.doc.at("flow");
  if (!f.is_object()) throw SpecError("'flow' must be an object");
  cfg.l_max = number(f, "l_max", cfg.l_max);
  cfg.stop_offdiag = number(f, "stop_offdiag", cfg.stop_offdiag);
  cfg.track_unitary = f.value("track_unitary", false);
  cfg.cluster_tol_rel = number(f, "cluster_tol_rel", cfg.cluster_tol_rel);
  if (!(cfg.l_max > 0.0)) throw SpecError("'flow.l_max' must be positive");
  if (!(cfg.stop_offdiag >= 0.0)) throw SpecError("'flow.stop_offdiag' must be non-negative");

  if (f.contains("sample_every") && f.contains("sample_dl")) {
    throw SpecError("'flow.sample_every' and 'flow.sample_dl' are exclusive");
  }
  if (f.contains("sample_every")) {
    const int every = f.at("sample_every").get<int>();
    if (every < 1) throw SpecError("'flow.sample_every' must be at least 1");
    cfg.sampling = SampleEvery{every};
  } else if (f.contains("sample_dl")) {
    const double dl = number(f, "sample_dl", 0.0);
    if (!(dl > 0.0)) throw SpecError("'flow.sample_dl' must be positive");
    cfg.sampling = SampleSpacing{dl};
  }

  if (f.contains("integrator")) {
    const auto& in = f.at("integrator");
    const std::string kind = in.value("kind", "rk45");
    if (kind == "rk45") {
      ode::AdaptiveRk45 rk;
      rk.rtol = number(in, "rtol", rk.rtol);
      rk.atol = number(in, "atol", rk.atol);
      rk.min_step = number(in, "min_step", rk.min_step);
      rk.max_step = number(in, "max_step", rk.max_step);
      if (!(rk.rtol > 0.0 && rk.atol > 0.0 && rk.min_step > 0.0 && rk.max_step >= rk.min_step)) {
        throw SpecError("rk45 tolerances and step bounds must be positive");
      }
      cfg.integrator = rk;
    } else if (kind == "rk4") {
      const double step = number(in, "step", 1e-3);
      if (!(step > 0.0)) throw SpecError("rk4 step must be positive");
      cfg.integrator = ode::FixedRk4{step};
    } else {
      throw SpecError("unknown integrator kind '" + kind + "'");
    }
  }
  return cfg;
}

std::vector<RealVector> parse_metric_points(const RunSpec& spec, int k) {
  std::vector<RealVector> points;
  if (spec.doc.contains("points")) {
    for (const auto& p : spec.doc.at("points")) {
      const auto xs = p.get<std::vector<double>>();
      if (static_cast<int>(xs.size()) != k) {
        throw SpecError("metric point has " + std::to_string(xs.size()) + " coordinates, family has " +
                        std::to_string(k));
      }
      points.push_back(Eigen::Map<const RealVector>(xs.data(), k));
    }
  }
  if (spec.doc.contains("grid")) {
    const auto& axes = spec.doc.at("grid");
    if (!axes.is_array() || static_cast<int>(axes.size()) != k) {
      throw SpecError("'grid' needs one [lo, hi, count] triple per coordinate");
    }
    std::vector<std::vector<double>> values;
    for (const auto& axis : axes) {
      const auto t = axis.get<std::vector<double>>();
      if (t.size() != 3 || t[2] < 1.0) throw SpecError("grid axis must be [lo, hi, count >= 1]");
      const int count = static_cast<int>(t[2]);
      std::vector<double> v;
      for (int i = 0; i < count; ++i) {
        v.push_back(count == 1 ? t[0] : t[0] + (t[1] - t[0]) * i / (count - 1));
      }
      values.push_back(std::move(v));
    }
    // odometer over the axes, last coordinate fastest
    std::vector<std::size_t> idx(static_cast<std::size_t>(k), 0);
    while (true) {
      RealVector p(k);
      for (int i = 0; i < k; ++i) p[i] = values[static_cast<std::size_t>(i)][idx[static_cast<std::size_t>(i)]];
      points.push_back(p);
      int axis = k - 1;
      while (axis >= 0 && ++idx[static_cast<std::size_t>(axis)] == values[static_cast<std::size_t>(axis)].size()) {
        idx[static_cast<std::size_t>(axis)] = 0;
        --axis;
      }
      if (axis < 0) break;
    }
  }
  if (points.empty()) throw SpecError("metric needs 'points' or 'grid'");
  return points;
}

GeodesicCase parse_geodesic_case(const RunSpec& spec) {
  GeodesicCase c;
  c.model = parse_model(spec.require("model"));
  c.name = spec.get_or<std::string>("name", model_name(c.model));
  c.base = spec.get_or<int>("base", 0);
  c.l_max = spec.get_or<double>("l_max", c.l_max);
  c.sample_dl = spec.get_or<double>("sample_dl", c.sample_dl);
  c.stop_relative = spec.get_or<double>("stop_relative", c.stop_relative);
  if (c.base < 0) throw SpecError("'base' must be non-negative");
  if (!(c.l_max > 0.0) || !(c.sample_dl > 0.0) || !(c.stop_relative > 0.0)) {
    throw SpecError("'l_max', 'sample_dl' and 'stop_relative' must be positive");
  }
  return c;
}

PipelineTolerances parse_pipeline_tolerances(const RunSpec& spec) {
  PipelineTolerances t;
  if (!spec.doc.contains("tolerances")) return t;
  const auto& j = spec.doc.at("tolerances");
  for (const auto& [key, value] : j.items()) {
    if (!value.is_number()) throw SpecError("tolerance '" + key + "' must be a number");
    const double v = value.get<double>();
    if (key == "projection") t.projection = v;
    else if (key == "generator_consistency") t.generator_consistency = v;
    else if (key == "geodesic") t.geodesic = v;
    else if (key == "min_samples") t.min_samples = static_cast<std::size_t>(v);
    else if (key == "variational") t.variational = v;
    else if (key == "xi_relative") t.xi_relative = v;
    else if (key == "sandwiched_relative") t.sandwiched_relative = v;
    else if (key == "phase_drift") t.phase_drift = v;
    else throw SpecError("unknown tolerance '" + key + "'");
  }
  return t;
}

}  // namespace wegnerflow::cli
