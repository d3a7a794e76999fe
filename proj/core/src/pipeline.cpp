#include "wegnerflow/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "wegnerflow/error.hpp"

namespace wegnerflow {

namespace {

Eigen::Index base_index(const ModelSpec& model, int base) {
  if (std::holds_alternative<JcSpec>(model)) return 2 * static_cast<Eigen::Index>(base) + 1;
  return base;
}

std::string join(const std::vector<int>& xs) {
  std::ostringstream os;
  for (std::size_t i = 0; i < xs.size(); ++i) os << (i ? "," : "") << xs[i];
  return os.str();
}

}  // namespace

ParametrizedFamily family_for(const ModelSpec& model, int base) {
  if (const auto* g = std::get_if<GhoSpec>(&model)) {
    const GhoSpec r = reduce_gho(*g);
    if (r.lambda != 0.0) return squeeze_family(base, r.n_max);
    if (r.mu != 0.0) return displacement_family(r.n_max, base);
    throw Error(ErrorCode::NoSuchBand, "gho with mu = lambda = 0 is already diagonal");
  }
  if (const auto* s = std::get_if<SpinSpec>(&model)) {
    s->validate();
    return spin_family(s->s, s->s - static_cast<double>(base));
  }
  const auto& jc = std::get<JcSpec>(model);
  jc.validate();
  return jc_family(jc.n_max, base);
}

nlohmann::json PipelineResult::verdict() const {
  nlohmann::json j = verdict_json(checks);
  j["case_name"] = spec.name;
  j["model"] = to_json(spec.model);
  j["base"] = spec.base;
  j["family"] = family;
  j["band"] = band;
  j["stop_reason"] = to_string(flow.stop_reason);
  j["samples"] = flow.samples.size();
  j["case"] = to_string(base_case.value);
  j["case_gap"] = base_case.gap;
  std::set<std::string> labels;
  for (Case c : interior_cases) labels.insert(to_string(c));
  j["case_interior"] = std::vector<std::string>(labels.begin(), labels.end());
  j["edge_amplitude"] = edge_amplitude;
  return j;
}

PipelineResult verify_geodesic(const GeodesicCase& spec, const PipelineTolerances& tol) {
  PipelineResult out;
  out.spec = spec;
  const HermitianOperator h0 = build_model(spec.model);
  const BandDecomposition bd0 = band_split(h0);
  const std::vector<int> bands = bd0.band_indices();
  if (bands.empty()) throw Error(ErrorCode::NoSuchBand, "model has no off-diagonal band to flow");
  out.band = bands.front();

  const ParametrizedFamily family = family_for(spec.model, spec.base);
  out.family = family.name();
  const Eigen::Index n = base_index(spec.model, spec.base);

  FlowConfig cfg;
  cfg.integrator = ode::AdaptiveRk45{1e-11, 1e-14, 1e-14, 0.1};
  cfg.l_max = spec.l_max;
  cfg.stop_offdiag = spec.stop_relative * target_norm_sq(h0, WegnerGenerator{});
  cfg.sampling = SampleSpacing{spec.sample_dl};
  cfg.track_unitary = true;
  out.flow = integrate_flow(h0, WegnerGenerator{}, cfg);
  if (out.flow.stop_reason == StopReason::IntegratorFailure) {
    throw Error(ErrorCode::IntegratorFailure,
                out.flow.warnings.empty() ? "integrator failed" : out.flow.warnings.back());
  }

  out.condition = band_condition_offset(bands, out.band);
  out.base_case = case_classify(bd0, n, out.band);
  auto& c = out.checks;
  c.push_back(Check::boolean("band_condition", out.condition.holds,
                             "bands {" + join(bands) + "}, i_a = " + std::to_string(out.band)));
  c.push_back(Check::boolean("flow_converged", out.flow.stop_reason == StopReason::Converged,
                             "stop_reason " + to_string(out.flow.stop_reason)));
  if (out.flow.stop_reason == StopReason::Stalled) {
    // eta vanished with off-diagonal weight left (degenerate diagonal): the
    // flow never leaves its starting point, so there is no curve to test.
    c.push_back(Check::boolean("curve_exists", false,
                               "generator vanished at l = " + format_double(out.flow.back().l)));
    return out;
  }

  out.coords = coordinate_projection(out.flow, family, tol.projection);
  out.consistency = generator_consistency(family, out.coords, out.flow);
  out.geodesic = geodesic_residual(out.coords, family);
  out.variational = variational_gradient(out.coords, family);
  out.xi = xi_residual(family, out.coords);
  out.sandwiched = sandwiched_ode_residual(out.flow, n, out.band);

  std::vector<Eigen::Index> rows = family.compare_indices();
  if (rows.empty()) {
    for (Eigen::Index r = 0; r < h0.dim(); ++r) rows.push_back(r);
  }
  const std::set<Eigen::Index> row_set(rows.begin(), rows.end());
  for (Eigen::Index r : rows) {
    if (row_set.count(r - out.band) && row_set.count(r + out.band)) {
      out.interior_cases.push_back(case_classify(bd0, r, out.band).value);
    }
  }
  for (const FlowSample& s : out.flow.samples) {
    out.edge_amplitude = std::max(out.edge_amplitude, edge_amplitude(*s.u, family));
  }

  double projection = 0.0;
  for (double r : out.coords.reconstruction_residual) projection = std::max(projection, r);

  c.push_back(Check::at_most("projection_residual", projection, tol.projection));
  c.push_back(Check::at_most("generator_consistency", out.consistency.max(),
                             tol.generator_consistency));
  c.push_back(Check::at_least("geodesic_samples", static_cast<double>(out.geodesic.index.size()),
                              static_cast<double>(tol.min_samples),
                              "evaluated samples after the arc-length drop"));
  c.push_back(Check::at_most("geodesic_residual", out.geodesic.max_abs(), tol.geodesic,
                             out.geodesic.lowered ? "lowered form (degenerate metric)" : ""));
  c.push_back(Check::at_most("variational_gradient", out.variational.max_abs(), tol.variational));
  c.push_back(Check::at_most("xi_residual", out.xi.max_relative(), tol.xi_relative,
                             "relative to the largest cancelling term"));
  c.push_back(Check::at_most("sandwiched_ode", out.sandwiched.max_relative(),
                             tol.sandwiched_relative, "relative to max |(delta eps)^2 C|"));
  c.push_back(Check::at_most("phase_drift", out.sandwiched.phase_drift, tol.phase_drift));
  c.push_back(Check::boolean("case_classify", out.base_case.value != Case::None,
                             "case " + to_string(out.base_case.value)));
  c.push_back(Check::at_most("truncation_edge", out.edge_amplitude, 1e-8,
                             "amplitude of the flowed state on excluded edge rows"));
  return out;
}

}  // namespace wegnerflow
