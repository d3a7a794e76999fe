#include "wegnerflow/acceptance.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <sstream>

#include "wegnerflow/band.hpp"
#include "wegnerflow/error.hpp"
#include "wegnerflow/flow.hpp"
#include "wegnerflow/geometry.hpp"
#include "wegnerflow/models.hpp"
#include "wegnerflow/numerics.hpp"
#include "wegnerflow/pipeline.hpp"

namespace wegnerflow {

double AcceptanceTolerances::at(const std::string& name) const {
  const auto it = values.find(name);
  if (it == values.end()) throw Error(ErrorCode::InvalidArgument, "unknown tolerance " + name);
  return it->second;
}

void AcceptanceTolerances::set(const std::string& name, double value) {
  if (!values.count(name)) throw Error(ErrorCode::InvalidArgument, "unknown tolerance " + name);
  values[name] = value;
}

bool CriterionResult::pass() const { return error.empty() && all_pass(checks); }

std::string CriterionResult::line() const {
  std::ostringstream os;
  os << "criterion " << id << ' ' << (pass() ? "PASS" : "FAIL") << "  " << title;
  std::vector<std::string> failed;
  for (const Check& c : checks) {
    if (!c.pass) failed.push_back(c.name);
  }
  if (!failed.empty()) {
    os << "  (failed: ";
    for (std::size_t i = 0; i < failed.size(); ++i) os << (i ? ", " : "") << failed[i];
    os << ')';
  }
  if (!error.empty()) os << "  (error: " << error << ')';
  return os.str();
}

bool AcceptanceReport::pass() const {
  return std::all_of(criteria.begin(), criteria.end(),
                     [](const CriterionResult& c) { return c.pass(); });
}

std::size_t AcceptanceReport::check_count() const {
  std::size_t n = 0;
  for (const auto& c : criteria) n += c.checks.size();
  return n;
}

std::vector<int> AcceptanceReport::failed() const {
  std::vector<int> out;
  for (const auto& c : criteria) {
    if (!c.pass()) out.push_back(c.id);
  }
  return out;
}

nlohmann::json AcceptanceReport::to_json() const {
  nlohmann::json crit = nlohmann::json::array();
  for (const auto& c : criteria) {
    nlohmann::json j = verdict_json(c.checks);
    j["id"] = c.id;
    j["title"] = c.title;
    j["pass"] = c.pass();
    if (!c.error.empty()) j["error"] = c.error;
    crit.push_back(std::move(j));
  }
  return {{"schema_version", kReportSchemaVersion},
          {"seed", seed},
          {"criteria", crit},
          {"check_count", check_count()},
          {"failed", failed()},
          {"pass", pass()}};
}

HermitianOperator random_hermitian(Eigen::Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(d, d);
  for (Eigen::Index c = 0; c < d; ++c) {
    for (Eigen::Index r = 0; r < d; ++r) m(r, c) = Complex(normal(rng), normal(rng));
  }
  return HermitianOperator::symmetrized(m / std::sqrt(2.0 * static_cast<double>(d)));
}

HermitianOperator random_band_hermitian(Eigen::Index d, int offset, std::mt19937_64& rng) {
  if (offset < 1 || offset >= d) throw Error(ErrorCode::IndexOverflow, "band offset outside 1..d-1");
  const BandDecomposition full = band_split(random_hermitian(d, rng));
  BandDecomposition bd;
  bd.eps = full.eps;
  bd.bands[offset] = full.bands.at(offset);
  return band_assemble(bd);
}

namespace {

using Tol = AcceptanceTolerances;

double max_of(const std::vector<double>& xs) {
  double m = 0.0;
  for (double x : xs) m = std::max(m, x);
  return m;
}

std::vector<Check> prefixed(const std::string& prefix, const std::vector<Check>& checks) {
  std::vector<Check> out;
  for (Check c : checks) {
    c.name = prefix + "." + c.name;
    out.push_back(std::move(c));
  }
  return out;
}

FlowConfig sampled_config(double l_max, double dl, bool track_unitary) {
  FlowConfig cfg;
  cfg.integrator = ode::AdaptiveRk45{1e-11, 1e-14, 1e-14, 0.1};
  cfg.l_max = l_max;
  cfg.stop_offdiag = 0.0;
  cfg.sampling = SampleSpacing{dl};
  cfg.track_unitary = track_unitary;
  return cfg;
}

// Models shared by several criteria.
GhoSpec squeeze_spec() { return GhoSpec{1.0, 0.2, 0.0, 0.0, 30}; }
SpinSpec spin_spec() { return SpinSpec{0.5, Eigen::Vector3d(1.0, 0.0, 1.0) / std::sqrt(2.0)}; }
JcSpec jc_resonant() { return JcSpec{1.0, 1.0, 0.5, 4}; }
JcSpec jc_detuned() { return JcSpec{2.0, 1.0, 0.5, 4}; }

class Suite {
 public:
  explicit Suite(const AcceptanceOptions& options) : opt_(options), tol_(options.tolerances) {}

  CriterionResult run(int id) {
    CriterionResult r;
    r.id = id;
    try {
      switch (id) {
        case 1: r.title = "isospectral Wegner flow on random Hermitian matrices"; isospectral(r); break;
        case 2: r.title = "off-diagonal decay identity on single-band matrices"; decay(r); break;
        case 3: r.title = "band condition truth table"; condition_table(r); break;
        case 4: r.title = "Fubini-Study metric factors"; metrics(r); break;
        case 5: r.title = "reduced coefficient flow equations and phase constancy"; reduced(r); break;
        case 6: r.title = "geodesic verdicts and latitude counter-control"; geodesics(r); break;
        case 7: r.title = "case classification"; cases(r); break;
        case 8: r.title = "case-C coefficient proportionality"; proportionality(r); break;
        case 9: r.title = "degenerate fixed point stalls"; fixed_point(r); break;
        case 10: r.title = "generator consistency and the derivative relation"; identities(r); break;
        default: throw Error(ErrorCode::InvalidArgument, "no criterion " + std::to_string(id));
      }
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    return r;
  }

 private:
  double tol(const std::string& name) const { return tol_.at(name); }

  std::mt19937_64 rng(std::uint64_t stream) const { return std::mt19937_64(opt_.seed + stream); }

  const PipelineResult& pipeline(const std::string& name) {
    if (auto it = pipelines_.find(name); it != pipelines_.end()) return it->second;
    GeodesicCase c;
    c.name = name;
    if (name == "spin") {
      c.model = spin_spec();
      c.l_max = 60.0;
      c.sample_dl = 1e-3;
    } else if (name == "squeeze_n0" || name == "squeeze_n1") {
      c.model = squeeze_spec();
      c.base = name == "squeeze_n0" ? 0 : 1;
      c.l_max = 20.0;
      c.sample_dl = 5e-3;
    } else if (name == "jc_resonant" || name == "jc_detuned") {
      c.model = name == "jc_resonant" ? jc_resonant() : jc_detuned();
      c.l_max = 20.0;
      c.sample_dl = 5e-3;
    } else {
      throw Error(ErrorCode::InvalidArgument, "no pipeline case " + name);
    }
    PipelineTolerances pt;
    pt.geodesic = tol("c6.geodesic");
    pt.variational = tol("c6.variational");
    pt.xi_relative = tol("c6.xi_relative");
    pt.generator_consistency = tol("c10.consistency");
    return pipelines_.emplace(name, verify_geodesic(c, pt)).first->second;
  }

  // 1 ---------------------------------------------------------------------
  void isospectral(CriterionResult& r) {
    auto gen = rng(1);
    double eig_err = 0.0, tr_drift = 0.0, tr2_drift = 0.0;
    int converged = 0;
    constexpr int kCount = 20;
    for (int i = 0; i < kCount; ++i) {
      const HermitianOperator h0 = random_hermitian(8, gen);
      FlowConfig cfg;
      cfg.integrator = ode::AdaptiveRk45{1e-10, 1e-13, 1e-14, 1.0};
      cfg.l_max = 1e6;
      cfg.stop_offdiag = 1e-18;
      cfg.sampling = SampleEvery{200};
      const FlowTrajectory t = integrate_flow(h0, WegnerGenerator{}, cfg);
      if (t.stop_reason == StopReason::Converged) ++converged;
      RealVector diag = t.back().h.diagonal();
      std::sort(diag.begin(), diag.end());
      eig_err = std::max(eig_err, (diag - sorted_eigenvalues(h0)).cwiseAbs().maxCoeff());
      const double tr0 = t.front().trace_h, tr20 = t.front().trace_h2;
      const double scale = std::max(h0.frobenius_norm(), 1e-300);
      for (const FlowSample& s : t.samples) {
        tr_drift = std::max(tr_drift, std::abs(s.trace_h - tr0) / scale);
        tr2_drift = std::max(tr2_drift, std::abs(s.trace_h2 - tr20) / tr20);
      }
    }
    r.checks.push_back(Check::at_least("converged", converged, kCount,
                                       "flows reaching offdiag^2 <= 1e-18 (d = 8, 20 draws)"));
    r.checks.push_back(Check::at_most("eigenvalues", eig_err, tol("c1.eigenvalues"),
                                      "sorted diagonal vs direct diagonalization"));
    r.checks.push_back(Check::at_most("trace_drift", tr_drift, tol("c1.trace_drift"),
                                      "relative to ||H||_F"));
    r.checks.push_back(Check::at_most("trace2_drift", tr2_drift, tol("c1.trace2_drift"),
                                      "relative to Tr H^2"));
  }

  // 2 ---------------------------------------------------------------------
  void decay(CriterionResult& r) {
    auto gen = rng(1);  // the criterion 1 draws, restricted to band 1
    double worst = 0.0, trace_worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      const HermitianOperator h0 = random_band_hermitian(8, 1, gen);
      const FlowTrajectory t = integrate_flow(h0, BandGenerator{1}, sampled_config(4.0, 1e-3, false));
      const DecayIdentity d = decay_identity_residual(t);
      worst = std::max(worst, d.max_relative_decay_residual());
      const double scale = d.scale > 0.0 ? d.scale : 1.0;
      trace_worst = std::max(trace_worst, max_of(d.trace_residual) / scale);
    }
    r.checks.push_back(Check::at_most("decay_identity", worst, tol("c2.decay_identity"),
                                      "relative to max 4 sum (d eps)^2 |C|^2, dl = 1e-3"));
    r.checks.push_back(Check::at_most("trace_identity", trace_worst, tol("c2.decay_identity"),
                                      "d/dl offdiag^2 + d/dl sum eps^2"));
  }

  // 3 ---------------------------------------------------------------------
  void condition_table(CriterionResult& r) {
    struct Row {
      std::vector<int> bands;
      int a;
      bool expect;
    };
    const std::vector<Row> rows{{{1}, 1, true},    {{1, 2}, 1, false}, {{1, 3}, 1, false},
                                {{1, 4}, 1, true}, {{1, 4}, 2, true},  {{2, 5}, 2, true}};
    for (const Row& row : rows) {
      const bool got = band_condition(row.bands, row.a).holds;
      std::ostringstream name;
      name << "bands{";
      for (std::size_t i = 0; i < row.bands.size(); ++i) name << (i ? "," : "") << row.bands[i];
      name << "}_a" << row.a;
      r.checks.push_back(Check::boolean(name.str(), got == row.expect,
                                        std::string("expected ") + (row.expect ? "true" : "false")));
    }
  }

  // 4 ---------------------------------------------------------------------
  void metrics(CriterionResult& r) {
    auto point = [](std::initializer_list<double> xs) {
      RealVector v(static_cast<Eigen::Index>(xs.size()));
      Eigen::Index i = 0;
      for (double x : xs) v[i++] = x;
      return v;
    };
    auto worst_over = [](const ParametrizedFamily& f, const std::vector<RealVector>& pts,
                         const std::function<RealMatrix(const RealVector&)>& expected) {
      double worst = 0.0;
      for (const RealVector& p : pts) {
        worst = std::max(worst, (fs_metric(f, p).g - expected(p)).cwiseAbs().maxCoeff());
      }
      return worst;
    };

    {
      const ParametrizedFamily f = displacement_family(40, 0);
      const double err = worst_over(f, {point({0.0, 0.0}), point({0.3, -0.2}), point({-0.5, 0.4})},
                                    [](const RealVector&) { return RealMatrix(0.5 * RealMatrix::Identity(2, 2)); });
      r.checks.push_back(Check::at_most("displacement", err, tol("c4.displacement"), "g = I/2"));
    }
    for (int n : {0, 1, 2}) {
      const ParametrizedFamily f = squeeze_family(n, 60);
      const double factor = 0.5 * (n * n + n + 1);
      const double err = worst_over(
          f, {point({0.1, 0.0}), point({0.2, 0.7}), point({0.3, 1.9})}, [factor](const RealVector& p) {
            RealMatrix g = RealMatrix::Zero(2, 2);
            g(0, 0) = factor;
            g(1, 1) = factor * std::pow(std::sinh(2.0 * p[0]), 2);
            return g;
          });
      r.checks.push_back(Check::at_most("squeeze_n" + std::to_string(n), err, tol("c4.squeeze"),
                                        "factor (n^2+n+1)/2, r <= 0.3, n_max = 60"));
    }
    for (auto [s, m] : {std::pair{0.5, 0.5}, std::pair{1.0, 0.0}, std::pair{1.0, 1.0}}) {
      const ParametrizedFamily f = spin_family(s, m);
      const double factor = 0.5 * (s * s + s - m * m);
      const double err = worst_over(
          f, {point({0.4, 0.3}), point({1.1, 2.0}), point({2.0, 5.0})}, [factor](const RealVector& p) {
            RealMatrix g = RealMatrix::Zero(2, 2);
            g(0, 0) = factor;
            g(1, 1) = factor * std::pow(std::sin(p[0]), 2);
            return g;
          });
      std::ostringstream name;
      name << "spin_s" << s << "_m" << m;
      r.checks.push_back(Check::at_most(name.str(), err, tol("c4.spin"), "factor (s^2+s-m^2)/2"));
    }
    {
      const ParametrizedFamily f = jc_family(4, 0);
      const double err = worst_over(
          f, {point({0.3, 0.2, -0.5}), point({0.6, 1.0, 0.4}), point({0.9, -2.0, 3.0})},
          [](const RealVector& p) {
            const double a2 = p[0] * p[0];
            const double w = a2 * (1.0 - a2);
            RealMatrix g = RealMatrix::Zero(3, 3);
            g(0, 0) = 1.0 / (1.0 - a2);
            g(1, 1) = w;
            g(2, 2) = w;
            g(1, 2) = g(2, 1) = -w;
            return g;
          });
      r.checks.push_back(Check::at_most("jc", err, tol("c4.jc"),
                                        "d|a|^2/(1-|a|^2) + |a|^2(1-|a|^2)(d theta_a - d theta_g)^2"));
    }
  }

  // 5 ---------------------------------------------------------------------
  // max |dc/dl - rhs| / max |rhs| over the samples, five-point derivatives.
  static double ode_residual(const std::vector<double>& l, const std::vector<Complex>& c,
                             const std::vector<Complex>& rhs) {
    double worst = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < l.size(); ++k) {
      const Complex d = sample_derivative<Complex>(l, c, k);
      worst = std::max(worst, std::abs(d - rhs[k]));
      scale = std::max(scale, std::abs(rhs[k]));
    }
    return scale > 0.0 ? worst / scale : worst;
  }

  static double phase_drift(const std::vector<Complex>& c) {
    double worst = 0.0;
    for (const Complex& z : c) {
      if (std::abs(z) > 1e-250) worst = std::max(worst, std::abs(wrap_angle(std::arg(z) - std::arg(c[0]))));
    }
    return worst;
  }

  static double column_gap(const std::vector<Complex>& a, const std::vector<Complex>& b) {
    double worst = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a[k] - b[k]));
    return worst;
  }

  void reduced(CriterionResult& r) {
    {
      GhoSpec spec = squeeze_spec();
      spec.lambda = std::polar(0.2, 0.6);
      const FlowTrajectory t =
          integrate_flow(build_gho(spec), WegnerGenerator{}, sampled_config(2.0, 2.5e-3, false));
      const ReducedCoefficients c = extract_coefficients(t, spec);
      std::vector<Complex> rhs;
      for (std::size_t k = 0; k < c.l.size(); ++k) {
        const double w = c.at("omega")[k].real();
        rhs.push_back(-4.0 * w * w * c.at("lambda")[k]);
      }
      r.checks.push_back(Check::at_most("squeeze_lambda_ode", ode_residual(c.l, c.at("lambda"), rhs),
                                        tol("c5.squeeze_ode"), "d lambda/dl = -4 omega^2 lambda"));
      r.checks.push_back(Check::at_most("squeeze_lambda_phase", phase_drift(c.at("lambda")),
                                        tol("c5.phase_drift")));
      const ReducedCoefficients cf = closed_form_flow(spec, c.l);
      double gap = 0.0;
      for (const char* name : {"lambda", "omega", "nu"}) gap = std::max(gap, column_gap(c.at(name), cf.at(name)));
      r.checks.push_back(Check::at_most("squeeze_closed_form", gap, 1e-5,
                                        "lowest-row coefficients vs reduced ODEs"));
    }
    {
      SpinSpec spec{0.5, Eigen::Vector3d(0.6, 0.3, 0.8)};
      const FlowTrajectory t =
          integrate_flow(build_spin(spec), WegnerGenerator{}, sampled_config(30.0, 5e-3, false));
      const ReducedCoefficients c = extract_coefficients(t, spec);
      std::vector<Complex> rhs;
      for (std::size_t k = 0; k < c.l.size(); ++k) {
        const double bz = c.at("beta_z")[k].real();
        rhs.push_back(-bz * bz * c.at("beta")[k]);
      }
      r.checks.push_back(Check::at_most("spin_beta_ode", ode_residual(c.l, c.at("beta"), rhs),
                                        tol("c5.spin_ode"), "d beta/dl = -beta_z^2 beta"));
      r.checks.push_back(Check::at_most("spin_beta_phase", phase_drift(c.at("beta")), tol("c5.phase_drift")));
      const ReducedCoefficients cf = closed_form_flow(spec, c.l);
      const double gap = std::max(column_gap(c.at("beta"), cf.at("beta")),
                                  column_gap(c.at("beta_z"), cf.at("beta_z")));
      r.checks.push_back(Check::at_most("spin_closed_form", gap, 1e-6, "full matrix vs reduced ODEs"));
    }
    {
      const JcSpec spec = jc_detuned();
      const FlowTrajectory t =
          integrate_flow(build_jc(spec), WegnerGenerator{}, sampled_config(20.0, 5e-3, true));
      const CoordinateTrajectory coords = coordinate_projection(t, jc_family(spec.n_max, 0));
      double drift = 0.0;
      for (const RealVector& a : coords.alpha) {
        drift = std::max({drift, std::abs(wrap_angle(a[1] - coords.alpha.front()[1])),
                          std::abs(wrap_angle(a[2] - coords.alpha.front()[2]))});
      }
      r.checks.push_back(Check::at_most("jc_theta_phases", drift, tol("c5.phase_drift"),
                                        "theta_alpha, theta_gamma along the sector-0 flow"));
      const ReducedCoefficients c = extract_coefficients(t, spec, 0);
      const ReducedCoefficients cf = closed_form_flow(spec, c.l, 0);
      double gap = 0.0;
      for (const char* name : {"A", "B", "C"}) gap = std::max(gap, column_gap(c.at(name), cf.at(name)));
      r.checks.push_back(Check::at_most("jc_closed_form", gap, 1e-6, "sector 0 vs reduced ODEs"));
    }
  }

  // 6 ---------------------------------------------------------------------
  void geodesics(CriterionResult& r) {
    for (const char* name : {"spin", "squeeze_n0", "squeeze_n1", "jc_resonant", "jc_detuned"}) {
      for (Check& c : prefixed(name, pipeline(name).checks)) r.checks.push_back(std::move(c));
    }
    // theta = pi/4 latitude on the spin-1/2 sphere, traversed at constant speed
    const ParametrizedFamily f = spin_family(0.5, 0.5);
    std::vector<double> ls;
    for (int k = 0; k <= 400; ++k) ls.push_back(2.0 * k / 400.0);
    const auto traj = CoordinateTrajectory::from_curve(
        ls,
        [](double l) {
          RealVector a(2);
          a << std::numbers::pi / 4.0, l;
          return a;
        },
        [](double) {
          RealVector a(2);
          a << 0.0, 1.0;
          return a;
        });
    r.checks.push_back(Check::at_least("latitude.geodesic_residual", geodesic_residual(traj, f).max_abs(),
                                       tol("c6.counter_geodesic"), "must fail the geodesic test"));
    r.checks.push_back(Check::at_least("latitude.variational_gradient",
                                       variational_gradient(traj, f).max_abs(),
                                       tol("c6.counter_variational"), "must fail the variational test"));
  }

  // 7 ---------------------------------------------------------------------
  void cases(CriterionResult& r) {
    {
      const GhoSpec spec = squeeze_spec();
      const BandDecomposition bd = band_split(build_gho(spec));
      const auto rows = interior_indices(bd.dim());
      const Eigen::Index top = rows.back();
      bool all_c = true;
      double gap = 0.0;
      for (Eigen::Index n = 2; n + 2 <= top; ++n) {
        const CaseLabel c = case_classify(bd, n, 2);
        all_c = all_c && c.value == Case::C;
        gap = std::max(gap, c.gap);
      }
      r.checks.push_back(Check::boolean("squeeze_interior_case_c", all_c, "rows 2 .. top interior - 2"));
      r.checks.push_back(Check::at_most("squeeze_gap", gap, 0.0, "eps_{n+2} + eps_{n-2} - 2 eps_n"));
    }
    for (const JcSpec& spec : {jc_resonant(), jc_detuned()}) {
      const BandDecomposition bd = band_split(build_jc(spec));
      bool all_b = true;
      for (int n = 0; n < spec.n_max; ++n) all_b = all_b && case_classify(bd, 2 * n + 1, 1).value == Case::B;
      const std::string tag = spec.omega0 == spec.omega ? "jc_resonant" : "jc_detuned";
      r.checks.push_back(Check::boolean(tag + "_sectors_case_b", all_b, "base |e,n>, every sector"));
      r.checks.push_back(Check::boolean(tag + "_ground_case_a", case_classify(bd, 0, 1).value == Case::A,
                                        "|g,0> has no coupling"));
    }
  }

  // 8 ---------------------------------------------------------------------
  void proportionality(CriterionResult& r) {
    const GhoSpec spec = squeeze_spec();
    const FlowTrajectory t =
        integrate_flow(build_gho(spec), WegnerGenerator{}, sampled_config(3.0, 1e-2, false));
    for (Eigen::Index n : {2, 3}) {
      const auto ratio = [n](const FlowSample& s) {
        return std::abs(s.h(n + 2, n)) / std::abs(s.h(n, n - 2));
      };
      const double r0 = ratio(t.front());
      double drift = 0.0;
      for (const FlowSample& s : t.samples) {
        if (std::abs(s.h(n, n - 2)) > 1e-250) drift = std::max(drift, std::abs(ratio(s) / r0 - 1.0));
      }
      r.checks.push_back(Check::at_most("squeeze_ratio_n" + std::to_string(n), drift, tol("c8.ratio"),
                                        "|C_{n+2}|/|C_n| relative drift, n_max = 30 Fock truncation"));
    }
  }

  // 9 ---------------------------------------------------------------------
  void fixed_point(CriterionResult& r) {
    Matrix m(2, 2);
    m << 0.0, 1.0, 1.0, 0.0;
    FlowConfig cfg;
    cfg.l_max = 10.0;
    const FlowTrajectory t = integrate_flow(validate_hermitian(m, 0.0), WegnerGenerator{}, cfg);
    r.checks.push_back(Check::boolean("stalled", t.stop_reason == StopReason::Stalled,
                                      "stop_reason " + to_string(t.stop_reason)));
    r.checks.push_back(Check::at_most("eta_norm", t.back().eta_norm, tol("c9.eta")));
    r.checks.push_back(Check::at_least("offdiag_remaining", t.back().offdiag_sq, 1.0,
                                       "off-diagonal weight is left in place"));
  }

  // 10 --------------------------------------------------------------------
  void identities(CriterionResult& r) {
    for (const char* name : {"spin", "squeeze_n0"}) {
      const PipelineResult& p = pipeline(name);
      const ParametrizedFamily f = family_for(p.spec.model, p.spec.base);
      r.checks.push_back(Check::at_most(std::string(name) + ".generator_consistency", p.consistency.max(),
                                        tol("c10.consistency")));
      r.checks.push_back(Check::at_most(std::string(name) + ".generator_relation",
                                        generator_relation_residual(f, p.coords).max(), tol("c10.generator_relation")));
    }
  }

  const AcceptanceOptions& opt_;
  const AcceptanceTolerances& tol_;
  std::map<std::string, PipelineResult> pipelines_;
};

}  // namespace

AcceptanceReport run_acceptance(const AcceptanceOptions& options) {
  AcceptanceReport report;
  report.seed = options.seed;
  Suite suite(options);
  for (int id = 1; id <= 10; ++id) {
    if (!options.only.empty() && !options.only.count(id)) continue;
    report.criteria.push_back(suite.run(id));
  }
  return report;
}

}  // namespace wegnerflow
