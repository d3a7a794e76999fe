#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "wegnerflow/pipeline.hpp"
#include "wegnerflow/report.hpp"

using namespace wftest;

namespace {

const Check* find_check(const PipelineResult& r, const std::string& name) {
  for (const Check& c : r.checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

GeodesicCase spin_case() {
  GeodesicCase g;
  g.name = "spin";
  g.model = SpinSpec{0.5, Eigen::Vector3d(1.0, 0.0, 1.0) / std::numbers::sqrt2};
  g.base = 0;
  g.sample_dl = 1e-3;
  return g;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("spin-1/2 flow is a geodesic") {
  const PipelineResult r = verify_geodesic(spin_case());
  for (const Check& c : r.checks) {
    INFO(c.name << " " << c.max_residual << " / " << c.tolerance);
    CHECK(c.pass);
  }
  CHECK(r.family == "spin");
  CHECK(r.band == 1);
  CHECK(r.condition.holds);
  CHECK(r.geodesic.index.size() >= 200);
  CHECK(r.consistency.max() <= 1e-6);

  const nlohmann::json v = r.verdict();
  CHECK(v["pass"] == true);
  CHECK(v.contains("checks"));
}

TEST_CASE("flow speed equals the generator variance") {
  const PipelineResult r = verify_geodesic(spin_case());
  const ParametrizedFamily f = family_for(r.spec.model, r.spec.base);
  const ArcLength arc = arc_length(r.coords, f);
  const Vector& psi = f.base_state();
  double worst = 0.0;
  for (std::size_t k = 0; k < r.flow.samples.size() && k < arc.speed.size(); k += 97) {
    const HermitianOperator& h = r.flow.samples[k].h;
    const Matrix eta = wegner_generator(h).matrix();
    const Complex mean = psi.dot(eta * psi);
    const double var = -psi.dot(eta * eta * psi).real() - std::norm(mean);
    worst = std::max(worst, std::abs(arc.speed[k] - std::sqrt(std::max(var, 0.0))));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("resonant Jaynes-Cummings stalls and fails") {
  GeodesicCase g;
  g.name = "jc_resonant";
  g.model = JcSpec{1.0, 1.0, 0.5, 4};
  g.base = 1;
  g.sample_dl = 5e-3;
  const PipelineResult r = verify_geodesic(g);
  CHECK(r.flow.stop_reason == StopReason::Stalled);
  CHECK_FALSE(r.pass());
  const Check* c = find_check(r, "flow_converged");
  REQUIRE(c != nullptr);
  CHECK_FALSE(c->pass);
}

TEST_CASE("family_for picks the model family") {
  CHECK(family_for(GhoSpec{1.0, 0.0, Complex(0.2), 0.0, 30}, 0).name() == "displacement");
  CHECK(family_for(GhoSpec{1.0, Complex(0.2), 0.0, 0.0, 30}, 1).name() == "squeeze");
  CHECK(family_for(JcSpec{}, 1).k() == 3);
}

}  // TEST_SUITE

TEST_SUITE("report") {

TEST_CASE("format_double round-trips") {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) {
    CHECK(std::stod(format_double(x)) == x);
  }
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(std::nan("")) == "nan");
}

TEST_CASE("checks and verdicts") {
  const Check a = Check::at_most("a", 1e-7, 1e-6);
  const Check b = Check::at_least("b", 0.5, 1.0);
  const Check c = Check::boolean("c", true);
  CHECK(a.pass);
  CHECK_FALSE(b.pass);
  CHECK(c.pass);
  CHECK(all_pass({a, c}));
  CHECK_FALSE(all_pass({a, b, c}));

  const nlohmann::json v = verdict_json({a, b});
  CHECK(v["pass"] == false);
  CHECK(v["checks"].size() == 2);
  CHECK(to_json(a)["name"] == "a");
}

TEST_CASE("dump_json writes 17 significant digits") {
  const std::string s = dump_json(nlohmann::json{{"x", 0.1}});
  CHECK(s.find("0.10000000000000001") != std::string::npos);
}

}  // TEST_SUITE
