#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <nlohmann/json.hpp>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

// Runs the CLI with stdout captured (stderr merged).
Run run(const std::string& args) {
  const std::string cmd = std::string(WEGNERFLOW_CLI) + " " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t n = 0;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::path(WEGNERFLOW_TEST_TMP) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_spec(const fs::path& dir, const nlohmann::json& doc) {
  const fs::path p = dir / "spec.json";
  std::ofstream(p) << doc.dump(2);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

nlohmann::json two_by_two() {
  return {{"matrix", {{"dim", 2}, {"entries", {{1.0, 0.5}, {0.5, 0.0}}}}},
          {"generator", "wegner"},
          {"flow", {{"l_max", 50.0}, {"sample_dl", 0.1}}}};
}

}  // namespace

TEST_CASE("condition examples") {
  CHECK(run("condition --bands 1,4 --a 1").out.rfind("true", 0) == 0);
  CHECK(run("condition --bands 1,4 --a 2").out.rfind("true", 0) == 0);
  CHECK(run("condition --bands 2,5 --offset 2").out.rfind("true", 0) == 0);

  const Run r12 = run("condition --bands 1,2 --a 1");
  CHECK(r12.code == 0);
  CHECK(r12.out.rfind("false", 0) == 0);
  CHECK(run("condition --bands 1,3 --a 1").out.rfind("false", 0) == 0);
}

TEST_CASE("malformed arguments exit 2") {
  CHECK(run("condition --bands 1,x --a 1").code == 2);
  CHECK(run("condition --bands 1,4 --a 3").code == 2);
  CHECK(run("nosuchcommand").code == 2);
}

TEST_CASE("flow on a 2x2 matrix") {
  const fs::path dir = scratch("flow2");
  const Run r = run("flow --spec " + write_spec(dir, two_by_two()).string() + " --out " + (dir / "out").string());
  REQUIRE(r.code == 0);
  const auto summary = nlohmann::json::parse(slurp(dir / "out" / "summary.json"));
  CHECK(summary["schema_version"] == 1);
  CHECK(summary["eigenvalue_match_error"].get<double>() < 1e-8);
  CHECK(fs::exists(dir / "out" / "trajectory.csv"));
  CHECK(fs::exists(dir / "out" / "meta.json"));
}

TEST_CASE("outputs are deterministic apart from meta.json") {
  const fs::path dir = scratch("determinism");
  nlohmann::json spec = {{"random", {{"dim", 6}}},
                         {"generator", "wegner"},
                         {"flow", {{"l_max", 5.0}, {"sample_dl", 0.5}}}};
  const std::string s = write_spec(dir, spec).string();
  REQUIRE(run("flow --spec " + s + " --out " + (dir / "a").string() + " --seed 7").code == 0);
  REQUIRE(run("flow --spec " + s + " --out " + (dir / "b").string() + " --seed 7").code == 0);
  for (const auto& entry : fs::recursive_directory_iterator(dir / "a")) {
    if (!entry.is_regular_file() || entry.path().filename() == "meta.json") continue;
    const fs::path other = dir / "b" / fs::relative(entry.path(), dir / "a");
    INFO(entry.path());
    CHECK(slurp(entry.path()) == slurp(other));
  }
  REQUIRE(run("flow --spec " + s + " --out " + (dir / "c").string() + " --seed 8").code == 0);
  CHECK(slurp(dir / "a" / "trajectory.csv") != slurp(dir / "c" / "trajectory.csv"));
}

TEST_CASE("spec errors exit 2") {
  const fs::path dir = scratch("bad");
  nlohmann::json not_hermitian = two_by_two();
  not_hermitian["matrix"]["entries"] = {{1.0, 0.5}, {0.0, 0.0}};
  CHECK(run("flow --spec " + write_spec(dir, not_hermitian).string() + " --out " + (dir / "o").string()).code == 2);

  nlohmann::json missing_band = two_by_two();
  missing_band["generator"] = {{"band", 3}};
  CHECK(run("flow --spec " + write_spec(dir, missing_band).string() + " --out " + (dir / "o").string()).code == 2);

  nlohmann::json two_sources = two_by_two();
  two_sources["random"] = {{"dim", 3}};
  CHECK(run("flow --spec " + write_spec(dir, two_sources).string() + " --out " + (dir / "o").string()).code == 2);
}

TEST_CASE("integrator failure exits 3") {
  const fs::path dir = scratch("blowup");
  nlohmann::json spec = {{"model", {{"model", "jc"}, {"omega0", 2.0}, {"omega", 1.0}, {"kappa", 0.5}, {"n_max", 4}}},
                         {"generator", "wegner"},
                         {"flow", {{"l_max", 100.0}, {"track_unitary", true},
                                   {"integrator", {{"kind", "rk4"}, {"step", 10.0}}}}}};
  CHECK(run("flow --spec " + write_spec(dir, spec).string() + " --out " + (dir / "o").string()).code == 3);
}

TEST_CASE("geodesic verdict for spin-1/2") {
  const fs::path dir = scratch("spin");
  nlohmann::json spec = {{"name", "spin"},
                         {"model", {{"model", "spin"}, {"s", 0.5}, {"b_field", {0.70710678118654757, 0.0, 0.70710678118654757}}}},
                         {"base", 0},
                         {"sample_dl", 1e-3}};
  const Run r = run("geodesic --spec " + write_spec(dir, spec).string() + " --out " + (dir / "o").string());
  CHECK(r.code == 0);
  const auto verdict = nlohmann::json::parse(slurp(dir / "o" / "verdict.json"));
  CHECK(verdict["pass"] == true);
  CHECK(fs::exists(dir / "o" / "coords.csv"));
}

TEST_CASE("verify-all reports a corrupted tolerance") {
  CHECK(run("verify-all --only 3").code == 0);
  const Run bad = run("verify-all --only 9 --set-tolerance c9.eta=-1");
  INFO(bad.out);
  CHECK(bad.code == 1);
  CHECK(bad.out.find("criterion 9 FAIL") != std::string::npos);
  CHECK(bad.out.find("eta_norm") != std::string::npos);
  CHECK(run("verify-all --only 9 --set-tolerance no.such=1").code == 2);
}
