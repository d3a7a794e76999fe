#include <CLI11.hpp>

#include <iostream>

#include "commands.hpp"
#include "run_spec.hpp"
#include "wegnerflow/error.hpp"

using namespace wegnerflow;
using namespace wegnerflow::cli;

namespace {

bool integrator_error(ErrorCode code) {
  return code == ErrorCode::IntegratorFailure || code == ErrorCode::UnitarityDrift;
}

template <class F>
int guarded(F&& f) {
  try {
    return f();
  } catch (const SpecError& e) {
    std::cerr << "spec error: " << e.what() << '\n';
    return kSpecError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return integrator_error(e.code()) ? kIntegratorFailure : kCheckError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kCheckError;
  }
}

void add_common(CLI::App* sub, CommonArgs& args) {
  sub->add_option("--spec", args.spec, "run spec JSON")->required()->check(CLI::ExistingFile);
  sub->add_option("--out", args.out, "output directory")->required();
  sub->add_option("--seed", args.seed, "seed for random inputs");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wegner flow equations and Fubini-Study geodesic checks"};
  app.require_subcommand(1);

  CommonArgs flow_args, metric_args, geodesic_args;
  auto* flow = app.add_subcommand("flow", "integrate a flow, write trajectory.csv and summary.json");
  add_common(flow, flow_args);
  auto* metric = app.add_subcommand("metric", "Fubini-Study metric on points of a unitary family");
  add_common(metric, metric_args);
  auto* geodesic = app.add_subcommand("geodesic", "run the geodesic verification chain, write verdict.json");
  add_common(geodesic, geodesic_args);

  ConditionArgs cond_args;
  auto* condition = app.add_subcommand("condition", "evaluate the band condition");
  condition->add_option("--spec", cond_args.spec, "JSON {\"bands\": [...], \"a\": label}")
      ->check(CLI::ExistingFile);
  condition->add_option("--bands", cond_args.bands, "comma-separated band offsets");
  condition->add_option("--a", cond_args.label, "1-based label of the band in ascending order");
  condition->add_option("--offset", cond_args.offset, "the band addressed by its offset i_a");
  condition->add_option("--out", cond_args.out, "also write condition.json here");

  VerifyArgs verify_args;
  auto* verify = app.add_subcommand("verify-all", "run the acceptance suite");
  verify->add_option("--out", verify_args.out, "write report.json and meta.json here");
  auto* seed_opt = verify->add_option("--seed", verify_args.seed, "seed for the random ensembles");
  verify->add_option("--only", verify_args.only, "criteria to run")->delimiter(',');
  verify->add_option("--set-tolerance", verify_args.tolerance_overrides,
                     "override a tolerance, name=value (harness testing)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kSpecError;
  }

  if (*flow) return guarded([&] { return cmd_flow(flow_args); });
  if (*metric) return guarded([&] { return cmd_metric(metric_args); });
  if (*geodesic) return guarded([&] { return cmd_geodesic(geodesic_args); });
  if (*condition) {
    return guarded([&] {
      if (!cond_args.spec && cond_args.bands.empty()) throw SpecError("give --bands or --spec");
      return cmd_condition(cond_args);
    });
  }
  verify_args.seed_given = seed_opt->count() > 0;
  return guarded([&] { return cmd_verify_all(verify_args); });
}
