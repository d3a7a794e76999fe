// Runs the acceptance criteria and prints one line per criterion. Exit code
// is 0 only when every selected criterion passes.
#include <CLI11.hpp>

#include <iostream>
#include <set>

#include "wegnerflow/acceptance.hpp"

int main(int argc, char** argv) {
  CLI::App app{"wegnerflow acceptance suite"};
  wegnerflow::AcceptanceOptions options;
  std::vector<int> only;
  app.add_option("--only", only, "criteria to run (1..10)")->delimiter(',')->check(CLI::Range(1, 10));
  app.add_option("--seed", options.seed, "seed for the random ensembles");
  CLI11_PARSE(app, argc, argv);
  options.only = std::set<int>(only.begin(), only.end());

  const wegnerflow::AcceptanceReport report = wegnerflow::run_acceptance(options);
  for (const auto& c : report.criteria) {
    std::cout << c.line() << '\n';
    if (!c.error.empty()) std::cout << "  error: " << c.error << '\n';
  }
  std::cout << report.check_count() << " checks, seed " << report.seed << '\n';
  return report.pass() ? 0 : 1;
}
