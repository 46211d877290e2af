// fairflow <command> --config run.json [--threads N]

#include <CLI11.hpp>

#include "fairflow/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Individual-fairness auditing via gradient-flow attacks"};
  app.require_subcommand(1);
  std::string config;
  std::size_t threads = 1;
  app.add_option("--threads", threads, "worker threads for per-sample and per-cell work")
      ->check(CLI::PositiveNumber);

  const std::vector<std::pair<std::string, std::string>> commands{
      {"split", "seeded train/audit split of a CSV"},
      {"train", "fit a logistic or MLP classifier"},
      {"metric", "build or learn a fair metric"},
      {"audit", "run the attack and both tests; exit 3 on reject"},
      {"simulate", "draw the two-group synthetic dataset"},
      {"sweep", "T_n over the (theta1, theta2) grid"},
      {"stopping-sweep", "T_n as a function of the attack horizon"},
      {"robustness", "ratio gaps under metric perturbation"},
      {"calibrate", "Monte-Carlo coverage, type I error and power"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("-c,--config", config, "JSON config file")->required();
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : fairflow::exit_code::config;
  }
  const std::string name = app.get_subcommands().front()->get_name();
  return fairflow::run_command(name, config, {threads, &std::cout});
}
