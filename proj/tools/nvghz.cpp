#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "nvghz/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"GHZ-state preparation simulator for NV centers coupled to a cavity mode"};
  app.require_subcommand(1);

  nvghz::CommandOptions options;
  std::string config_path;
  std::string preset;

  const auto add_run_flags = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON run configuration");
    cmd->add_option("--preset", preset, "bundled preset (paper_n2, paper_n4)");
    cmd->add_option("--out", options.out_dir, "output directory")->capture_default_str();
  };

  CLI::App* simulate = app.add_subcommand("simulate", "run one protocol and write trajectory.csv, summary.json");
  add_run_flags(simulate);
  CLI::App* sweep = app.add_subcommand("sweep", "run a 1- or 2-axis parameter grid and write sweep.csv");
  add_run_flags(sweep);
  sweep->add_option("--jobs", options.jobs, "parallel grid points")->capture_default_str()->check(CLI::PositiveNumber);
  CLI::App* budget = app.add_subcommand("budget", "decoherence budget, written to budget.json");
  add_run_flags(budget);
  CLI::App* validate = app.add_subcommand("validate", "run the invariant checks and print a pass/fail table");
  validate->add_option("--level", options.level, "fast or full")
      ->capture_default_str()
      ->check(CLI::IsMember({"fast", "full"}));
  validate->add_flag("--tamper-eta", options.tamper_eta, "scale eta by 1.01 on the analytic side of the propagator check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : nvghz::kExitConfig;
  }

  if (!config_path.empty()) options.config_path = config_path;
  if (!preset.empty()) options.preset = preset;

  if (simulate->parsed()) return nvghz::cmd_simulate(options);
  if (sweep->parsed()) return nvghz::cmd_sweep(options);
  if (budget->parsed()) return nvghz::cmd_budget(options);
  return nvghz::cmd_validate(options);
}
