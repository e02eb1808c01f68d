#pragma once

// Subcommand bodies behind the nvghz executable.  Each returns the process exit code:
// 0 success, 1 failed validation, 2 config error, 3 physics or dimension error,
// 4 propagation failure.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nvghz/config.hpp"

namespace nvghz {

enum ExitCode : int {
  kExitOk = 0,
  kExitValidationFailed = 1,
  kExitConfig = 2,
  kExitPhysics = 3,
  kExitPropagation = 4,
};

struct CommandOptions {
  std::optional<std::string> config_path;
  std::optional<std::string> preset;
  std::string out_dir = ".";
  int jobs = 1;
  std::string level = "fast";
  bool tamper_eta = false;   // validate: scale eta by 1.01 in the analytic side of the propagator check
  std::ostream* out = nullptr;   // defaults to std::cout
  std::ostream* err = nullptr;   // defaults to std::cerr
};

// Resolves --preset / --config into a RunConfig; throws ConfigError when neither is given.
RunConfig resolve_config(const CommandOptions& options);

// Maps the library's exception types onto exit codes and prints the message.
int report_exception(std::ostream& err);

int cmd_simulate(const CommandOptions& options);
int cmd_sweep(const CommandOptions& options);
int cmd_validate(const CommandOptions& options);
int cmd_budget(const CommandOptions& options);

// Building blocks, exposed for tests.
nlohmann::json summary_json(const RunConfig& config, const GateReport& report);
nlohmann::json budget_json(const BudgetReport& budget);
std::string trajectory_csv(const GateReport& report);
// "%.17g"
std::string format_number(double value);
// RFC 4180 quoting: fields containing a comma, quote or line break are quoted.
std::string csv_field(const std::string& text);

struct CheckResult {
  std::string name;
  double measured = 0.0;
  double threshold = 0.0;
  std::string relation;   // "<=" or ">="
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

// Every invariant check of the selected level ("fast" or "full").
std::vector<CheckResult> run_validation(const std::string& level, bool tamper_eta = false);

}  // namespace nvghz
