#pragma once

// Run configuration: JSON parsing with a closed key vocabulary, bundled presets and the
// fully resolved form embedded in every summary.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nvghz/engine.hpp"
#include "nvghz/model.hpp"
#include "nvghz/protocol.hpp"

namespace nvghz {

// One sweep axis.  `parameter` is one of sweep_parameters().
struct SweepAxis {
  std::string parameter;
  std::vector<double> values;
};

const std::vector<std::string>& sweep_parameters();

// Settings left unset are derived from the run's parameters (see resolved_settings).
struct SettingsOverrides {
  std::optional<double> rel_tol;
  std::optional<double> abs_tol;
  std::optional<double> max_step;
  std::optional<double> min_step;
  std::optional<double> norm_tolerance;
  std::optional<double> top_fock_alarm;
};

struct RunConfig {
  SimParams params;
  SourceModel source = SourceModel::Effective;
  ProtocolOptions options;
  SettingsOverrides settings;
  std::vector<SweepAxis> sweep;
  std::string preset;          // empty when none was applied
  std::uint64_t seed = 0;

  PropagationSettings resolved_settings() const;
  // Copy with one sweep parameter set.  "Omega_over_delta" sets Omega = value * delta.
  RunConfig with_parameter(const std::string& parameter, double value) const;
};

const std::vector<std::string>& preset_names();
// Throws ConfigError for an unknown name.
RunConfig preset_config(const std::string& name);

// Keys not in the vocabulary, wrong JSON types and malformed sweeps throw ConfigError.
// Physics constraints (delta > 0, ...) are left to SimParams::validate.
// A "preset" key in the document, or `preset_override`, seeds the defaults.
RunConfig parse_config(const nlohmann::json& doc, const std::string& preset_override = "");
RunConfig load_config(const std::string& path, const std::string& preset_override = "");

// Every field materialized, settings included.
nlohmann::json to_json(const RunConfig& config);

SourceModel parse_source(const std::string& name);
CavityDisposal parse_disposal(const std::string& name);

}  // namespace nvghz
