#include "nvghz/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "nvghz/error.hpp"

namespace nvghz {

using nlohmann::json;

namespace {

constexpr double kPresetEta = kTwoPi * 0.05;

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

double get_real(const json& obj, const char* key, const std::string& where) {
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError("'" + where + key + "' must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError("'" + where + key + "' must be finite");
  return x;
}

int get_int(const json& obj, const char* key) {
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(std::string("'") + key + "' must be an integer");
  return v.get<int>();
}

bool get_bool(const json& obj, const char* key) {
  const json& v = obj.at(key);
  if (!v.is_boolean()) throw ConfigError(std::string("'") + key + "' must be true or false");
  return v.get<bool>();
}

std::string get_string(const json& obj, const char* key) {
  const json& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(std::string("'") + key + "' must be a string");
  return v.get<std::string>();
}

void read_real(const json& obj, const char* key, double& out, const std::string& where = "") {
  if (obj.contains(key)) out = get_real(obj, key, where);
}

void read_optional(const json& obj, const char* key, std::optional<double>& out, const std::string& where = "") {
  if (!obj.contains(key)) return;
  if (obj.at(key).is_null()) {
    out.reset();
    return;
  }
  out = get_real(obj, key, where);
}

SweepAxis parse_axis(const json& entry) {
  if (!entry.is_object()) throw ConfigError("sweep entries must be objects");
  reject_unknown(entry, {"parameter", "values", "start", "stop", "steps"}, "sweep axis");
  if (!entry.contains("parameter")) throw ConfigError("sweep axis needs 'parameter'");
  SweepAxis axis;
  axis.parameter = get_string(entry, "parameter");
  const auto& names = sweep_parameters();
  if (std::find(names.begin(), names.end(), axis.parameter) == names.end()) {
    throw ConfigError("unknown sweep parameter '" + axis.parameter + "'");
  }
  const bool listed = entry.contains("values");
  const bool ranged = entry.contains("start") || entry.contains("stop") || entry.contains("steps");
  if (listed == ranged) throw ConfigError("sweep axis '" + axis.parameter + "' needs either 'values' or start/stop/steps");
  if (listed) {
    const json& values = entry.at("values");
    if (!values.is_array() || values.empty()) throw ConfigError("sweep 'values' must be a non-empty array");
    for (const json& v : values) {
      if (!v.is_number() || !std::isfinite(v.get<double>())) throw ConfigError("sweep values must be finite numbers");
      axis.values.push_back(v.get<double>());
    }
  } else {
    for (const char* key : {"start", "stop", "steps"}) {
      if (!entry.contains(key)) throw ConfigError(std::string("sweep range needs '") + key + "'");
    }
    const double start = get_real(entry, "start", "sweep.");
    const double stop = get_real(entry, "stop", "sweep.");
    const int steps = get_int(entry, "steps");
    if (steps < 1) throw ConfigError("sweep 'steps' must be >= 1");
    for (int i = 0; i < steps; ++i) {
      axis.values.push_back(steps == 1 ? start : start + (stop - start) * i / (steps - 1));
    }
  }
  return axis;
}

RunConfig base_config() {
  RunConfig c;
  c.params.n_qubits = 2;
  c.params.eta = kPresetEta;
  c.params.delta = 2.0 * kPresetEta;
  c.params.Omega = 0.0;
  c.params.n_max = 12;
  return c;
}

}  // namespace

const std::vector<std::string>& sweep_parameters() {
  static const std::vector<std::string> names = {"n_qubits", "eta",     "delta",        "Omega",      "Omega_over_delta",
                                                 "phi",      "n_max",   "n_bar",        "k",          "initial_fock"};
  return names;
}

PropagationSettings RunConfig::resolved_settings() const {
  PropagationSettings s = PropagationSettings::defaults_for(params);
  if (settings.rel_tol) s.rel_tol = *settings.rel_tol;
  if (settings.abs_tol) s.abs_tol = *settings.abs_tol;
  if (settings.max_step) s.max_step = *settings.max_step;
  if (settings.min_step) s.min_step = *settings.min_step;
  if (settings.norm_tolerance) s.norm_tolerance = *settings.norm_tolerance;
  if (settings.top_fock_alarm) s.top_fock_alarm = *settings.top_fock_alarm;
  return s;
}

RunConfig RunConfig::with_parameter(const std::string& parameter, double value) const {
  RunConfig c = *this;
  const auto as_int = [&](const char* name) {
    if (value != std::floor(value)) throw ConfigError(std::string("sweep value for '") + name + "' must be an integer");
    return static_cast<int>(value);
  };
  if (parameter == "n_qubits") {
    c.params.n_qubits = as_int("n_qubits");
  } else if (parameter == "eta") {
    c.params.eta = value;
  } else if (parameter == "delta") {
    c.params.delta = value;
  } else if (parameter == "Omega") {
    c.params.Omega = value;
  } else if (parameter == "Omega_over_delta") {
    c.params.Omega = value * c.params.delta;
  } else if (parameter == "phi") {
    c.params.phi = value;
  } else if (parameter == "n_max") {
    c.params.n_max = as_int("n_max");
  } else if (parameter == "n_bar") {
    c.params.n_bar = value;
  } else if (parameter == "k") {
    c.options.k = as_int("k");
  } else if (parameter == "initial_fock") {
    c.options.initial_fock = as_int("initial_fock");
  } else {
    throw ConfigError("unknown sweep parameter '" + parameter + "'");
  }
  return c;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"paper_n2", "paper_n4"};
  return names;
}

RunConfig preset_config(const std::string& name) {
  if (name != "paper_n2" && name != "paper_n4") throw ConfigError("unknown preset '" + name + "'");
  RunConfig c = base_config();
  c.preset = name;
  c.source = SourceModel::FullDriven;
  c.params.n_qubits = name == "paper_n2" ? 2 : 4;
  // n_max keeps the |n_max> population below the truncation alarm for the driven model
  c.params.n_max = name == "paper_n2" ? 18 : 32;
  c.params.eta = kPresetEta;
  c.params.delta = 2.0 * c.params.eta;
  c.params.Omega = 6.0 * c.params.delta;
  c.params.n_bar = 0.0;
  c.params.lambda = LambdaParams::from_detunings(kTwoPi * 1.0, kTwoPi * 0.5, kTwoPi * 20.0, c.params.delta);
  c.params.gamma0 = kTwoPi * 0.083;
  c.params.quality_factor = 1e9;
  c.params.wavelength_nm = 637.0;
  return c;
}

SourceModel parse_source(const std::string& name) {
  if (name == "full") return SourceModel::FullDriven;
  if (name == "effective") return SourceModel::Effective;
  throw ConfigError("'source' must be \"full\" or \"effective\", got \"" + name + "\"");
}

CavityDisposal parse_disposal(const std::string& name) {
  if (name == "trace") return CavityDisposal::Trace;
  if (name == "project") return CavityDisposal::Project;
  throw ConfigError("'cavity_disposal' must be \"trace\" or \"project\", got \"" + name + "\"");
}

RunConfig parse_config(const json& doc, const std::string& preset_override) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(doc,
                 {"n_qubits", "eta", "eta_per_qubit", "delta", "Omega", "phi", "n_max", "n_bar", "source", "k", "echo",
                  "cavity_disposal", "initial_fock", "samples", "fit_angle", "lambda", "gamma0", "quality_factor",
                  "wavelength_nm", "settings", "sweep", "preset", "seed"},
                 "config");

  std::string preset = preset_override;
  if (preset.empty() && doc.contains("preset") && !doc.at("preset").is_null()) preset = get_string(doc, "preset");
  RunConfig c = preset.empty() ? base_config() : preset_config(preset);

  SimParams& p = c.params;
  if (doc.contains("n_qubits")) p.n_qubits = get_int(doc, "n_qubits");
  read_real(doc, "eta", p.eta);
  if (doc.contains("eta_per_qubit")) {
    const json& list = doc.at("eta_per_qubit");
    if (!list.is_array()) throw ConfigError("'eta_per_qubit' must be an array");
    p.eta_per_qubit.clear();
    for (const json& v : list) {
      if (!v.is_number()) throw ConfigError("'eta_per_qubit' entries must be numbers");
      p.eta_per_qubit.push_back(v.get<double>());
    }
  }
  read_real(doc, "delta", p.delta);
  read_real(doc, "Omega", p.Omega);
  read_real(doc, "phi", p.phi);
  if (doc.contains("n_max")) p.n_max = get_int(doc, "n_max");
  read_real(doc, "n_bar", p.n_bar);
  if (doc.contains("source")) c.source = parse_source(get_string(doc, "source"));
  if (doc.contains("k")) c.options.k = get_int(doc, "k");
  if (doc.contains("echo")) c.options.echo = get_bool(doc, "echo");
  if (doc.contains("cavity_disposal")) c.options.disposal = parse_disposal(get_string(doc, "cavity_disposal"));
  if (doc.contains("initial_fock")) c.options.initial_fock = get_int(doc, "initial_fock");
  if (doc.contains("samples")) c.options.samples = get_int(doc, "samples");
  if (doc.contains("fit_angle")) c.options.fit_angle = get_bool(doc, "fit_angle");

  if (doc.contains("lambda")) {
    const json& lam = doc.at("lambda");
    if (lam.is_null()) {
      p.lambda.reset();
    } else {
      if (!lam.is_object()) throw ConfigError("'lambda' must be an object");
      reject_unknown(lam, {"G", "Omega_L", "Delta", "delta", "omega_c"}, "lambda");
      double g = 0.0, omega_l = 0.0, big = 0.0, small = p.delta, omega_c = 0.0;
      if (p.lambda) {
        g = p.lambda->site(0).G;
        omega_l = p.lambda->site(0).Omega_L;
        big = p.lambda->Delta(0);
        small = p.lambda->delta(0);
        omega_c = p.lambda->omega_c;
      }
      for (const char* key : {"G", "Omega_L", "Delta"}) {
        if (!p.lambda && !lam.contains(key)) throw ConfigError(std::string("'lambda.") + key + "' is required");
      }
      read_real(lam, "G", g, "lambda.");
      read_real(lam, "Omega_L", omega_l, "lambda.");
      read_real(lam, "Delta", big, "lambda.");
      read_real(lam, "delta", small, "lambda.");
      read_real(lam, "omega_c", omega_c, "lambda.");
      p.lambda = LambdaParams::from_detunings(g, omega_l, big, small, omega_c);
    }
  }
  read_optional(doc, "gamma0", p.gamma0);
  read_optional(doc, "quality_factor", p.quality_factor);
  read_optional(doc, "wavelength_nm", p.wavelength_nm);

  if (doc.contains("settings")) {
    const json& s = doc.at("settings");
    if (!s.is_object()) throw ConfigError("'settings' must be an object");
    reject_unknown(s, {"rel_tol", "abs_tol", "max_step", "min_step", "norm_tolerance", "top_fock_alarm"}, "settings");
    read_optional(s, "rel_tol", c.settings.rel_tol, "settings.");
    read_optional(s, "abs_tol", c.settings.abs_tol, "settings.");
    read_optional(s, "max_step", c.settings.max_step, "settings.");
    read_optional(s, "min_step", c.settings.min_step, "settings.");
    read_optional(s, "norm_tolerance", c.settings.norm_tolerance, "settings.");
    read_optional(s, "top_fock_alarm", c.settings.top_fock_alarm, "settings.");
  }

  if (doc.contains("sweep")) {
    const json& sweep = doc.at("sweep");
    if (!sweep.is_array()) throw ConfigError("'sweep' must be an array of axes");
    c.sweep.clear();
    for (const json& entry : sweep) c.sweep.push_back(parse_axis(entry));
  }
  if (doc.contains("seed")) {
    const json& v = doc.at("seed");
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      throw ConfigError("'seed' must be a non-negative integer");
    }
    c.seed = v.get<std::uint64_t>();
  }
  return c;
}

RunConfig load_config(const std::string& path, const std::string& preset_override) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(doc, preset_override);
}

json to_json(const RunConfig& c) {
  const SimParams& p = c.params;
  json out;
  out["preset"] = c.preset.empty() ? json(nullptr) : json(c.preset);
  out["n_qubits"] = p.n_qubits;
  out["eta"] = p.eta;
  out["eta_per_qubit"] = p.eta_per_qubit;
  out["delta"] = p.delta;
  out["Omega"] = p.Omega;
  out["phi"] = p.phi;
  out["n_max"] = p.n_max;
  out["n_bar"] = p.n_bar;
  out["source"] = to_string(c.source);
  out["k"] = c.options.k;
  out["echo"] = c.options.echo;
  out["cavity_disposal"] = to_string(c.options.disposal);
  out["initial_fock"] = c.options.initial_fock;
  out["samples"] = c.options.samples;
  out["fit_angle"] = c.options.fit_angle;
  if (p.lambda) {
    out["lambda"] = {{"G", p.lambda->site(0).G},
                     {"Omega_L", p.lambda->site(0).Omega_L},
                     {"Delta", p.lambda->Delta(0)},
                     {"delta", p.lambda->delta(0)},
                     {"omega_c", p.lambda->omega_c}};
  } else {
    out["lambda"] = nullptr;
  }
  const auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  out["gamma0"] = opt(p.gamma0);
  out["quality_factor"] = opt(p.quality_factor);
  out["wavelength_nm"] = opt(p.wavelength_nm);

  const PropagationSettings s = c.resolved_settings();
  out["settings"] = {{"rel_tol", s.rel_tol},
                     {"abs_tol", s.abs_tol},
                     {"max_step", s.max_step},
                     {"min_step", s.min_step},
                     {"norm_tolerance", s.norm_tolerance},
                     {"top_fock_alarm", s.top_fock_alarm}};
  json axes = json::array();
  for (const SweepAxis& axis : c.sweep) axes.push_back({{"parameter", axis.parameter}, {"values", axis.values}});
  out["sweep"] = axes;
  out["seed"] = c.seed;
  return out;
}

}  // namespace nvghz
