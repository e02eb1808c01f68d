#include "nvghz/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "nvghz/error.hpp"

namespace nvghz {

using nlohmann::json;

namespace {

std::ostream& out_of(const CommandOptions& o) { return o.out ? *o.out : std::cout; }
std::ostream& err_of(const CommandOptions& o) { return o.err ? *o.err : std::cerr; }

std::filesystem::path prepare_out_dir(const std::string& dir) {
  std::filesystem::path path(dir.empty() ? "." : dir);
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) throw ConfigError("cannot create output directory '" + path.string() + "': " + ec.message());
  return path;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw ConfigError("cannot write '" + path.string() + "'");
  file << text;
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
  return out;
}

GateReport run_config(const RunConfig& config) {
  return run_ghz_protocol(config.params, config.source, config.resolved_settings(), config.options);
}

}  // namespace

std::string format_number(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\r\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

RunConfig resolve_config(const CommandOptions& options) {
  const std::string preset = options.preset.value_or("");
  if (options.config_path) return load_config(*options.config_path, preset);
  if (!preset.empty()) return preset_config(preset);
  throw ConfigError("no configuration given: pass --config <path> or --preset <name>");
}

int report_exception(std::ostream& err) {
  try {
    throw;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const json::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const PhysicsError& e) {
    err << "physics error: " << e.what() << "\n";
    return kExitPhysics;
  } catch (const DimensionError& e) {
    err << "dimension error: " << e.what() << "\n";
    return kExitPhysics;
  } catch (const PropagationError& e) {
    err << "propagation error: " << e.what() << "\n";
    return kExitPropagation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitPropagation;
  }
}

json budget_json(const BudgetReport& b) {
  const auto mhz = [](double rate) { return rate / kTwoPi * 1e3; };
  json out;
  out["eta"] = b.eta;
  out["eta_far_detuned"] = b.eta_far_detuned;
  out["gate_time_ns"] = b.gate_time;
  out["gamma0"] = b.gamma0;
  out["gamma_eff"] = b.gamma_eff;
  out["omega_c"] = b.omega_c;
  out["quality_factor"] = b.quality_factor;
  out["kappa"] = b.kappa;
  out["gamma_eff_time_n"] = b.gamma_time_n;
  out["kappa_time"] = b.kappa_time;
  // the same rates as cyclic frequencies, rate / 2 pi, in MHz
  out["mhz"] = {{"eta", mhz(b.eta)},
                {"eta_far_detuned", mhz(b.eta_far_detuned)},
                {"gamma0", mhz(b.gamma0)},
                {"gamma_eff", mhz(b.gamma_eff)},
                {"kappa", mhz(b.kappa)}};
  return out;
}

json summary_json(const RunConfig& config, const GateReport& r) {
  json out;
  out["config"] = to_json(config);
  out["n_qubits"] = r.n_qubits;
  out["source"] = to_string(r.source);
  out["cavity_disposal"] = to_string(r.disposal);
  out["echo"] = r.echo;
  out["k"] = r.k;
  out["total_time_ns"] = r.total_time;
  if (r.final_fidelity) out["final_fidelity"] = *r.final_fidelity;
  if (r.final_fidelity_closed_form) out["final_fidelity_closed_form"] = *r.final_fidelity_closed_form;
  if (r.n_qubits == 1) out["final_return_probability"] = r.final_overlap;
  out["final_overlap"] = r.final_overlap;
  out["F_in_model_final"] = r.infidelity_model.back();
  out["xi"] = r.xi;
  out["composite_fidelity"] = r.composite;
  out["gamma_formula"] = r.gamma_formula;
  out["gamma_achieved"] = optional_number(r.gamma_fit);
  out["commensurability"] = {{"delta_residual", r.commensurability.delta_residual},
                             {"omega_residual", r.commensurability.omega_residual},
                             {"delta_ok", r.commensurability.delta_ok},
                             {"omega_ok", r.commensurability.omega_ok}};
  out["single_qubit_purities"] = r.purities;
  out["max_norm_defect"] = *std::max_element(r.norm_defect.begin(), r.norm_defect.end());
  out["max_top_fock_pop"] = *std::max_element(r.top_fock_population.begin(), r.top_fock_population.end());
  out["failed"] = r.failed;

  std::vector<std::string> warnings = r.warnings;
  try {
    out["budget"] = budget_json(decoherence_budget(config.params));
  } catch (const ConfigError& e) {
    out["budget"] = nullptr;
    warnings.push_back(std::string("budget skipped: ") + e.what());
  }
  out["warnings"] = warnings;
  return out;
}

std::string trajectory_csv(const GateReport& r) {
  std::string text = "t_ns,fidelity,F_in_model,norm_defect,top_fock_pop\n";
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    text += format_number(r.times[i]) + "," + format_number(r.fidelity[i]) + "," +
            format_number(r.infidelity_model[i]) + "," + format_number(r.norm_defect[i]) + "," +
            format_number(r.top_fock_population[i]) + "\n";
  }
  return text;
}

int cmd_simulate(const CommandOptions& options) {
  std::ostream& out = out_of(options);
  try {
    const RunConfig config = resolve_config(options);
    const GateReport report = run_config(config);
    const std::filesystem::path dir = prepare_out_dir(options.out_dir);
    const json summary = summary_json(config, report);
    write_file(dir / "trajectory.csv", trajectory_csv(report));
    write_file(dir / "summary.json", dump(summary));

    out << "N = " << report.n_qubits << ", source " << to_string(report.source) << ", T = "
        << format_number(report.total_time) << " ns\n";
    if (report.final_fidelity) {
      out << "final fidelity " << format_number(*report.final_fidelity) << "\n";
    } else {
      out << "final |0> return probability " << format_number(report.final_overlap) << "\n";
    }
    for (const auto& w : summary["warnings"]) out << "warning: " << w.get<std::string>() << "\n";
    out << "wrote " << (dir / "trajectory.csv").string() << " and " << (dir / "summary.json").string() << "\n";
    if (report.failed) {
      err_of(options) << "propagation error: norm deviation exceeded tolerance (see summary warnings)\n";
      return kExitPropagation;
    }
    return kExitOk;
  } catch (...) {
    return report_exception(err_of(options));
  }
}

int cmd_sweep(const CommandOptions& options) {
  std::ostream& out = out_of(options);
  try {
    const RunConfig config = resolve_config(options);
    if (config.sweep.empty() || config.sweep.size() > 2) {
      throw ConfigError("sweep needs exactly 1 or 2 axes in 'sweep', got " + std::to_string(config.sweep.size()));
    }
    if (options.jobs < 1) throw ConfigError("--jobs must be >= 1");

    // row-major grid; Omega_over_delta is applied after the other axis so it sees the final delta
    std::vector<std::vector<double>> coords;
    const SweepAxis& first = config.sweep[0];
    if (config.sweep.size() == 1) {
      for (double v : first.values) coords.push_back({v});
    } else {
      for (double v : first.values) {
        for (double w : config.sweep[1].values) coords.push_back({v, w});
      }
    }
    std::vector<RunConfig> points;
    for (const auto& c : coords) {
      RunConfig point = config;
      point.sweep.clear();
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t a = 0; a < config.sweep.size(); ++a) {
          const bool ratio = config.sweep[a].parameter == "Omega_over_delta";
          if (ratio == (pass == 1)) point = point.with_parameter(config.sweep[a].parameter, c[a]);
        }
      }
      points.push_back(std::move(point));
    }

    std::vector<std::optional<GateReport>> reports(points.size());
    std::vector<std::exception_ptr> errors(points.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
      for (std::size_t i = next++; i < points.size(); i = next++) {
        try {
          reports[i] = run_config(points[i]);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    };
    const int threads = std::min<int>(options.jobs, static_cast<int>(points.size()));
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (std::thread& t : pool) t.join();
    for (const std::exception_ptr& e : errors) {
      if (e) std::rethrow_exception(e);
    }

    std::string text;
    for (const SweepAxis& axis : config.sweep) text += csv_field(axis.parameter) + ",";
    text +=
        "n_qubits,source,total_time_ns,final_fidelity,infidelity,final_fidelity_closed_form,composite_fidelity,"
        "xi,F_in_model_final,gamma_formula,gamma_achieved,max_norm_defect,max_top_fock_pop,failed,warnings\n";
    bool any_failed = false;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const GateReport& r = *reports[i];
      const auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
      for (double v : coords[i]) text += format_number(v) + ",";
      text += std::to_string(r.n_qubits) + "," + to_string(r.source) + "," + format_number(r.total_time) + "," +
              opt(r.final_fidelity) + "," + format_number(1.0 - r.final_overlap) + "," +
              opt(r.final_fidelity_closed_form) + "," + format_number(r.composite) + "," + format_number(r.xi) + "," +
              format_number(r.infidelity_model.back()) + "," + format_number(r.gamma_formula) + "," +
              opt(r.gamma_fit) + "," +
              format_number(*std::max_element(r.norm_defect.begin(), r.norm_defect.end())) + "," +
              format_number(*std::max_element(r.top_fock_population.begin(), r.top_fock_population.end())) + "," +
              (r.failed ? "true" : "false") + "," + csv_field(join(r.warnings, "; ")) + "\n";
      any_failed = any_failed || r.failed;
    }
    const std::filesystem::path dir = prepare_out_dir(options.out_dir);
    write_file(dir / "sweep.csv", text);
    out << "ran " << points.size() << " grid points; wrote " << (dir / "sweep.csv").string() << "\n";
    if (any_failed) {
      err_of(options) << "propagation error: at least one grid point exceeded the norm tolerance\n";
      return kExitPropagation;
    }
    return kExitOk;
  } catch (...) {
    return report_exception(err_of(options));
  }
}

int cmd_budget(const CommandOptions& options) {
  std::ostream& out = out_of(options);
  try {
    const RunConfig config = resolve_config(options);
    const BudgetReport budget = decoherence_budget(config.params);
    json doc = budget_json(budget);
    doc["config"] = to_json(config);
    const std::filesystem::path dir = prepare_out_dir(options.out_dir);
    write_file(dir / "budget.json", dump(doc));

    char line[160];
    const auto row = [&](const char* name, double rate) {
      std::snprintf(line, sizeof line, "%-22s %.12g rad/ns  (2pi x %.6g MHz)\n", name, rate, rate / kTwoPi * 1e3);
      out << line;
    };
    row("eta", budget.eta);
    row("eta 2G*Omega_L/Delta", budget.eta_far_detuned);
    std::snprintf(line, sizeof line, "%-22s %.12g ns\n", "gate time", budget.gate_time);
    out << line;
    row("Gamma_eff", budget.gamma_eff);
    row("kappa", budget.kappa);
    std::snprintf(line, sizeof line, "%-22s %.6g\n%-22s %.6g\n", "T*Gamma_eff*N", budget.gamma_time_n, "T*kappa*(n+1)",
                  budget.kappa_time);
    out << line;
    out << "wrote " << (dir / "budget.json").string() << "\n";
    return kExitOk;
  } catch (...) {
    return report_exception(err_of(options));
  }
}

int cmd_validate(const CommandOptions& options) {
  std::ostream& out = out_of(options);
  if (options.level != "fast" && options.level != "full") {
    err_of(options) << "config error: --level must be fast or full\n";
    return kExitConfig;
  }
  std::vector<CheckResult> results;
  try {
    results = run_validation(options.level, options.tamper_eta);
  } catch (...) {
    return report_exception(err_of(options));
  }
  char line[512];
  std::snprintf(line, sizeof line, "%-40s %-14s %-16s %-6s %8s  %s\n", "check", "measured", "criterion", "result",
                "time_s", "detail");
  out << line;
  bool all = true;
  for (const CheckResult& c : results) {
    char criterion[40];
    std::snprintf(criterion, sizeof criterion, "%s %.3g", c.relation.c_str(), c.threshold);
    std::snprintf(line, sizeof line, "%-40s %-14.6e %-16s %-6s %8.2f  %s\n", c.name.c_str(), c.measured, criterion,
                  c.passed ? "PASS" : "FAIL", c.seconds, c.detail.c_str());
    out << line;
    all = all && c.passed;
  }
  out << (all ? "all checks passed\n" : "some checks FAILED\n");
  return all ? kExitOk : kExitValidationFailed;
}

}  // namespace nvghz
