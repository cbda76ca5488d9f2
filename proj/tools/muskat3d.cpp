#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "muskat/initial_data.hpp"
#include "muskat/snapshot.hpp"
#include "muskat/validation.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace muskat;

namespace {

json record_json(const DiagnosticsRecord& r) {
  return {{"t", r.t},           {"min_sigma", r.min_sigma}, {"max_sigma", r.max_sigma}, {"gauge", r.gauge},
          {"inv_n", r.inv_n},   {"f_inf", r.f_inf},         {"g_inf", r.g_inf},         {"J", r.J},
          {"r1", r.r1},         {"r2", r.r2},               {"x_norm4", r.x_norm4},     {"energy", r.energy},
          {"omega_iters", r.omega_iters}, {"omega_res", r.omega_res}, {"max_xt", r.max_xt},
          {"grad_xt", r.grad_xt}, {"amplitude", r.amplitude}, {"margin", r.margin}};
}

json summary_json(const RunResult& res, const InitialData& init) {
  json peaks = {{"min_sigma", nullptr}, {"max_gauge", nullptr}, {"max_inv_n", nullptr},
                {"max_energy", nullptr}, {"max_xt", nullptr},   {"max_omega_iters", nullptr},
                {"max_omega_res", nullptr}, {"max_r1", nullptr}, {"max_r2", nullptr}, {"max_J", nullptr}};
  json amp = json::array();
  bool nonincreasing = true, nondecreasing = true;
  for (std::size_t k = 0; k < res.records.size(); ++k) {
    const DiagnosticsRecord& r = res.records[k];
    auto lower = [&](const char* key, double v) {
      if (peaks[key].is_null() || v < peaks[key].get<double>()) peaks[key] = v;
    };
    auto upper = [&](const char* key, double v) {
      if (peaks[key].is_null() || v > peaks[key].get<double>()) peaks[key] = v;
    };
    lower("min_sigma", r.min_sigma);
    upper("max_gauge", r.gauge);
    upper("max_inv_n", r.inv_n);
    if (std::isfinite(r.energy)) upper("max_energy", r.energy);
    upper("max_xt", r.max_xt);
    upper("max_omega_iters", r.omega_iters);
    upper("max_omega_res", r.omega_res);
    upper("max_r1", r.r1);
    upper("max_r2", r.r2);
    upper("max_J", r.J);
    amp.push_back({r.t, r.amplitude});
    if (k > 0) {
      nonincreasing = nonincreasing && r.amplitude <= res.records[k - 1].amplitude;
      nondecreasing = nondecreasing && r.amplitude >= res.records[k - 1].amplitude;
    }
  }
  double min_margin = std::numeric_limits<double>::infinity();
  for (const auto& iv : res.monitor.gauge) min_margin = std::min(min_margin, iv.margin);
  json monitor = {{"valid", res.monitor.valid},
                  {"intervals", res.monitor.gauge.size()},
                  {"violations", res.monitor.violations},
                  {"min_margin", res.monitor.gauge.empty() ? json(nullptr) : json(min_margin)},
                  {"inv_sigma_rate", res.monitor.inv_sigma_rate}};
  return {{"stop_reason", res.stop_reason},
          {"message", res.message},
          {"exit_code", res.exit_code()},
          {"final_t", res.t},
          {"steps", res.steps},
          {"records", res.records.size()},
          {"peaks", peaks},
          {"amplitude", {{"series", amp},
                         {"monotone", nonincreasing || nondecreasing},
                         {"nonincreasing", nonincreasing}}},
          {"rayleigh_taylor_flags", res.rt_flags},
          {"growth_flag", res.growth_flag},
          {"margin_warnings", res.margin_warnings},
          {"monitor", monitor},
          {"isothermalize", {{"J0", init.J0}, {"J", init.J}, {"iterations", init.iso_iterations}}}};
}

int cmd_run(const std::string& config_path) {
  const Config cfg = load_config(config_path);
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  {
    std::ofstream f(dir / "config.effective", std::ios::binary);
    f << format_config(cfg);
  }
  std::ofstream csv(dir / "timeseries.csv", std::ios::binary);
  if (!csv) throw Error("io", "cannot write " + (dir / "timeseries.csv").string());
  csv << csv_header();
  bool boundary_warned = false;
  RunObserver obs;
  obs.on_record = [&](const DiagnosticsRecord& r) {
    csv << csv_row(r);
    csv.flush();
    if (r.boundary > 1e-8 && !boundary_warned) {
      std::fprintf(stderr, "warning: interface reaches the box edge at t=%.6g (edge/max ratio %.3g)\n", r.t,
                   r.boundary);
      boundary_warned = true;
    }
  };
  obs.on_snapshot = [&](const SurfaceState& s, double t, int step) {
    char name[64];
    std::snprintf(name, sizeof name, "snap_%06d.bin", step);
    save_snapshot((dir / name).string(), s, t);
  };
  InitialData init;
  const RunResult res = run_from_config(cfg, obs, &init);
  {
    std::ofstream f(dir / "summary.json", std::ios::binary);
    f << summary_json(res, init).dump(2) << "\n";
  }
  if (res.margin_warnings > 0)
    std::fprintf(stderr, "warning: %d records exceeded the boundary-margin tolerance\n", res.margin_warnings);
  std::printf("stop: %s at t=%.6g after %d steps%s%s\n", res.stop_reason.c_str(), res.t, res.steps,
              res.message.empty() ? "" : ": ", res.message.c_str());
  return res.exit_code();
}

int cmd_diagnose(const std::string& path, const std::vector<std::string>& params) {
  const Snapshot snap = load_snapshot(path);
  Config cfg;
  for (const auto& kv : params) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError(kv, "expected key=value");
    set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  cfg.n = snap.state.grid.n();
  cfg.L = snap.state.grid.L();
  validate_config(cfg);
  const DiagnosticsRecord r = diagnose_state(snap.state, effective_run_config(cfg).step, snap.t);
  std::printf("%s\n", record_json(r).dump(2).c_str());
  return 0;
}

int cmd_validate(const std::string& level) {
  const ValidationLevel lv = level == "full" ? ValidationLevel::full : ValidationLevel::fast;
  const auto results = run_validation(lv, [](const CriterionResult& r) {
    std::printf("%s\n", format_result(r).c_str());
    std::fflush(stdout);
  });
  int failed = 0;
  for (const auto& r : results) failed += !r.pass;
  std::printf("%s: %zu criteria, %d failed\n", level.c_str(), results.size(), failed);
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Boundary-integral simulator for the 3D Muskat problem"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run a simulation from a config file");
  run->add_option("config", config_path, "key = value config file")->required();

  std::string snap_path;
  std::vector<std::string> params;
  auto* diag = app.add_subcommand("diagnose", "Print the diagnostics record of a snapshot");
  diag->add_option("snapshot", snap_path, "snapshot file")->required();
  diag->add_option("--params", params, "config overrides as key=value");

  std::string level = "fast";
  auto* val = app.add_subcommand("validate", "Run the acceptance criteria");
  val->add_option("--level", level, "fast or full")->check(CLI::IsMember({"fast", "full"}));

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(config_path);
    if (*diag) return cmd_diagnose(snap_path, params);
    if (*val) return cmd_validate(level);
  } catch (const Error& e) {
    std::fprintf(stderr, "error [%s]: %s\n", e.kind().c_str(), e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
