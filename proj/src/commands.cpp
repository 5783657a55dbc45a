#include "rcbf/commands.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "rcbf/config.hpp"
#include "rcbf/report.hpp"
#include "rcbf/simulation.hpp"

namespace fs = std::filesystem;

namespace rcbf {

namespace {

void prepare_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw ConfigError("out_dir", "cannot create '" + dir + "': " + ec.message());
  }
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("out_dir", "cannot write '" + path.string() + "'");
  return os;
}

struct RunOutput {
  std::string name;
  Trajectory traj;
  TrajectoryMetrics metrics;
};

RunOutput run_one(const VehicleScenarioConfig& base) {
  RunOutput r;
  r.name = base.name;
  r.traj = simulate(build_scenario(base));
  r.metrics = trajectory_metrics(r.traj, obstacle_distance);
  return r;
}

void write_csv(const fs::path& path, const Trajectory& traj) {
  auto os = open_output(path);
  write_trajectory_csv(os, traj);
}

void report_run(std::ostream& out, const RunOutput& r, const fs::path& csv) {
  out << r.name << ": min_h=" << format_number(r.metrics.min_h)
      << " min_distance=" << format_number(r.metrics.min_distance.value_or(0.0))
      << " violation=" << (r.metrics.violation ? "true" : "false")
      << " steps_altered=" << r.metrics.steps_altered;
  if (r.metrics.steps_infeasible > 0) out << " steps_infeasible=" << r.metrics.steps_infeasible;
  out << " -> " << csv.string() << '\n';
}

// Shared error boundary for the file-producing commands.
template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const ConfigError& ex) {
    err << "config error: " << ex.what() << '\n';
  } catch (const NonFiniteError& ex) {
    err << "simulation aborted: " << ex.what() << '\n';
  } catch (const std::invalid_argument& ex) {
    err << "invalid scenario: " << ex.what() << '\n';
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
  }
  return kExitError;
}

}  // namespace

std::string default_out_dir() {
  const char* env = std::getenv("RCBF_SHIELD_OUT");
  if (env != nullptr && *env != '\0') return env;
  return "rcbf_out";
}

ScenarioPreset load_scenario(const RunConfig& cfg) {
  ScenarioPreset preset;
  if (!cfg.config_path.empty()) {
    preset = parse_config_file(cfg.config_path);
  } else if (!cfg.scenario.empty()) {
    preset = resolve_scenario(cfg.scenario);
  } else {
    throw ConfigError("scenario", "give a preset name or --config PATH");
  }
  VehicleScenarioConfig& b = preset.base;
  if (cfg.dt) b.dt = *cfg.dt;
  if (cfg.horizon) b.horizon = *cfg.horizon;
  if (cfg.design_theta) b.design_theta = *cfg.design_theta;
  if (cfg.plant_theta) b.plant_theta = *cfg.plant_theta;
  if (cfg.seed) b.seed = *cfg.seed;
  b.validate();
  return preset;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ScenarioPreset preset = load_scenario(cfg);
    if (preset.is_sweep()) {
      throw ConfigError("scenario", "'" + preset.name + "' is a sweep; run it with `sweep`");
    }
    const RunOutput r = run_one(preset.base);
    prepare_out_dir(cfg.out_dir);
    const fs::path dir(cfg.out_dir);
    const fs::path csv = dir / (r.name + ".csv");
    write_csv(csv, r.traj);
    {
      auto os = open_output(dir / "metrics.txt");
      write_metrics(os, r.name, r.metrics);
    }
    if (cfg.emit_svg) {
      auto os = open_output(dir / "trajectory.svg");
      write_trajectory_svg(os, {{r.name, &r.traj}}, preset.base.d);
    }
    report_run(out, r, csv);
    if (r.metrics.steps_infeasible > 0) {
      err << "warning: filter infeasible on " << r.metrics.steps_infeasible
          << " steps (nominal input applied)\n";
      return static_cast<int>(kExitInfeasible);
    }
    return static_cast<int>(kExitOk);
  });
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ScenarioPreset preset = load_scenario(cfg);
    std::vector<double> thetas = cfg.thetas.empty() ? preset.sweep_thetas : cfg.thetas;
    if (thetas.empty()) throw ConfigError("uncertainty.sweep_thetas", "empty theta list");
    for (const double theta : thetas) {
      if (!(theta >= 0.0 && theta < 1.0)) {
        throw ConfigError("uncertainty.sweep_thetas",
                          "every value must lie in [0, 1), got " + format_number(theta));
      }
    }
    std::sort(thetas.begin(), thetas.end());
    thetas.erase(std::unique(thetas.begin(), thetas.end()), thetas.end());

    std::vector<RunOutput> runs;
    for (const double theta : thetas) {
      VehicleScenarioConfig base = preset.base;
      base.design_theta = theta;
      base.name = preset.name + "_theta" + format_number(theta);
      base.validate();
      runs.push_back(run_one(base));
    }

    prepare_out_dir(cfg.out_dir);
    const fs::path dir(cfg.out_dir);
    int infeasible = 0;
    for (const RunOutput& r : runs) {
      const fs::path csv = dir / (r.name + ".csv");
      write_csv(csv, r.traj);
      report_run(out, r, csv);
      infeasible += r.metrics.steps_infeasible;
    }
    {
      auto os = open_output(dir / "sweep_summary.csv");
      os << "theta,min_distance,min_h\n";
      for (std::size_t i = 0; i < runs.size(); ++i) {
        os << format_number(thetas[i]) << ','
           << format_number(runs[i].metrics.min_distance.value_or(0.0)) << ','
           << format_number(runs[i].metrics.min_h) << '\n';
      }
    }
    if (cfg.emit_svg) {
      std::vector<SvgSeries> series;
      for (std::size_t i = 0; i < runs.size(); ++i) {
        series.push_back({"theta = " + format_number(thetas[i]), &runs[i].traj});
      }
      auto os = open_output(dir / "trajectory.svg");
      write_trajectory_svg(os, series, preset.base.d);
    }
    out << "summary -> " << (dir / "sweep_summary.csv").string() << '\n';
    if (infeasible > 0) {
      err << "warning: filter infeasible on " << infeasible << " steps across the sweep\n";
      return static_cast<int>(kExitInfeasible);
    }
    return static_cast<int>(kExitOk);
  });
}

int cmd_verify(const RunConfig& cfg, std::ostream& out, const VerifyOptions& base) {
  VerifyOptions opts = base;
  opts.depth = cfg.depth;
  if (cfg.seed) opts.seed = *cfg.seed;
  const auto results = run_verification(opts);
  print_verification(out, results);
  const bool all = std::all_of(results.begin(), results.end(),
                               [](const CheckResult& r) { return r.passed; });
  out << (all ? "all checks passed" : "verification FAILED") << '\n';
  return all ? kExitOk : kExitError;
}

}  // namespace rcbf
