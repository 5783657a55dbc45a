#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "rcbf/verification.hpp"
#include "rcbf/vehicle_lateral.hpp"

namespace rcbf {

/// $RCBF_SHIELD_OUT when set and non-empty, otherwise "rcbf_out".
std::string default_out_dir();

struct RunConfig {
  std::string scenario;     // preset name or config path
  std::string config_path;  // explicit config file; wins over `scenario`
  std::string out_dir = default_out_dir();
  std::optional<double> dt;
  std::optional<double> horizon;
  std::optional<double> design_theta;
  std::optional<double> plant_theta;
  bool emit_svg = false;
  std::optional<std::uint64_t> seed;
  std::vector<double> thetas;  // sweep levels; empty means the preset's list
  VerifyDepth depth = VerifyDepth::quick;
};

enum ExitCode : int { kExitOk = 0, kExitError = 1, kExitInfeasible = 2 };

/// Resolves the scenario and applies the overrides. Throws ConfigError.
ScenarioPreset load_scenario(const RunConfig& cfg);

/// Writes <out>/<scenario>.csv, <out>/metrics.txt and optionally <out>/trajectory.svg.
int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// One CSV per theta plus <out>/sweep_summary.csv (theta,min_distance,min_h) sorted by theta.
int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err);

int cmd_verify(const RunConfig& cfg, std::ostream& out, const VerifyOptions& base = {});

}  // namespace rcbf
