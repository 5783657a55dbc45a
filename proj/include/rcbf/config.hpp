#pragma once

#include <string>

#include "rcbf/vehicle_lateral.hpp"

namespace rcbf {

/// Parses the sectioned key=value scenario format (see docs/config_format.md).
///
/// Keys that are absent keep the VehicleScenarioConfig defaults. Unknown sections or keys,
/// duplicates and malformed values raise ConfigError carrying the line number and the
/// dotted field name. A `[uncertainty] sweep_thetas` entry turns the result into a sweep.
ScenarioPreset parse_config_text(const std::string& text, const std::string& default_name = "custom");

/// Reads a file; the scenario name defaults to the file stem.
ScenarioPreset parse_config_file(const std::string& path);

/// A preset name resolves through preset_scenarios(); anything else is read as a file.
ScenarioPreset resolve_scenario(const std::string& name_or_path);

}  // namespace rcbf
