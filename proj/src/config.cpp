#include "rcbf/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace rcbf {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& text, const std::string& field, int line) {
  const std::string t = trim(text);
  double value = 0.0;
  const char* end = t.data() + t.size();
  const auto [ptr, ec] = std::from_chars(t.data(), end, value);
  if (t.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw ConfigError(field, "expected a finite number, got '" + t + "'", line);
  }
  return value;
}

std::vector<double> parse_list(const std::string& text, const std::string& field, int line,
                               std::size_t expected = 0) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(item, field, line));
  if (expected > 0 && out.size() != expected) {
    throw ConfigError(field, "expected " + std::to_string(expected) + " comma-separated values",
                      line);
  }
  if (out.empty()) throw ConfigError(field, "expected at least one value", line);
  return out;
}

using Setter = std::function<void(ScenarioPreset&, const std::string&, const std::string&, int)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto number = [&t](const std::string& key, double VehicleScenarioConfig::*member) {
      t[key] = [member](ScenarioPreset& p, const std::string& v, const std::string& f, int line) {
        p.base.*member = parse_double(v, f, line);
      };
    };
    auto param = [&t](const std::string& key, double VehicleParams::*member) {
      t[key] = [member](ScenarioPreset& p, const std::string& v, const std::string& f, int line) {
        p.base.params.*member = parse_double(v, f, line);
      };
    };

    param("system.mass", &VehicleParams::m_mass);
    param("system.inertia", &VehicleParams::Iz);
    param("system.a_front", &VehicleParams::a_front);
    param("system.b_rear", &VehicleParams::b_rear);
    param("system.speed", &VehicleParams::U_speed);
    param("system.c_alpha_f", &VehicleParams::C_alpha_f);
    param("system.c_alpha_r", &VehicleParams::C_alpha_r);

    number("barrier.d", &VehicleScenarioConfig::d);
    t["barrier.poles"] = [](ScenarioPreset& p, const std::string& v, const std::string& f,
                            int line) {
      const auto poles = parse_list(v, f, line, 2);
      p.base.poles = {poles[0], poles[1]};
    };

    number("uncertainty.design_theta", &VehicleScenarioConfig::design_theta);
    number("uncertainty.plant_theta", &VehicleScenarioConfig::plant_theta);
    t["uncertainty.adversary"] = [](ScenarioPreset& p, const std::string& v, const std::string& f,
                                    int line) {
      try {
        p.base.adversary = adversary_kind_from_string(v);
      } catch (const std::invalid_argument& ex) {
        throw ConfigError(f, ex.what(), line);
      }
    };
    t["uncertainty.nonlinearity"] = [](ScenarioPreset& p, const std::string& v,
                                       const std::string&, int) { p.base.nonlinearity = v; };
    number("uncertainty.saturation_limit", &VehicleScenarioConfig::saturation_limit);
    number("uncertainty.gain_mean", &VehicleScenarioConfig::gain_mean);
    number("uncertainty.gain_amplitude", &VehicleScenarioConfig::gain_amplitude);
    number("uncertainty.gain_frequency", &VehicleScenarioConfig::gain_frequency);
    t["uncertainty.seed"] = [](ScenarioPreset& p, const std::string& v, const std::string& f,
                               int line) {
      std::uint64_t seed = 0;
      const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), seed);
      if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
        throw ConfigError(f, "expected a non-negative integer, got '" + v + "'", line);
      }
      p.base.seed = seed;
    };
    t["uncertainty.sweep_thetas"] = [](ScenarioPreset& p, const std::string& v,
                                       const std::string& f, int line) {
      p.sweep_thetas = parse_list(v, f, line);
    };

    t["controller.gain"] = [](ScenarioPreset& p, const std::string& v, const std::string& f,
                              int line) {
      const auto k = parse_list(v, f, line, 4);
      p.base.lqr.K = Eigen::Map<const RowVector>(k.data(), 4);
    };
    t["controller.reference"] = [](ScenarioPreset& p, const std::string& v,
                                   const std::string& f, int line) {
      const auto r = parse_list(v, f, line, 4);
      p.base.lqr.r = Eigen::Map<const Vector>(r.data(), 4);
    };
    t["controller.filter"] = [](ScenarioPreset& p, const std::string& v, const std::string& f,
                                int line) {
      if (v == "none") {
        p.base.filter_enabled = false;
        return;
      }
      try {
        p.base.filter_mode = filter_mode_from_string(v);
        p.base.filter_enabled = true;
      } catch (const std::invalid_argument& ex) {
        throw ConfigError(f, ex.what(), line);
      }
    };
    t["controller.input_bound"] = [](ScenarioPreset& p, const std::string& v,
                                     const std::string& f, int line) {
      p.base.input_bound = parse_double(v, f, line);
    };

    t["simulation.name"] = [](ScenarioPreset& p, const std::string& v, const std::string& f,
                              int line) {
      const bool ok = !v.empty() && std::all_of(v.begin(), v.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
      });
      if (!ok) throw ConfigError(f, "use letters, digits, '_', '-' or '.'", line);
      p.name = v;
      p.base.name = v;
    };
    t["simulation.x0"] = [](ScenarioPreset& p, const std::string& v, const std::string& f,
                            int line) {
      const auto x = parse_list(v, f, line, 4);
      std::copy(x.begin(), x.end(), p.base.x0.begin());
    };
    number("simulation.s0", &VehicleScenarioConfig::s0);
    number("simulation.dt", &VehicleScenarioConfig::dt);
    number("simulation.horizon", &VehicleScenarioConfig::horizon);
    return t;
  }();
  return table;
}

const std::set<std::string> kSections = {"system", "barrier", "uncertainty", "controller",
                                         "simulation"};

}  // namespace

ScenarioPreset parse_config_text(const std::string& text, const std::string& default_name) {
  ScenarioPreset out;
  out.name = default_name;
  out.base.name = default_name;

  std::istringstream in(text);
  std::string raw;
  std::string section;
  std::map<std::string, int> seen;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find_first_of("#;");
    const std::string content = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (content.empty()) continue;

    if (content.front() == '[') {
      if (content.back() != ']') throw ConfigError("", "unterminated section header", line);
      section = trim(content.substr(1, content.size() - 2));
      if (kSections.count(section) == 0) {
        throw ConfigError("", "unknown section [" + section + "]", line);
      }
      continue;
    }

    const auto eq = content.find('=');
    if (eq == std::string::npos) throw ConfigError("", "expected key = value", line);
    const std::string key = trim(content.substr(0, eq));
    const std::string value = trim(content.substr(eq + 1));
    if (section.empty()) throw ConfigError(key, "key outside of any section", line);
    const std::string field = section + "." + key;
    const auto it = setters().find(field);
    if (it == setters().end()) throw ConfigError(field, "unknown key", line);
    if (!seen.emplace(field, line).second) throw ConfigError(field, "duplicate key", line);
    it->second(out, value, field, line);
  }

  try {
    out.base.validate();
    for (const double theta : out.sweep_thetas) {
      if (!(theta >= 0.0 && theta < 1.0)) {
        throw ConfigError("uncertainty.sweep_thetas", "every value must lie in [0, 1)");
      }
    }
  } catch (const ConfigError& err) {
    const auto it = seen.find(err.field());
    if (it == seen.end() || err.line() > 0) throw;
    throw ConfigError(err.field(), err.message(), it->second);
  }
  return out;
}

ScenarioPreset parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), std::filesystem::path(path).stem().string());
}

ScenarioPreset resolve_scenario(const std::string& name_or_path) {
  if (const ScenarioPreset* preset = find_preset(name_or_path)) return *preset;
  return parse_config_file(name_or_path);
}

}  // namespace rcbf
