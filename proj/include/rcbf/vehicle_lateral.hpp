#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rcbf/barrier.hpp"
#include "rcbf/simulation.hpp"
#include "rcbf/types.hpp"

namespace rcbf {

/// Linearized lateral dynamics parameters. Cornering stiffnesses are negative.
struct VehicleParams {
  double m_mass = 1670.0;     // kg
  double Iz = 2100.0;         // kg m^2
  double a_front = 0.99;      // m, CG to front axle
  double b_rear = 1.7;        // m, CG to rear axle
  double U_speed = 28.0;      // m/s
  double C_alpha_f = -1.23e5;   // N/rad
  double C_alpha_r = -1.042e5;  // N/rad

  void validate() const;
};

/// State order (e, edot, psi, psidot, s).
enum VehicleIndex : int { kE = 0, kEdot = 1, kPsi = 2, kPsidot = 3, kS = 4 };

/// 5 x 5 drift matrix; the last row is zero and s' = U enters as a constant offset.
Matrix vehicle_A(const VehicleParams& vp);
/// Steering input column, length 5.
Vector vehicle_B(const VehicleParams& vp);

/// x' = A x + (0, 0, 0, 0, U) + B v. Supplies f_jacobian.
SystemModel build_vehicle_model(const VehicleParams& vp);

/// u0 = K (r - x[0..3]).
struct LqrGain {
  RowVector K;
  Vector r;

  /// K = [1.41 0.41 3.30 0.24], r = 0.
  static LqrGain published();
};

std::function<Vector(const Vector&)> lqr_baseline(const LqrGain& gain);

/// h = e^2 + s^2 - d^2, relative degree 2. Throws std::invalid_argument unless d > 0.
BarrierFunction obstacle_barrier(double d);

/// sqrt(e^2 + s^2): distance from the vehicle to the obstacle centre.
double obstacle_distance(const Vector& x);

/// Everything needed to build a vehicle scenario. Defaults reproduce the robust filter run.
struct VehicleScenarioConfig {
  std::string name = "custom";
  VehicleParams params;
  double d = 3.0;
  std::array<double, 2> poles{-30.0, -30.0};
  double design_theta = 0.5;
  double plant_theta = 0.5;
  AdversaryKind adversary = AdversaryKind::worst_case;
  /// Scripted adversary fixture: identity, saturation, time_varying_gain or random.
  std::string nonlinearity = "identity";
  double saturation_limit = 1.0;
  double gain_mean = 1.0;
  double gain_amplitude = 0.0;
  double gain_frequency = 1.0;
  std::uint64_t seed = 0;
  bool filter_enabled = true;
  FilterMode filter_mode = FilterMode::socp;
  std::optional<double> input_bound;
  LqrGain lqr = LqrGain::published();
  std::array<double, 4> x0{2.0, 0.0, 0.0, 0.0};
  double s0 = -20.0;
  double dt = 1e-3;
  double horizon = 2.0;

  /// Throws std::invalid_argument naming the offending field, e.g. "uncertainty.design_theta".
  void validate() const;
};

/// Scripted nonlinearity described by the config's fixture fields.
SectorNonlinearity make_config_nonlinearity(const VehicleScenarioConfig& cfg);

Scenario build_scenario(const VehicleScenarioConfig& cfg);

/// A named preset. Sweep presets list the design levels to run; the base holds the rest.
struct ScenarioPreset {
  std::string name;
  VehicleScenarioConfig base;
  std::vector<double> sweep_thetas;

  bool is_sweep() const { return !sweep_thetas.empty(); }
};

/// fig3_lqr, fig3_ecbf, fig3_recbf and fig4_sweep.
const std::vector<ScenarioPreset>& preset_scenarios();
const ScenarioPreset* find_preset(const std::string& name);

}  // namespace rcbf
