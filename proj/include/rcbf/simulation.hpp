#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rcbf/barrier.hpp"
#include "rcbf/safety_filter.hpp"
#include "rcbf/sector_model.hpp"
#include "rcbf/types.hpp"

namespace rcbf {

/// Violation threshold on h for trajectory metrics.
inline constexpr double kTolSafe = 1e-3;

enum class AdversaryKind { nominal, worst_case, scripted };

const char* to_string(AdversaryKind kind);
AdversaryKind adversary_kind_from_string(const std::string& name);

/// Plant-side realization of the sector nonlinearity.
struct Adversary {
  AdversaryKind kind = AdversaryKind::nominal;
  /// The plant's true sector. Its normalized theta may differ from the filter's design level.
  SectorBound sector;
  std::optional<SectorNonlinearity> scripted;

  NormalizedUncertainty plant() const { return normalize_sector(sector); }
};

struct Scenario {
  std::string name;
  SystemModel model;
  BarrierFunction barrier;
  NormalizedUncertainty unc;  // design level used by the filter
  Adversary adversary;
  std::function<Vector(const Vector&)> controller;
  bool filter_enabled = true;
  FilterMode filter_mode = FilterMode::automatic;
  std::optional<double> input_bound;
  ClassKGain eta;    // relative degree 1 barriers
  EcbfGains gains;   // relative degree 2 barriers
  Vector x0;
  double dt = 1e-3;
  double horizon = 2.0;
  /// Optional distance to the unsafe region, reported as min_distance.
  std::function<double(const Vector&)> distance;

  /// Throws std::invalid_argument on a malformed scenario or an unsafe x0.
  void validate() const;
  int steps() const;
};

/// Parallel per-step records. Row k holds the state at times[k] and the inputs applied over
/// [times[k], times[k] + dt]; the last row is the terminal state and its would-be inputs.
struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<Vector> u0s;
  std::vector<Vector> us;
  std::vector<Vector> ws;
  std::vector<Vector> vs;  // plant input scale * (u + w)
  std::vector<double> h_vals;
  std::vector<double> hdot_vals;
  std::vector<double> margins;
  std::vector<LinearizedConstraint> constraints;
  std::vector<char> altered;
  std::vector<char> infeasible;

  std::size_t size() const { return times.size(); }
};

/// Assembles (p, a) for the scenario's barrier at x with the design uncertainty.
LinearizedConstraint assemble_constraint(const Scenario& sc, const Vector& x);

/// One classical Runge-Kutta step of x' = f(x) + scale g(x) (u + w), u and w held constant.
Vector step_rk4(const SystemModel& model, const NormalizedUncertainty& unc, const Vector& x,
                const Vector& u, const Vector& w, double dt);

/// Throws NonFiniteError if the state blows up.
Trajectory simulate(const Scenario& sc);

struct TrajectoryMetrics {
  double min_h = 0.0;
  double argmin_t = 0.0;
  std::optional<double> min_distance;
  bool violation = false;
  double max_abs_u = 0.0;
  int steps_altered = 0;
  int steps_infeasible = 0;
};

/// `distance` may be empty, in which case min_distance is left unset.
TrajectoryMetrics trajectory_metrics(const Trajectory& traj,
                                     const std::function<double(const Vector&)>& distance = {},
                                     double tol_safe = kTolSafe);

}  // namespace rcbf
