#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "rcbf/simulation.hpp"

namespace rcbf {

inline constexpr const char* kTrajectoryCsvHeader =
    "t,e,edot,psi,psidot,s,h,hdot,u0,u,w,margin,altered";

/// Shortest form with 9 significant digits, '.' as decimal point regardless of locale.
std::string format_number(double v);

/// Vehicle trajectory CSV. Requires 5 states and a single input.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

/// key=value lines: scenario, min_h, argmin_t, min_distance, violation, steps_altered,
/// steps_infeasible, max_abs_u.
void write_metrics(std::ostream& os, const std::string& scenario, const TrajectoryMetrics& m);

struct SvgSeries {
  std::string label;
  const Trajectory* traj = nullptr;
};

/// e against s in the fixed window [-25, 25]^2 with the obstacle disk of radius d at the origin.
void write_trajectory_svg(std::ostream& os, const std::vector<SvgSeries>& series, double d);

}  // namespace rcbf
