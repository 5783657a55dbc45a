#pragma once

#include <optional>
#include <variant>

#include "rcbf/barrier.hpp"
#include "rcbf/cone_solver.hpp"
#include "rcbf/types.hpp"

namespace rcbf {

enum class FilterMode { socp, scalar_closed_form, qp_channels, automatic };

const char* to_string(FilterMode mode);
/// Accepts "socp", "scalar_closed_form" (or "scalar"), "qp_channels" (or "qp"), "auto".
FilterMode filter_mode_from_string(const std::string& name);

/// Scalar theta couples all channels through ||u||; a vector gives one level per channel.
using UncertaintyLevel = std::variant<double, Vector>;

struct FilterProblem {
  Vector u0;
  LinearizedConstraint constraint;
  UncertaintyLevel theta = 0.0;
  FilterMode mode = FilterMode::automatic;
  /// Optional box |u_i| <= input_bound. Unset means U = R^m.
  std::optional<double> input_bound;
};

enum class FilterStatus { ok, infeasible, infeasible_degenerate, solver_failure };

const char* to_string(FilterStatus status);

struct FilterResult {
  Vector u;
  Vector w_star;
  double margin = 0.0;
  bool altered = false;
  FilterStatus status = FilterStatus::ok;
  FilterMode path = FilterMode::automatic;  // the path that produced u
  bool solver_invoked = false;
  SolveStatus solver_status = SolveStatus::optimal;
  int solver_iterations = 0;
  std::optional<double> q_star;  // socp path: epigraph variable with 2 q* = ||u*||^2
  std::optional<Vector> u_pos;   // qp_channels path: u = u_pos - u_neg
  std::optional<Vector> u_neg;
};

/// Same as the cone solver's feasibility tolerance.
inline constexpr double kFilterTolFeas = 1e-8;

/// Minimizes 1/2 ||u - u0||^2 s.t. p + a u - theta ||a|| ||u|| >= 0 as a cone program in
/// (u, q) with the rotated-cone epigraph 2 q >= ||u||^2. Requires scalar theta.
FilterResult filter_socp(const FilterProblem& prob);

/// Closed form for one input: u* = max{u_l, u0} for a > 0, min{u_h, u0} for a < 0.
FilterResult filter_scalar(const FilterProblem& prob);

/// Per-channel model: splits u = u_p - u_n, |u| = u_p + u_n and solves the resulting QP
/// through its cone embedding. Channels with theta_i == 0 keep a single free variable.
FilterResult filter_qp_channels(const FilterProblem& prob);

/// Dispatch: m == 1 -> scalar, vector theta -> qp_channels, otherwise socp, unless
/// prob.mode names a path explicitly.
FilterResult filter(const FilterProblem& prob);

}  // namespace rcbf
