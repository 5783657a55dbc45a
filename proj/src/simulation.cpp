#include "rcbf/simulation.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace rcbf {

namespace {

Vector drift(const SystemModel& model, const NormalizedUncertainty& unc, const Vector& x,
             const Vector& input) {
  return model.f(x) + unc.scale * (model.g(x) * input);
}

Vector adversary_input(const Scenario& sc, const LinearizedConstraint& c, const Vector& u,
                       double t) {
  const Adversary& adv = sc.adversary;
  switch (adv.kind) {
    case AdversaryKind::nominal:
      return Vector::Zero(u.size());
    case AdversaryKind::worst_case:
      // With a = 0 every admissible w has the same effect on h.
      if (c.a.norm() <= kDegenerateGradientTol) return Vector::Zero(u.size());
      return worst_case_input(u, c.a, adv.plant().theta);
    case AdversaryKind::scripted: {
      const Vector v = apply_nonlinearity(*adv.scripted, adv.sector, u, t);
      return v / adv.plant().scale - u;
    }
  }
  return Vector::Zero(u.size());
}

}  // namespace

const char* to_string(AdversaryKind kind) {
  switch (kind) {
    case AdversaryKind::nominal: return "nominal";
    case AdversaryKind::worst_case: return "worst_case";
    case AdversaryKind::scripted: return "scripted";
  }
  return "unknown";
}

AdversaryKind adversary_kind_from_string(const std::string& name) {
  if (name == "nominal") return AdversaryKind::nominal;
  if (name == "worst_case") return AdversaryKind::worst_case;
  if (name == "scripted") return AdversaryKind::scripted;
  throw std::invalid_argument("unknown adversary '" + name + "'");
}

void Scenario::validate() const {
  if (model.n <= 0 || model.m <= 0 || !model.f || !model.g) {
    throw std::invalid_argument("scenario: incomplete system model");
  }
  if (!barrier.h || !barrier.grad) throw std::invalid_argument("scenario: incomplete barrier");
  if (!controller) throw std::invalid_argument("scenario: missing baseline controller");
  if (x0.size() != model.n || !x0.allFinite()) {
    throw std::invalid_argument("scenario: x0 must be a finite vector of length n");
  }
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("scenario: dt must be > 0");
  if (!(horizon >= dt) || !std::isfinite(horizon)) {
    throw std::invalid_argument("scenario: horizon must be >= dt");
  }
  if (!(unc.theta >= 0.0 && unc.theta < 1.0)) {
    throw std::invalid_argument("scenario: design theta must lie in [0, 1)");
  }
  validate_sector(adversary.sector);
  if (adversary.kind == AdversaryKind::scripted && !adversary.scripted) {
    throw std::invalid_argument("scenario: scripted adversary without a nonlinearity");
  }
  validate_relative_degree(model, barrier, unc, x0);
  const double h0 = barrier.h(x0);
  if (!(h0 >= 0.0)) {
    std::ostringstream os;
    os << "scenario: initial state is unsafe (h(x0) = " << h0 << ")";
    throw std::invalid_argument(os.str());
  }
}

int Scenario::steps() const { return static_cast<int>(std::llround(horizon / dt)); }

LinearizedConstraint assemble_constraint(const Scenario& sc, const Vector& x) {
  if (sc.barrier.relative_degree == 2) {
    return assemble_recbf(sc.model, sc.barrier, sc.unc, sc.gains, x);
  }
  return assemble_rcbf(sc.model, sc.barrier, sc.unc, sc.eta, x);
}

Vector step_rk4(const SystemModel& model, const NormalizedUncertainty& unc, const Vector& x,
                const Vector& u, const Vector& w, double dt) {
  const Vector input = u + w;
  const Vector k1 = drift(model, unc, x, input);
  const Vector k2 = drift(model, unc, x + 0.5 * dt * k1, input);
  const Vector k3 = drift(model, unc, x + 0.5 * dt * k2, input);
  const Vector k4 = drift(model, unc, x + dt * k3, input);
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Trajectory simulate(const Scenario& sc) {
  sc.validate();
  const int steps = sc.steps();
  const NormalizedUncertainty plant = sc.adversary.plant();

  Trajectory traj;
  const auto rows = static_cast<std::size_t>(steps) + 1;
  traj.times.reserve(rows);
  traj.states.reserve(rows);

  Vector x = sc.x0;
  for (int k = 0; k <= steps; ++k) {
    const double t = k * sc.dt;
    const Vector u0 = sc.controller(x);
    if (u0.size() != sc.model.m || !u0.allFinite()) {
      throw NonFiniteError("baseline controller returned an invalid input at t = " +
                           std::to_string(t));
    }
    const LinearizedConstraint c = assemble_constraint(sc, x);

    Vector u = u0;
    double margin = c.robust_margin(u0, sc.unc.theta);
    bool altered = false;
    bool infeasible = false;
    if (sc.filter_enabled) {
      FilterProblem prob;
      prob.u0 = u0;
      prob.constraint = c;
      prob.theta = sc.unc.theta;
      prob.mode = sc.filter_mode;
      prob.input_bound = sc.input_bound;
      const FilterResult r = filter(prob);
      if (r.status == FilterStatus::ok) {
        u = r.u;
        margin = r.margin;
        altered = r.altered;
      } else {
        infeasible = true;
      }
    }

    const Vector w = adversary_input(sc, c, u, t);
    const Vector xdot = drift(sc.model, plant, x, u + w);

    traj.times.push_back(t);
    traj.states.push_back(x);
    traj.u0s.push_back(u0);
    traj.us.push_back(u);
    traj.ws.push_back(w);
    traj.vs.push_back(plant.scale * (u + w));
    traj.h_vals.push_back(sc.barrier.h(x));
    traj.hdot_vals.push_back(sc.barrier.grad(x).dot(xdot));
    traj.margins.push_back(margin);
    traj.constraints.push_back(c);
    traj.altered.push_back(altered ? 1 : 0);
    traj.infeasible.push_back(infeasible ? 1 : 0);

    if (k < steps) {
      x = step_rk4(sc.model, plant, x, u, w, sc.dt);
      if (!x.allFinite()) {
        throw NonFiniteError("state became non-finite at t = " + std::to_string(t + sc.dt));
      }
    }
  }
  return traj;
}

TrajectoryMetrics trajectory_metrics(const Trajectory& traj,
                                     const std::function<double(const Vector&)>& distance,
                                     double tol_safe) {
  if (traj.size() == 0) throw std::invalid_argument("trajectory_metrics: empty trajectory");
  TrajectoryMetrics m;
  m.min_h = std::numeric_limits<double>::infinity();
  double min_dist = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < traj.size(); ++k) {
    if (traj.h_vals[k] < m.min_h) {
      m.min_h = traj.h_vals[k];
      m.argmin_t = traj.times[k];
    }
    if (distance) min_dist = std::min(min_dist, distance(traj.states[k]));
    m.max_abs_u = std::max(m.max_abs_u, traj.us[k].lpNorm<Eigen::Infinity>());
    m.steps_altered += traj.altered[k] ? 1 : 0;
    m.steps_infeasible += traj.infeasible[k] ? 1 : 0;
  }
  if (distance) m.min_distance = min_dist;
  m.violation = m.min_h < -tol_safe;
  return m;
}

}  // namespace rcbf
