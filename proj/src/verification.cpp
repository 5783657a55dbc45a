#include "rcbf/verification.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

#include "rcbf/sector_model.hpp"
#include "rcbf/simulation.hpp"
#include "rcbf/vehicle_lateral.hpp"

namespace rcbf {

namespace {

using Clock = std::chrono::steady_clock;

struct Sizes {
  int oracle;
  int identity;
  int agreement;
  int uniqueness;
  int reduction;
};

Sizes sizes_for(VerifyDepth depth) {
  if (depth == VerifyDepth::full) return {100, 1000, 1000, 1000, 1000};
  return {20, 1000, 200, 200, 200};
}

Vector normal_vector(std::mt19937_64& rng, Eigen::Index m) {
  std::normal_distribution<double> n01(0.0, 1.0);
  Vector v(m);
  for (Eigen::Index i = 0; i < m; ++i) v(i) = n01(rng);
  return v;
}

Vector uniform_vector(std::mt19937_64& rng, Eigen::Index m, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Vector v(m);
  for (Eigen::Index i = 0; i < m; ++i) v(i) = dist(rng);
  return v;
}

// Scalar instance with a bounded away from zero so the closed form applies.
FilterProblem random_scalar_instance(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pm10(-10.0, 10.0);
  std::uniform_real_distribution<double> mag(0.1, 10.0);
  std::uniform_real_distribution<double> th(0.0, 0.9);
  std::bernoulli_distribution sign(0.5);
  FilterProblem prob;
  prob.u0 = Vector::Constant(1, pm10(rng));
  prob.constraint.p = pm10(rng);
  prob.constraint.a = RowVector::Constant(1, sign(rng) ? mag(rng) : -mag(rng));
  prob.theta = th(rng);
  return prob;
}

template <typename Body>
CheckResult timed(const std::string& name, Body&& body) {
  const auto start = Clock::now();
  CheckResult r = body();
  r.name = name;
  r.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return r;
}

CheckResult check_oracle(std::mt19937_64& rng, int instances) {
  std::uniform_real_distribution<double> th(0.05, 0.9);
  CheckResult r;
  r.threshold = 1e-2;
  r.instances = instances;
  double worst_gap = 0.0;
  bool dominated = true;
  for (int k = 0; k < instances; ++k) {
    const Eigen::Index m = 1 + k % 3;
    const Vector u = normal_vector(rng, m);
    const RowVector a = normal_vector(rng, m).transpose();
    const double theta = th(rng);
    const Vector w_closed = worst_case_input(u, a, theta);
    const Vector w_sampled = worst_case_oracle(u, a, theta, 10000, rng());
    const double closed = a.dot(u + w_closed);
    const double sampled = a.dot(u + w_sampled);
    const double unit = theta * u.norm() * a.norm();
    if (closed > sampled + 1e-12 * (1.0 + std::abs(sampled))) dominated = false;
    worst_gap = std::max(worst_gap, (sampled - closed) / unit);
  }
  r.measured = worst_gap;
  r.passed = dominated && worst_gap <= r.threshold;
  if (!dominated) r.detail = "a sampled w beat the closed form";
  return r;
}

CheckResult check_identity(std::mt19937_64& rng, int instances) {
  std::uniform_real_distribution<double> th(0.05, 0.9);
  CheckResult r;
  r.threshold = 1e-10;
  r.instances = instances;
  for (int k = 0; k < instances; ++k) {
    const Eigen::Index m = 1 + k % 3;
    const Vector u = normal_vector(rng, m);
    const RowVector a = normal_vector(rng, m).transpose();
    const double theta = th(rng);
    const double lambda = optimal_multiplier(u, a, theta);
    const Vector from_multiplier = -(1.0 / (2.0 * lambda)) * a.transpose();
    const Vector w = worst_case_input(u, a, theta);
    r.measured = std::max(r.measured, (w - from_multiplier).norm() / w.norm());
  }
  r.passed = r.measured <= r.threshold;
  return r;
}

CheckResult check_agreement(std::mt19937_64& rng, int instances, const VerifyOptions& opts) {
  CheckResult r;
  r.threshold = 1e-6;
  r.instances = instances;
  double worst_q = 0.0;
  int failures = 0;
  for (int k = 0; k < instances; ++k) {
    FilterProblem prob = random_scalar_instance(rng);
    const FilterResult scalar = opts.scalar_filter(prob);
    prob.mode = FilterMode::socp;
    const FilterResult socp = filter_socp(prob);
    const FilterResult qp = filter_qp_channels(prob);
    if (scalar.status != FilterStatus::ok || socp.status != FilterStatus::ok ||
        qp.status != FilterStatus::ok) {
      ++failures;
      continue;
    }
    r.measured = std::max({r.measured, std::abs(scalar.u(0) - socp.u(0)),
                           std::abs(scalar.u(0) - qp.u(0))});
    if (socp.q_star) worst_q = std::max(worst_q, std::abs(2.0 * *socp.q_star - socp.u.squaredNorm()));
  }
  r.passed = failures == 0 && r.measured <= r.threshold && worst_q <= 1e-6;
  std::ostringstream os;
  os << "max |2q* - ||u*||^2| = " << worst_q;
  if (failures > 0) os << ", " << failures << " solver failures";
  r.detail = os.str();
  return r;
}

CheckResult check_uniqueness(std::mt19937_64& rng, int instances) {
  std::uniform_real_distribution<double> th(0.0, 0.9);
  CheckResult r;
  r.threshold = 1e-8;
  r.instances = 0;
  int failures = 0;
  for (int k = 0; k < instances; ++k) {
    const Eigen::Index m = 1 + k % 3;
    FilterProblem prob;
    prob.u0 = uniform_vector(rng, m, -10.0, 10.0);
    prob.constraint.p = uniform_vector(rng, 1, -10.0, 10.0)(0);
    prob.constraint.a = uniform_vector(rng, m, -10.0, 10.0).transpose();
    Vector theta(m);
    for (Eigen::Index i = 0; i < m; ++i) theta(i) = th(rng);
    prob.theta = theta;
    const FilterResult res = filter_qp_channels(prob);
    if (res.status != FilterStatus::ok) {
      ++failures;
      continue;
    }
    if (!res.solver_invoked) continue;
    ++r.instances;
    r.measured = std::max(r.measured, res.u_pos->cwiseMin(*res.u_neg).maxCoeff());
  }
  r.passed = failures == 0 && r.measured <= r.threshold;
  if (failures > 0) r.detail = std::to_string(failures) + " solver failures";
  return r;
}

CheckResult check_reduction(std::mt19937_64& rng, int instances) {
  CheckResult r;
  r.threshold = 1e-8;
  r.instances = instances;
  int failures = 0;
  for (int k = 0; k < instances; ++k) {
    const Eigen::Index m = 1 + k % 3;
    FilterProblem prob;
    prob.u0 = uniform_vector(rng, m, -10.0, 10.0);
    prob.constraint.p = uniform_vector(rng, 1, -10.0, 10.0)(0);
    prob.constraint.a = uniform_vector(rng, m, -10.0, 10.0).transpose();
    prob.theta = 0.0;
    prob.mode = FilterMode::socp;
    const FilterResult res = filter_socp(prob);
    if (res.status != FilterStatus::ok) {
      ++failures;
      continue;
    }
    const RowVector& a = prob.constraint.a;
    const double slack = prob.constraint.p + a.dot(prob.u0);
    Vector expected = prob.u0;
    if (slack < 0.0) expected += a.transpose() * (-slack / a.squaredNorm());
    r.measured = std::max(r.measured, (res.u - expected).norm());
  }
  r.passed = failures == 0 && r.measured <= r.threshold;
  if (failures > 0) r.detail = std::to_string(failures) + " solver failures";
  return r;
}

// Smooth closed loop: the LQR feedback is evaluated inside every RK4 stage.
CheckResult check_rk4_order() {
  const VehicleParams vp;
  const SystemModel open = build_vehicle_model(vp);
  const auto baseline = lqr_baseline(LqrGain::published());
  SystemModel closed = open;
  closed.f = [open, baseline](const Vector& x) -> Vector {
    return open.f(x) + open.g(x) * baseline(x);
  };
  Vector x0(5);
  x0 << 2.0, 0.0, 0.0, 0.0, -20.0;
  const NormalizedUncertainty unc;
  const Vector zero = Vector::Zero(1);
  const double horizon = 1.0;
  auto run = [&](double dt) {
    Vector x = x0;
    const auto steps = std::llround(horizon / dt);
    for (long long k = 0; k < steps; ++k) x = step_rk4(closed, unc, x, zero, zero, dt);
    return x;
  };
  const double dt = 0.01;
  const Vector reference = run(dt / 8.0);
  const double coarse = (run(dt) - reference).norm();
  const double fine = (run(dt / 2.0) - reference).norm();

  CheckResult r;
  r.threshold = 8.0;
  r.instances = 3;
  r.measured = coarse / fine;
  r.passed = std::isfinite(r.measured) && r.measured >= r.threshold;
  std::ostringstream os;
  os << "error(dt) = " << coarse << ", error(dt/2) = " << fine;
  r.detail = os.str();
  return r;
}

}  // namespace

VerifyDepth verify_depth_from_string(const std::string& name) {
  if (name == "quick") return VerifyDepth::quick;
  if (name == "full") return VerifyDepth::full;
  throw std::invalid_argument("unknown verification depth '" + name + "' (quick, full)");
}

std::vector<CheckResult> run_verification(const VerifyOptions& opts) {
  const Sizes n = sizes_for(opts.depth);
  std::vector<CheckResult> out;
  // One stream per check keeps each check's instances independent of the others.
  auto rng_for = [&](std::uint64_t salt) { return std::mt19937_64(opts.seed * 0x9e3779b97f4a7c15ULL + salt); };

  {
    auto rng = rng_for(1);
    out.push_back(timed("worst_case_oracle", [&] { return check_oracle(rng, n.oracle); }));
  }
  {
    auto rng = rng_for(2);
    out.push_back(timed("multiplier_identity", [&] { return check_identity(rng, n.identity); }));
  }
  {
    auto rng = rng_for(3);
    out.push_back(
        timed("three_solver_agreement", [&] { return check_agreement(rng, n.agreement, opts); }));
  }
  {
    auto rng = rng_for(4);
    out.push_back(timed("qp_split_uniqueness", [&] { return check_uniqueness(rng, n.uniqueness); }));
  }
  {
    auto rng = rng_for(5);
    out.push_back(timed("theta_zero_reduction", [&] { return check_reduction(rng, n.reduction); }));
  }
  out.push_back(timed("rk4_order", [] { return check_rk4_order(); }));
  return out;
}

void print_verification(std::ostream& os, const std::vector<CheckResult>& results) {
  os << std::left << std::setw(24) << "check" << std::setw(6) << "result" << std::setw(10)
     << " cases" << std::setw(14) << " measured" << std::setw(12) << " bound" << " seconds\n";
  for (const CheckResult& r : results) {
    std::ostringstream measured, bound, secs;
    measured << std::setprecision(3) << r.measured;
    bound << std::setprecision(3) << r.threshold;
    secs << std::fixed << std::setprecision(3) << r.seconds;
    os << std::left << std::setw(24) << r.name << std::setw(6) << (r.passed ? "PASS" : "FAIL")
       << ' ' << std::setw(9) << r.instances << ' ' << std::setw(13) << measured.str() << ' '
       << std::setw(11) << bound.str() << ' ' << secs.str();
    if (!r.detail.empty()) os << "  (" << r.detail << ")";
    os << '\n';
  }
}

}  // namespace rcbf
