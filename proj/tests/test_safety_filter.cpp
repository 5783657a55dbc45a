#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rcbf/safety_filter.hpp"

using namespace rcbf;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (const double x : v) out(i++) = x;
  return out;
}

FilterProblem problem(const Vector& u0, double p, const Vector& a, UncertaintyLevel theta,
                      FilterMode mode = FilterMode::automatic) {
  FilterProblem prob;
  prob.u0 = u0;
  prob.constraint.p = p;
  prob.constraint.a = a.transpose();
  prob.theta = std::move(theta);
  prob.mode = mode;
  return prob;
}

// Random instance with an unsafe nominal input.
FilterProblem random_unsafe(std::mt19937_64& rng, double theta) {
  std::normal_distribution<double> gauss;
  for (;;) {
    FilterProblem prob = problem(vec({gauss(rng), gauss(rng)}), 2.0 * gauss(rng),
                                 vec({gauss(rng), gauss(rng)}), theta);
    if (prob.constraint.robust_margin(prob.u0, theta) < -0.05) return prob;
  }
}

}  // namespace

TEST(FilterSocp, ScalarExample) {
  const auto r = filter_socp(problem(vec({0.0}), -1.0, vec({1.0}), 0.5));
  ASSERT_EQ(r.status, FilterStatus::ok);
  EXPECT_NEAR(r.u(0), 2.0, 1e-7);
  ASSERT_TRUE(r.q_star.has_value());
  EXPECT_NEAR(*r.q_star, 2.0, 1e-6);
  EXPECT_TRUE(r.altered);
  EXPECT_TRUE(r.solver_invoked);
}

TEST(FilterSocp, ThetaZeroIsHalfSpaceProjection) {
  const auto r = filter_socp(problem(vec({0.0, 0.0}), -1.0, vec({1.0, 0.0}), 0.0));
  ASSERT_EQ(r.status, FilterStatus::ok);
  EXPECT_NEAR((r.u - vec({1.0, 0.0})).norm(), 0.0, 1e-7);
}

TEST(FilterScalar, Examples) {
  EXPECT_DOUBLE_EQ(filter_scalar(problem(vec({0.0}), -1.0, vec({1.0}), 0.5)).u(0), 2.0);
  EXPECT_DOUBLE_EQ(filter_scalar(problem(vec({0.0}), -1.0, vec({-1.0}), 0.5)).u(0), -2.0);
  const auto safe = filter_scalar(problem(vec({0.0}), 1.0, vec({1.0}), 0.5));
  EXPECT_DOUBLE_EQ(safe.u(0), 0.0);
  EXPECT_FALSE(safe.altered);
  EXPECT_FALSE(safe.solver_invoked);
  // -1 + 3 - 1.5 >= 0 already holds
  EXPECT_DOUBLE_EQ(filter_scalar(problem(vec({3.0}), -1.0, vec({1.0}), 0.5)).u(0), 3.0);
}

TEST(FilterScalar, InputBoundInfeasible) {
  auto prob = problem(vec({0.0}), -10.0, vec({1.0}), 0.5);
  prob.input_bound = 1.0;
  const auto r = filter_scalar(prob);
  EXPECT_EQ(r.status, FilterStatus::infeasible);
  EXPECT_DOUBLE_EQ(r.u(0), 0.0);
  EXPECT_FALSE(r.altered);
  prob.input_bound = 50.0;
  EXPECT_DOUBLE_EQ(filter_scalar(prob).u(0), 20.0);
}

TEST(FilterQp, PerChannelExamples) {
  const Vector theta = vec({0.5, 0.5});
  const auto r1 = filter_qp_channels(problem(vec({0.0, 0.0}), -1.0, vec({1.0, 0.0}), theta));
  ASSERT_EQ(r1.status, FilterStatus::ok);
  EXPECT_NEAR((r1.u - vec({2.0, 0.0})).norm(), 0.0, 1e-7);
  const auto r2 = filter_qp_channels(problem(vec({0.0, 0.0}), -1.0, vec({0.0, 1.0}), theta));
  EXPECT_NEAR((r2.u - vec({0.0, 2.0})).norm(), 0.0, 1e-7);
  ASSERT_TRUE(r2.u_pos && r2.u_neg);
  EXPECT_GE(r2.u_pos->minCoeff(), -1e-12);
  EXPECT_GE(r2.u_neg->minCoeff(), -1e-12);
  EXPECT_NEAR((*r2.u_pos - *r2.u_neg - r2.u).norm(), 0.0, 1e-12);
}

TEST(Filter, Dispatch) {
  EXPECT_EQ(filter(problem(vec({0.0}), -1.0, vec({1.0}), 0.5)).path,
            FilterMode::scalar_closed_form);
  EXPECT_EQ(filter(problem(vec({0.0, 0.0}), -1.0, vec({1.0, 1.0}), 0.5)).path, FilterMode::socp);
  EXPECT_EQ(filter(problem(vec({0.0, 0.0}), -1.0, vec({1.0, 1.0}), vec({0.5, 0.2}))).path,
            FilterMode::qp_channels);
  EXPECT_EQ(filter(problem(vec({0.0}), -1.0, vec({1.0}), 0.5, FilterMode::socp)).path,
            FilterMode::socp);
  EXPECT_EQ(filter_mode_from_string("scalar"), FilterMode::scalar_closed_form);
  EXPECT_EQ(filter_mode_from_string("qp"), FilterMode::qp_channels);
  EXPECT_EQ(filter_mode_from_string("auto"), FilterMode::automatic);
  EXPECT_THROW(filter_mode_from_string("lp"), std::invalid_argument);
}

TEST(Filter, RejectsInvalidProblems) {
  EXPECT_THROW(filter(problem(vec({0.0}), -1.0, vec({1.0}), 1.0)), std::invalid_argument);
  EXPECT_THROW(filter(problem(vec({0.0}), -1.0, vec({1.0}), -0.1)), std::invalid_argument);
  EXPECT_THROW(filter(problem(vec({0.0, 0.0}), -1.0, vec({1.0}), 0.1)), std::invalid_argument);
  EXPECT_THROW(filter(problem(vec({0.0, 0.0}), -1.0, vec({1.0, 0.0}), vec({0.1}))),
               std::invalid_argument);
  auto bad_box = problem(vec({0.0}), -1.0, vec({1.0}), 0.1);
  bad_box.input_bound = 0.0;
  EXPECT_THROW(filter(bad_box), std::invalid_argument);
  EXPECT_THROW(filter_scalar(problem(vec({0.0, 0.0}), -1.0, vec({1.0, 0.0}), 0.1)),
               std::invalid_argument);
}

TEST(Filter, DegenerateGradient) {
  for (const FilterMode mode :
       {FilterMode::socp, FilterMode::qp_channels, FilterMode::scalar_closed_form}) {
    const UncertaintyLevel theta =
        mode == FilterMode::qp_channels ? UncertaintyLevel(vec({0.3})) : UncertaintyLevel(0.3);
    const auto bad = filter(problem(vec({1.5}), -1.0, vec({0.0}), theta, mode));
    EXPECT_EQ(bad.status, FilterStatus::infeasible_degenerate);
    EXPECT_DOUBLE_EQ(bad.u(0), 1.5);
    EXPECT_FALSE(bad.altered);
    const auto fine = filter(problem(vec({1.5}), 1.0, vec({0.0}), theta, mode));
    EXPECT_EQ(fine.status, FilterStatus::ok);
    EXPECT_DOUBLE_EQ(fine.u(0), 1.5);
  }
}

TEST(FilterProperty, NoFeasibleGridPointIsCloser) {
  std::mt19937_64 rng(31);
  for (int k = 0; k < 30; ++k) {
    const double theta = 0.6 * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const FilterProblem prob = random_unsafe(rng, theta);
    const auto r = filter(prob);
    ASSERT_EQ(r.status, FilterStatus::ok);
    const double dist = (r.u - prob.u0).norm();
    EXPECT_GE(r.margin, -1e-8);
    constexpr int kN = 201;
    const double half = dist + 0.5;
    for (int i = 0; i < kN; ++i) {
      for (int j = 0; j < kN; ++j) {
        const Vector u =
            prob.u0 + vec({-half + 2.0 * half * i / (kN - 1), -half + 2.0 * half * j / (kN - 1)});
        if (prob.constraint.robust_margin(u, theta) >= 0.0) {
          EXPECT_GE((u - prob.u0).norm(), dist - 1e-7) << "instance " << k;
        }
      }
    }
  }
}

TEST(FilterProperty, RobustMarginHoldsForEveryAdmissibleDisturbance) {
  std::mt19937_64 rng(32);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    const double theta = 0.9 * unit(rng);
    const FilterProblem prob = random_unsafe(rng, theta);
    const auto r = filter(prob);
    ASSERT_EQ(r.status, FilterStatus::ok);
    const double radius = theta * r.u.norm();
    for (int s = 0; s < 1000; ++s) {
      Vector w = vec({gauss(rng), gauss(rng)});
      w *= radius * std::sqrt(unit(rng)) / w.norm();
      EXPECT_GE(prob.constraint.p + prob.constraint.a.dot(r.u + w), -1e-7);
    }
    EXPECT_GE(prob.constraint.p + prob.constraint.a.dot(r.u + r.w_star), -1e-7);
  }
}

TEST(FilterProperty, ModificationGrowsWithTheta) {
  std::mt19937_64 rng(33);
  for (int k = 0; k < 30; ++k) {
    const FilterProblem base = random_unsafe(rng, 0.0);
    double prev = 0.0;
    for (const double theta : {0.0, 0.1, 0.2, 0.4, 0.6, 0.8}) {
      FilterProblem prob = base;
      prob.theta = theta;
      const auto r = filter(prob);
      if (r.status != FilterStatus::ok) break;
      const double dist = (r.u - prob.u0).norm();
      EXPECT_GE(dist, prev - 1e-7);
      prev = dist;
    }
  }
}

TEST(FilterProperty, NonexpansiveInNominalInput) {
  // The robust set is convex, so the filter is a Euclidean projection.
  std::mt19937_64 rng(34);
  std::normal_distribution<double> gauss;
  for (int k = 0; k < 50; ++k) {
    const FilterProblem prob = random_unsafe(rng, 0.4);
    FilterProblem moved = prob;
    moved.u0 += 0.1 * vec({gauss(rng), gauss(rng)});
    const auto r1 = filter(prob);
    const auto r2 = filter(moved);
    EXPECT_LE((r1.u - r2.u).norm(), (prob.u0 - moved.u0).norm() + 1e-7);
  }
}
