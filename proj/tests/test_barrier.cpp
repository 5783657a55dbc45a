#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rcbf/barrier.hpp"

using namespace rcbf;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (const double x : v) out(i++) = x;
  return out;
}

// x' = (-x1 + x2^2, sin x1) + g(x) v, g = [[1, 0], [x1, 2]]; smooth and fully actuated.
SystemModel planar_model() {
  SystemModel m;
  m.n = 2;
  m.m = 2;
  m.f = [](const Vector& x) { return vec({-x(0) + x(1) * x(1), std::sin(x(0))}); };
  m.g = [](const Vector& x) {
    Matrix g(2, 2);
    g << 1.0, 0.0, x(0), 2.0;
    return g;
  };
  return m;
}

// h = 4 - x1^2 - 0.5 x2^2
BarrierFunction ellipse_barrier() {
  BarrierFunction bf;
  bf.h = [](const Vector& x) { return 4.0 - x(0) * x(0) - 0.5 * x(1) * x(1); };
  bf.grad = [](const Vector& x) {
    RowVector r(2);
    r << -2.0 * x(0), -x(1);
    return r;
  };
  bf.relative_degree = 1;
  return bf;
}

// Double integrator (p, v) with a nonlinear drag, input on v only.
SystemModel double_integrator(bool with_jacobian) {
  SystemModel m;
  m.n = 2;
  m.m = 1;
  m.f = [](const Vector& x) { return vec({x(1), -0.3 * x(1) * std::abs(x(1))}); };
  m.g = [](const Vector&) {
    Matrix g(2, 1);
    g << 0.0, 1.0;
    return g;
  };
  if (with_jacobian) {
    m.f_jacobian = [](const Vector& x) {
      Matrix j(2, 2);
      j << 0.0, 1.0, 0.0, -0.6 * std::abs(x(1));
      return j;
    };
  }
  return m;
}

// h = 1 - p^3 / 3 - p (relative degree 2 w.r.t. the v input)
BarrierFunction cubic_wall(bool with_hessian) {
  BarrierFunction bf;
  bf.h = [](const Vector& x) { return 1.0 - x(0) * x(0) * x(0) / 3.0 - x(0); };
  bf.grad = [](const Vector& x) {
    RowVector r(2);
    r << -x(0) * x(0) - 1.0, 0.0;
    return r;
  };
  if (with_hessian) {
    bf.hessian = [](const Vector& x) {
      Matrix h = Matrix::Zero(2, 2);
      h(0, 0) = -2.0 * x(0);
      return h;
    };
  }
  bf.relative_degree = 2;
  return bf;
}

// x(t + dt) for constant v with a small classical RK4 step, independent of the library.
Vector flow(const SystemModel& m, double scale, const Vector& x, const Vector& uw, double dt) {
  auto rhs = [&](const Vector& y) -> Vector { return m.f(y) + scale * m.g(y) * uw; };
  const Vector k1 = rhs(x);
  const Vector k2 = rhs(x + 0.5 * dt * k1);
  const Vector k3 = rhs(x + 0.5 * dt * k2);
  const Vector k4 = rhs(x + dt * k3);
  return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

TEST(LieDerivatives, ScalarIntegrator) {
  SystemModel m;
  m.n = 1;
  m.m = 1;
  m.f = [](const Vector&) { return vec({0.0}); };
  m.g = [](const Vector&) { return Matrix::Identity(1, 1); };
  BarrierFunction bf;
  bf.h = [](const Vector& x) { return x(0); };
  bf.grad = [](const Vector&) { return RowVector::Ones(1); };
  const auto lie = lie_derivatives(m, bf, {0.3, 1.7}, vec({2.0}));
  EXPECT_DOUBLE_EQ(lie.lf_h, 0.0);
  EXPECT_DOUBLE_EQ(lie.lgt_h(0), 1.7);
}

TEST(LieDerivatives, UnitScaleMatchesUnscaled) {
  const auto m = planar_model();
  const auto bf = ellipse_barrier();
  const Vector x = vec({0.4, -1.1});
  const auto lie = lie_derivatives(m, bf, normalize_sector({0.6, 1.4}), x);
  const RowVector lgh = bf.grad(x) * m.g(x);
  EXPECT_NEAR((lie.lgt_h - lgh).norm(), 0.0, 1e-15);
}

TEST(Barrier, GradientMatchesFiniteDifferences) {
  const auto bf = ellipse_barrier();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> box(-3.0, 3.0);
  for (int k = 0; k < 1000; ++k) {
    const Vector x = vec({box(rng), box(rng)});
    RowVector fd(2);
    for (int i = 0; i < 2; ++i) {
      const double h = 1e-6 * (1.0 + std::abs(x(i)));
      Vector xp = x, xm = x;
      xp(i) += h;
      xm(i) -= h;
      fd(i) = (bf.h(xp) - bf.h(xm)) / (2.0 * h);
    }
    const RowVector g = bf.grad(x);
    EXPECT_LE((g - fd).norm(), 1e-5 * std::max(1.0, g.norm()));
  }
}

TEST(PoleGains, Examples) {
  const auto g30 = pole_gains({-30.0, -30.0});
  EXPECT_DOUBLE_EQ(g30.k0, 900.0);
  EXPECT_DOUBLE_EQ(g30.k1, 60.0);
  const auto g1 = pole_gains({-1.0, -1.0});
  EXPECT_DOUBLE_EQ(g1.k0, 1.0);
  EXPECT_DOUBLE_EQ(g1.k1, 2.0);
  EXPECT_THROW(pole_gains({0.0, -1.0}), std::invalid_argument);
  EXPECT_THROW(pole_gains({-1.0, 2.0}), std::invalid_argument);
}

TEST(ClassK, LinearAndCubic) {
  EXPECT_DOUBLE_EQ((ClassKGain{ClassKGain::Kind::linear, 2.0})(-1.5), -3.0);
  EXPECT_DOUBLE_EQ((ClassKGain{ClassKGain::Kind::cubic, 2.0})(-1.5), -6.75);
}

TEST(AssembleRcbf, ChainRuleAlongClosedLoop) {
  // d/dt h = p - eta(h) + a (u + w), checked with a finite difference of h along the flow.
  const auto m = planar_model();
  const auto bf = ellipse_barrier();
  const NormalizedUncertainty unc = normalize_sector({0.5, 2.0});
  const ClassKGain eta{ClassKGain::Kind::linear, 1.3};
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> box(-1.5, 1.5);
  for (int k = 0; k < 200; ++k) {
    const Vector x = vec({box(rng), box(rng)});
    const Vector u = vec({box(rng), box(rng)});
    Vector w = vec({box(rng), box(rng)});
    w *= unc.theta * u.norm() / std::max(w.norm(), 1e-12);
    const auto c = assemble_rcbf(m, bf, unc, eta, x);
    const double dt = 1e-5;
    const double hdot = (bf.h(flow(m, unc.scale, x, u + w, dt)) -
                         bf.h(flow(m, unc.scale, x, u + w, -dt))) /
                        (2.0 * dt);
    EXPECT_NEAR(hdot, c.p - eta(bf.h(x)) + c.a.dot(u + w), 1e-6);
  }
}

TEST(AssembleRcbf, ThetaZeroIsNominalCondition) {
  const auto m = planar_model();
  const auto bf = ellipse_barrier();
  const Vector x = vec({0.3, 0.7});
  const auto c = assemble_rcbf(m, bf, {0.0, 1.0}, {}, x);
  // nominal: grad f + grad g u + h
  const Vector u = vec({-0.4, 1.2});
  const double nominal = bf.grad(x).dot(m.f(x)) + bf.grad(x) * m.g(x) * u + bf.h(x);
  EXPECT_NEAR(c.robust_margin(u, 0.0), nominal, 1e-14);
}

TEST(AssembleRcbf, RejectsDegreeTwo) {
  EXPECT_THROW(assemble_rcbf(double_integrator(false), cubic_wall(false), {}, {}, vec({0, 0})),
               std::invalid_argument);
}

TEST(RobustMargin, CoupledAndPerChannel) {
  LinearizedConstraint c;
  c.p = 1.0;
  c.a = vec({2.0, -1.0}).transpose();
  const Vector u = vec({0.5, 1.5});
  EXPECT_NEAR(c.robust_margin(u, 0.2), 1.0 + 1.0 - 1.5 - 0.2 * u.norm() * std::sqrt(5.0), 1e-14);
  EXPECT_NEAR(c.robust_margin(u, vec({0.2, 0.4})), 0.5 - 0.2 * 2.0 * 0.5 - 0.4 * 1.0 * 1.5,
              1e-14);
}

TEST(SecondLie, AnalyticAndFiniteDifferencePathsAgree) {
  const auto unc = normalize_sector({0.5, 1.5});
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> box(-2.0, 2.0);
  for (int k = 0; k < 100; ++k) {
    const Vector x = vec({box(rng), box(rng)});
    const auto exact = second_lie_derivatives(double_integrator(true), cubic_wall(true), unc, x);
    const auto fd = second_lie_derivatives(double_integrator(false), cubic_wall(false), unc, x);
    EXPECT_NEAR(exact.lf2_h, fd.lf2_h, 1e-6 * (1.0 + std::abs(exact.lf2_h)));
    EXPECT_NEAR(exact.lgt_lf_h(0), fd.lgt_lf_h(0), 1e-6 * (1.0 + std::abs(exact.lgt_lf_h(0))));
  }
}

TEST(AssembleRecbf, SecondDerivativeAlongFlow) {
  // h'' + k1 h' + k0 h = p + a (u + w)
  const auto m = double_integrator(true);
  const auto bf = cubic_wall(true);
  const auto unc = normalize_sector({0.5, 1.5});
  const EcbfGains gains = pole_gains({-2.0, -3.0});
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> box(-1.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    const Vector x = vec({box(rng), box(rng)});
    const Vector uw = vec({box(rng)});
    const auto c = assemble_recbf(m, bf, unc, gains, x);
    const double dt = 1e-4;
    const double hp = bf.h(flow(m, unc.scale, x, uw, dt));
    const double hm = bf.h(flow(m, unc.scale, x, uw, -dt));
    const double h0 = bf.h(x);
    const double hddot = (hp - 2.0 * h0 + hm) / (dt * dt);
    const double hdot = (hp - hm) / (2.0 * dt);
    EXPECT_NEAR(hddot + gains.k1 * hdot + gains.k0 * h0, c.p + c.a.dot(uw), 1e-5);
  }
}

TEST(AssembleRecbf, FlagsDegenerateDirection) {
  BarrierFunction flat;
  flat.h = [](const Vector&) { return 1.0; };
  flat.grad = [](const Vector&) { return RowVector::Zero(2); };
  flat.hessian = [](const Vector&) { return Matrix::Zero(2, 2); };
  flat.relative_degree = 2;
  const auto c = assemble_recbf(double_integrator(true), flat, {}, {1.0, 2.0}, vec({0.0, 0.0}));
  EXPECT_TRUE(c.degenerate);
  EXPECT_DOUBLE_EQ(c.p, 1.0);
}

TEST(RelativeDegree, DetectsMisdeclaredBarrier) {
  const auto m = planar_model();
  auto bf = ellipse_barrier();
  bf.relative_degree = 2;
  EXPECT_THROW(validate_relative_degree(m, bf, {}, vec({1.0, 1.0})), std::invalid_argument);
  EXPECT_NO_THROW(validate_relative_degree(double_integrator(false), cubic_wall(false), {},
                                           vec({0.2, 0.1})));
}
