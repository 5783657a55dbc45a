#include <gtest/gtest.h>

#include <cmath>

#include "rcbf/vehicle_lateral.hpp"

using namespace rcbf;

namespace {

Vector initial_state() {
  Vector x(5);
  x << 2.0, 0.0, 0.0, 0.0, -20.0;
  return x;
}

}  // namespace

TEST(VehicleModel, MatrixEntries) {
  const VehicleParams vp;
  const Matrix A = vehicle_A(vp);
  const Vector B = vehicle_B(vp);
  // (Cf + Cr) = -227200, m U = 46760, m = 1670, Iz = 2100
  EXPECT_NEAR(A(1, 1), -227200.0 / 46760.0, 1e-12);
  EXPECT_NEAR(A(1, 1), -4.859, 5e-4);
  EXPECT_NEAR(A(1, 2), 227200.0 / 1670.0, 1e-9);
  EXPECT_NEAR(A(1, 3), (0.99 * -1.23e5 - 1.7 * -1.042e5) / 46760.0, 1e-12);
  EXPECT_NEAR(A(3, 3), (0.99 * 0.99 * -1.23e5 + 1.7 * 1.7 * -1.042e5) / (2100.0 * 28.0), 1e-12);
  EXPECT_DOUBLE_EQ(A(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(A(2, 3), 1.0);
  EXPECT_TRUE(A.row(4).isZero());
  EXPECT_NEAR(B(1), 73.65, 5e-3);
  EXPECT_NEAR(B(3), 0.99 * 1.23e5 / 2100.0, 1e-12);
  EXPECT_EQ(B(0), 0.0);
  EXPECT_EQ(B(2), 0.0);
  EXPECT_EQ(B(4), 0.0);
}

TEST(VehicleModel, DriftIsAffine) {
  const SystemModel model = build_vehicle_model({});
  Vector offset = Vector::Zero(5);
  offset(kS) = 28.0;
  Vector x(5);
  x << 0.3, -1.2, 0.05, 0.4, 7.0;
  EXPECT_NEAR(((model.f(2.0 * x) - offset) - 2.0 * (model.f(x) - offset)).norm(), 0.0, 1e-10);
  EXPECT_NEAR((model.f_jacobian(x) - vehicle_A({})).norm(), 0.0, 0.0);
}

TEST(VehicleModel, RejectsBadParameters) {
  VehicleParams vp;
  vp.C_alpha_f = 1.0e5;
  EXPECT_THROW(vehicle_A(vp), std::invalid_argument);
  vp = {};
  vp.U_speed = 0.0;
  EXPECT_THROW(build_vehicle_model(vp), std::invalid_argument);
}

TEST(ObstacleBarrier, InitialValues) {
  const BarrierFunction bf = obstacle_barrier(3.0);
  const SystemModel model = build_vehicle_model({});
  const Vector x0 = initial_state();
  EXPECT_DOUBLE_EQ(bf.h(x0), 395.0);
  EXPECT_DOUBLE_EQ(bf.grad(x0).dot(model.f(x0)), -1120.0);
  EXPECT_DOUBLE_EQ(obstacle_distance(x0), std::hypot(2.0, 20.0));
  EXPECT_DOUBLE_EQ(lqr_baseline(LqrGain::published())(x0)(0), -2.82);
  EXPECT_THROW(obstacle_barrier(0.0), std::invalid_argument);
}

TEST(ObstacleBarrier, RelativeDegreeTwo) {
  const BarrierFunction bf = obstacle_barrier(3.0);
  const SystemModel model = build_vehicle_model({});
  const auto lie = lie_derivatives(model, bf, {0.5, 1.0}, initial_state());
  EXPECT_EQ(lie.lgt_h.norm(), 0.0);
  EXPECT_NO_THROW(validate_relative_degree(model, bf, {0.5, 1.0}, initial_state()));
}

TEST(ObstacleBarrier, SecondOrderConditionByHand) {
  // L_f h = 2 e edot + 2 s U, so grad(L_f h) = (2 edot, 2 e, 0, 0, 2 U).
  const BarrierFunction bf = obstacle_barrier(3.0);
  const SystemModel model = build_vehicle_model({});
  const auto c = assemble_recbf(model, bf, {0.5, 1.0}, pole_gains({-30.0, -30.0}), initial_state());
  const double U = 28.0;
  const double lf2 = 2.0 * U * U;
  EXPECT_NEAR(c.p, lf2 + 60.0 * -1120.0 + 900.0 * 395.0, 1e-6);
  EXPECT_NEAR(c.a(0), 2.0 * 2.0 * 1.23e5 / 1670.0, 1e-8);
}

TEST(ObstacleBarrier, SecondDerivativeAlongState) {
  // h'' from the quadratic form: 2 (edot^2 + e e'' + s'^2 + s s''), s'' = 0.
  const BarrierFunction bf = obstacle_barrier(3.0);
  const SystemModel model = build_vehicle_model({});
  const Matrix A = vehicle_A({});
  const Vector B = vehicle_B({});
  Vector x(5);
  x << 1.1, -0.7, 0.02, 0.3, -6.0;
  const double v = 0.4;
  const Vector xdot = model.f(x) + B * v;
  const double eddot = A.row(1).dot(x) + B(1) * v;
  const double hddot = 2.0 * (xdot(0) * xdot(0) + x(0) * eddot + xdot(4) * xdot(4));
  const auto second = second_lie_derivatives(model, bf, {0.0, 1.0}, x);
  EXPECT_NEAR(second.lf2_h + second.lgt_lf_h(0) * v, hddot, 1e-9 * std::abs(hddot));
}

TEST(Lqr, ClosedLoopDecays) {
  VehicleScenarioConfig cfg;
  cfg.filter_enabled = false;
  cfg.adversary = AdversaryKind::nominal;
  cfg.plant_theta = 0.0;
  cfg.s0 = 40.0;
  const Trajectory traj = simulate(build_scenario(cfg));
  const double start = traj.states.front().head(4).norm();
  EXPECT_LT(traj.states.back().head(4).norm(), 0.05 * start);
}

TEST(Presets, Contents) {
  const auto& presets = preset_scenarios();
  ASSERT_EQ(presets.size(), 4u);
  const ScenarioPreset* lqr = find_preset("fig3_lqr");
  ASSERT_NE(lqr, nullptr);
  EXPECT_FALSE(lqr->base.filter_enabled);
  const ScenarioPreset* ecbf = find_preset("fig3_ecbf");
  ASSERT_NE(ecbf, nullptr);
  EXPECT_EQ(ecbf->base.design_theta, 0.0);
  EXPECT_EQ(ecbf->base.plant_theta, 0.5);
  const ScenarioPreset* recbf = find_preset("fig3_recbf");
  ASSERT_NE(recbf, nullptr);
  EXPECT_EQ(recbf->base.design_theta, 0.5);
  EXPECT_EQ(recbf->base.adversary, AdversaryKind::worst_case);
  const ScenarioPreset* sweep = find_preset("fig4_sweep");
  ASSERT_NE(sweep, nullptr);
  EXPECT_EQ(sweep->sweep_thetas, (std::vector<double>{0.2, 0.4, 0.6, 0.8}));
  EXPECT_EQ(sweep->base.adversary, AdversaryKind::nominal);
  EXPECT_EQ(find_preset("fig5"), nullptr);
  for (const ScenarioPreset& p : presets) {
    EXPECT_EQ(p.base.d, 3.0);
    EXPECT_EQ(p.base.s0, -20.0);
    EXPECT_EQ(p.base.x0[0], 2.0);
    EXPECT_EQ(p.base.poles, (std::array<double, 2>{-30.0, -30.0}));
    EXPECT_EQ(p.base.dt, 1e-3);
    EXPECT_EQ(p.base.horizon, 2.0);
  }
}

TEST(ScenarioConfig, ValidateNamesTheField) {
  VehicleScenarioConfig cfg;
  cfg.design_theta = 1.2;
  try {
    cfg.validate();
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "uncertainty.design_theta");
  }
  cfg = {};
  cfg.s0 = 1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.adversary = AdversaryKind::scripted;
  cfg.nonlinearity = "saturation";
  cfg.saturation_limit = -1.0;
  try {
    cfg.validate();
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "uncertainty.nonlinearity");
  }
}

TEST(Presets, QualitativeOutcome) {
  auto run = [](const char* name) {
    return trajectory_metrics(simulate(build_scenario(find_preset(name)->base)), obstacle_distance);
  };
  const TrajectoryMetrics lqr = run("fig3_lqr");
  const TrajectoryMetrics ecbf = run("fig3_ecbf");
  const TrajectoryMetrics recbf = run("fig3_recbf");
  EXPECT_TRUE(lqr.violation);
  EXPECT_TRUE(ecbf.violation);
  EXPECT_FALSE(recbf.violation);
  EXPECT_GT(recbf.min_h, 0.0);
  EXPECT_LT(lqr.min_h, ecbf.min_h);
}
