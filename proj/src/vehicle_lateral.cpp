#include "rcbf/vehicle_lateral.hpp"

#include <cmath>
#include <stdexcept>

namespace rcbf {

namespace {

void require(bool ok, const char* field, const std::string& message) {
  if (!ok) throw ConfigError(field, message);
}

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

void VehicleParams::validate() const {
  require(finite_positive(m_mass), "system.mass", "must be > 0");
  require(finite_positive(Iz), "system.inertia", "must be > 0");
  require(finite_positive(a_front), "system.a_front", "must be > 0");
  require(finite_positive(b_rear), "system.b_rear", "must be > 0");
  require(finite_positive(U_speed), "system.speed", "must be > 0");
  require(std::isfinite(C_alpha_f) && C_alpha_f < 0.0, "system.c_alpha_f", "must be < 0");
  require(std::isfinite(C_alpha_r) && C_alpha_r < 0.0, "system.c_alpha_r", "must be < 0");
}

Matrix vehicle_A(const VehicleParams& vp) {
  vp.validate();
  const double m = vp.m_mass;
  const double U = vp.U_speed;
  const double a = vp.a_front;
  const double b = vp.b_rear;
  const double cf = vp.C_alpha_f;
  const double cr = vp.C_alpha_r;

  Matrix A = Matrix::Zero(5, 5);
  A(kE, kEdot) = 1.0;
  A(kEdot, kEdot) = (cf + cr) / (m * U);
  A(kEdot, kPsi) = -(cf + cr) / m;
  A(kEdot, kPsidot) = (a * cf - b * cr) / (m * U);
  A(kPsi, kPsidot) = 1.0;
  A(kPsidot, kEdot) = (a * cf - b * cr) / (vp.Iz * U);
  A(kPsidot, kPsi) = (a * cf - b * cr) / vp.Iz;
  A(kPsidot, kPsidot) = (a * a * cf + b * b * cr) / (vp.Iz * U);
  return A;
}

Vector vehicle_B(const VehicleParams& vp) {
  vp.validate();
  Vector B = Vector::Zero(5);
  B(kEdot) = -vp.C_alpha_f / vp.m_mass;
  B(kPsidot) = -vp.a_front * vp.C_alpha_f / vp.Iz;
  return B;
}

SystemModel build_vehicle_model(const VehicleParams& vp) {
  const Matrix A = vehicle_A(vp);
  const Matrix B = vehicle_B(vp);
  Vector offset = Vector::Zero(5);
  offset(kS) = vp.U_speed;

  SystemModel model;
  model.n = 5;
  model.m = 1;
  model.f = [A, offset](const Vector& x) -> Vector { return A * x + offset; };
  model.g = [B](const Vector&) -> Matrix { return B; };
  model.f_jacobian = [A](const Vector&) -> Matrix { return A; };
  model.labels = {"e", "edot", "psi", "psidot", "s"};
  return model;
}

LqrGain LqrGain::published() {
  LqrGain g;
  g.K.resize(4);
  g.K << 1.41, 0.41, 3.30, 0.24;
  g.r = Vector::Zero(4);
  return g;
}

std::function<Vector(const Vector&)> lqr_baseline(const LqrGain& gain) {
  if (gain.K.size() != 4 || gain.r.size() != 4 || !gain.K.allFinite() || !gain.r.allFinite()) {
    throw std::invalid_argument("lqr_baseline: K and r must be finite with length 4");
  }
  return [gain](const Vector& x) -> Vector {
    return Vector::Constant(1, gain.K.dot(gain.r - x.head(4)));
  };
}

BarrierFunction obstacle_barrier(double d) {
  if (!finite_positive(d)) throw std::invalid_argument("obstacle_barrier: d must be > 0");
  BarrierFunction bf;
  bf.h = [d](const Vector& x) { return x(kE) * x(kE) + x(kS) * x(kS) - d * d; };
  bf.grad = [](const Vector& x) -> RowVector {
    RowVector g = RowVector::Zero(x.size());
    g(kE) = 2.0 * x(kE);
    g(kS) = 2.0 * x(kS);
    return g;
  };
  bf.hessian = [](const Vector& x) -> Matrix {
    Matrix H = Matrix::Zero(x.size(), x.size());
    H(kE, kE) = 2.0;
    H(kS, kS) = 2.0;
    return H;
  };
  bf.relative_degree = 2;
  return bf;
}

double obstacle_distance(const Vector& x) { return std::hypot(x(kE), x(kS)); }

void VehicleScenarioConfig::validate() const {
  params.validate();
  require(finite_positive(d), "barrier.d", "must be > 0");
  for (const double pole : poles) {
    require(std::isfinite(pole) && pole < 0.0, "barrier.poles", "poles must be real and < 0");
  }
  require(design_theta >= 0.0 && design_theta < 1.0, "uncertainty.design_theta",
          "must lie in [0, 1)");
  require(plant_theta >= 0.0 && plant_theta < 1.0, "uncertainty.plant_theta",
          "must lie in [0, 1)");
  if (adversary == AdversaryKind::scripted) {
    try {
      make_config_nonlinearity(*this);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& ex) {
      throw ConfigError("uncertainty.nonlinearity", ex.what());
    }
  }
  if (input_bound) {
    require(finite_positive(*input_bound), "controller.input_bound", "must be > 0");
  }
  require(lqr.K.size() == 4 && lqr.K.allFinite(), "controller.gain", "expected 4 finite values");
  require(lqr.r.size() == 4 && lqr.r.allFinite(), "controller.reference",
          "expected 4 finite values");
  for (const double v : x0) require(std::isfinite(v), "simulation.x0", "must be finite");
  require(std::isfinite(s0), "simulation.s0", "must be finite");
  require(finite_positive(dt), "simulation.dt", "must be > 0");
  require(std::isfinite(horizon) && horizon >= dt, "simulation.horizon", "must be >= dt");
  require(x0[kE] * x0[kE] + s0 * s0 - d * d >= 0.0, "simulation.x0",
          "initial state lies inside the obstacle (h(x0) < 0)");
}

SectorNonlinearity make_config_nonlinearity(const VehicleScenarioConfig& cfg) {
  const SectorBound bound = sector_from_theta(cfg.plant_theta);
  if (cfg.nonlinearity == "identity") return make_identity();
  if (cfg.nonlinearity == "saturation") return make_saturation(bound, cfg.saturation_limit);
  if (cfg.nonlinearity == "time_varying_gain") {
    return make_time_varying_gain(bound, cfg.gain_mean, cfg.gain_amplitude, cfg.gain_frequency);
  }
  if (cfg.nonlinearity == "random") return make_random_in_sector(cfg.seed);
  throw ConfigError("uncertainty.nonlinearity", "unknown nonlinearity '" + cfg.nonlinearity +
                                                    "' (identity, saturation, "
                                                    "time_varying_gain, random)");
}

Scenario build_scenario(const VehicleScenarioConfig& cfg) {
  cfg.validate();
  Scenario sc;
  sc.name = cfg.name;
  sc.model = build_vehicle_model(cfg.params);
  sc.barrier = obstacle_barrier(cfg.d);
  sc.unc = normalize_sector(sector_from_theta(cfg.design_theta));
  sc.adversary.kind = cfg.adversary;
  sc.adversary.sector = sector_from_theta(cfg.plant_theta);
  if (cfg.adversary == AdversaryKind::scripted) {
    sc.adversary.scripted = make_config_nonlinearity(cfg);
  }
  sc.controller = lqr_baseline(cfg.lqr);
  sc.filter_enabled = cfg.filter_enabled;
  sc.filter_mode = cfg.filter_mode;
  sc.input_bound = cfg.input_bound;
  sc.gains = pole_gains(cfg.poles);
  sc.x0.resize(5);
  sc.x0 << cfg.x0[0], cfg.x0[1], cfg.x0[2], cfg.x0[3], cfg.s0;
  sc.dt = cfg.dt;
  sc.horizon = cfg.horizon;
  sc.distance = obstacle_distance;
  return sc;
}

const std::vector<ScenarioPreset>& preset_scenarios() {
  static const std::vector<ScenarioPreset> presets = [] {
    std::vector<ScenarioPreset> out;

    VehicleScenarioConfig lqr;
    lqr.name = "fig3_lqr";
    lqr.filter_enabled = false;
    out.push_back({lqr.name, lqr, {}});

    VehicleScenarioConfig ecbf;
    ecbf.name = "fig3_ecbf";
    ecbf.design_theta = 0.0;
    out.push_back({ecbf.name, ecbf, {}});

    VehicleScenarioConfig recbf;
    recbf.name = "fig3_recbf";
    out.push_back({recbf.name, recbf, {}});

    VehicleScenarioConfig sweep;
    sweep.name = "fig4_sweep";
    sweep.adversary = AdversaryKind::nominal;
    sweep.plant_theta = 0.0;
    sweep.design_theta = 0.2;
    out.push_back({sweep.name, sweep, {0.2, 0.4, 0.6, 0.8}});
    return out;
  }();
  return presets;
}

const ScenarioPreset* find_preset(const std::string& name) {
  for (const ScenarioPreset& p : preset_scenarios()) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

}  // namespace rcbf
