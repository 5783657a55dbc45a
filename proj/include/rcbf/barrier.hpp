#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "rcbf/sector_model.hpp"
#include "rcbf/types.hpp"

namespace rcbf {

/// Input-affine dynamics x' = f(x) + g(x) v.
struct SystemModel {
  int n = 0;
  int m = 0;
  std::function<Vector(const Vector&)> f;
  std::function<Matrix(const Vector&)> g;
  /// Optional df/dx. When empty, second Lie derivatives fall back to finite differences.
  std::function<Matrix(const Vector&)> f_jacobian;
  std::vector<std::string> labels;
};

/// Safe set {x : h(x) >= 0}.
struct BarrierFunction {
  std::function<double(const Vector&)> h;
  std::function<RowVector(const Vector&)> grad;
  /// Optional Hessian of h, used together with SystemModel::f_jacobian.
  std::function<Matrix(const Vector&)> hessian;
  int relative_degree = 1;
};

/// Robust barrier condition p + a u - theta ||u|| ||a|| >= 0 at one state.
struct LinearizedConstraint {
  double p = 0.0;
  RowVector a;
  bool degenerate = false;  // set when ||a|| vanishes; the condition reduces to p >= 0

  /// p + a u - theta ||u|| ||a||.
  double robust_margin(const Vector& u, double theta) const;
  /// p + a u - sum_i theta_i |a_i| |u_i| (uncoupled channels).
  double robust_margin(const Vector& u, const Vector& theta) const;
};

// ||a|| at or below this is treated as the degenerate case.
inline constexpr double kDegenerateGradientTol = 1e-12;

/// Extended class-K function eta(r) = gamma r or gamma r^3.
struct ClassKGain {
  enum class Kind { linear, cubic };
  Kind kind = Kind::linear;
  double gamma = 1.0;

  double operator()(double r) const;
};

/// Coefficients of s^2 + k1 s + k0 for the exponential (relative degree two) condition.
struct EcbfGains {
  double k0 = 0.0;
  double k1 = 0.0;
};

struct LieDerivatives {
  double lf_h = 0.0;
  RowVector lgt_h;  // scale * grad_h * g
};

struct SecondLieDerivatives {
  double lf2_h = 0.0;
  RowVector lgt_lf_h;  // scale * grad(L_f h) * g
};

LieDerivatives lie_derivatives(const SystemModel& model, const BarrierFunction& bf,
                               const NormalizedUncertainty& unc, const Vector& x);

/// p = L_f h + eta(h), a = L_g~ h. Requires relative degree 1.
LinearizedConstraint assemble_rcbf(const SystemModel& model, const BarrierFunction& bf,
                                   const NormalizedUncertainty& unc, const ClassKGain& eta,
                                   const Vector& x);

/// Gains placing both roots of s^2 + k1 s + k0 at the given (negative, real) poles.
EcbfGains pole_gains(const std::array<double, 2>& poles);

/// L_f^2 h and L_g~ L_f h, obtained by differentiating h'(x) = grad_h(x) f(x).
///
/// Uses f_jacobian and hessian when both are supplied, otherwise central differences with
/// step 1e-6 (1 + ||x||).
SecondLieDerivatives second_lie_derivatives(const SystemModel& model, const BarrierFunction& bf,
                                            const NormalizedUncertainty& unc, const Vector& x);

/// p = L_f^2 h + k1 L_f h + k0 h, a = L_g~ L_f h. Requires relative degree 2.
LinearizedConstraint assemble_recbf(const SystemModel& model, const BarrierFunction& bf,
                                    const NormalizedUncertainty& unc, const EcbfGains& gains,
                                    const Vector& x);

/// Throws std::invalid_argument when a declared degree-2 barrier has ||L_g~h(x0)|| >= 1e-12.
void validate_relative_degree(const SystemModel& model, const BarrierFunction& bf,
                              const NormalizedUncertainty& unc, const Vector& x0);

}  // namespace rcbf
