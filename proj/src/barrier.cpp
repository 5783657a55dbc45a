#include "rcbf/barrier.hpp"

#include <cmath>
#include <stdexcept>

namespace rcbf {

namespace {

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& v, const char* what) {
  if (!v.allFinite()) {
    throw NonFiniteError(std::string(what) + " produced a non-finite value");
  }
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw NonFiniteError(std::string(what) + " produced a non-finite value");
  }
}

Vector eval_f(const SystemModel& model, const Vector& x) {
  Vector fx = model.f(x);
  if (fx.size() != model.n) throw std::invalid_argument("model.f: wrong output size");
  require_finite(fx, "model.f");
  return fx;
}

Matrix eval_g(const SystemModel& model, const Vector& x) {
  Matrix gx = model.g(x);
  if (gx.rows() != model.n || gx.cols() != model.m) {
    throw std::invalid_argument("model.g: expected an n x m matrix");
  }
  require_finite(gx, "model.g");
  return gx;
}

RowVector eval_grad(const BarrierFunction& bf, const Vector& x) {
  RowVector grad = bf.grad(x);
  if (grad.size() != x.size()) throw std::invalid_argument("barrier.grad: wrong size");
  require_finite(grad, "barrier.grad");
  return grad;
}

double eval_h(const BarrierFunction& bf, const Vector& x) {
  const double h = bf.h(x);
  require_finite(h, "barrier.h");
  return h;
}

// Gradient of x -> grad_h(x) f(x).
RowVector drift_derivative_gradient(const SystemModel& model, const BarrierFunction& bf,
                                    const Vector& x) {
  if (model.f_jacobian && bf.hessian) {
    const Matrix jac = model.f_jacobian(x);
    const Matrix hess = bf.hessian(x);
    require_finite(jac, "model.f_jacobian");
    require_finite(hess, "barrier.hessian");
    return eval_f(model, x).transpose() * hess + eval_grad(bf, x) * jac;
  }

  const double step = 1e-6 * (1.0 + x.norm());
  RowVector out(x.size());
  Vector xp = x;
  Vector xm = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    xp(i) = x(i) + step;
    xm(i) = x(i) - step;
    const double hp = eval_grad(bf, xp).dot(eval_f(model, xp));
    const double hm = eval_grad(bf, xm).dot(eval_f(model, xm));
    out(i) = (hp - hm) / (2.0 * step);
    xp(i) = x(i);
    xm(i) = x(i);
  }
  require_finite(out, "finite-difference gradient of L_f h");
  return out;
}

}  // namespace

double LinearizedConstraint::robust_margin(const Vector& u, double theta) const {
  return p + a.dot(u) - theta * u.norm() * a.norm();
}

double LinearizedConstraint::robust_margin(const Vector& u, const Vector& theta) const {
  double margin = p + a.dot(u);
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    margin -= theta(i) * std::abs(a(i)) * std::abs(u(i));
  }
  return margin;
}

double ClassKGain::operator()(double r) const {
  return kind == Kind::linear ? gamma * r : gamma * r * r * r;
}

LieDerivatives lie_derivatives(const SystemModel& model, const BarrierFunction& bf,
                               const NormalizedUncertainty& unc, const Vector& x) {
  const RowVector grad = eval_grad(bf, x);
  return {grad.dot(eval_f(model, x)), unc.scale * (grad * eval_g(model, x))};
}

LinearizedConstraint assemble_rcbf(const SystemModel& model, const BarrierFunction& bf,
                                   const NormalizedUncertainty& unc, const ClassKGain& eta,
                                   const Vector& x) {
  if (bf.relative_degree != 1) {
    throw std::invalid_argument("assemble_rcbf: barrier must have relative degree 1");
  }
  const LieDerivatives lie = lie_derivatives(model, bf, unc, x);
  LinearizedConstraint c;
  c.p = lie.lf_h + eta(eval_h(bf, x));
  c.a = lie.lgt_h;
  c.degenerate = c.a.norm() <= kDegenerateGradientTol;
  return c;
}

EcbfGains pole_gains(const std::array<double, 2>& poles) {
  for (const double pole : poles) {
    if (!(pole < 0.0) || !std::isfinite(pole)) {
      throw std::invalid_argument("pole_gains: poles must be real and strictly negative");
    }
  }
  // (s - p1)(s - p2) = s^2 - (p1 + p2) s + p1 p2
  return {poles[0] * poles[1], -(poles[0] + poles[1])};
}

SecondLieDerivatives second_lie_derivatives(const SystemModel& model, const BarrierFunction& bf,
                                            const NormalizedUncertainty& unc, const Vector& x) {
  if (bf.relative_degree != 2) {
    throw std::invalid_argument("second_lie_derivatives: barrier must have relative degree 2");
  }
  const RowVector grad_lf = drift_derivative_gradient(model, bf, x);
  SecondLieDerivatives out;
  out.lf2_h = grad_lf.dot(eval_f(model, x));
  out.lgt_lf_h = unc.scale * (grad_lf * eval_g(model, x));
  require_finite(out.lf2_h, "L_f^2 h");
  return out;
}

LinearizedConstraint assemble_recbf(const SystemModel& model, const BarrierFunction& bf,
                                    const NormalizedUncertainty& unc, const EcbfGains& gains,
                                    const Vector& x) {
  const SecondLieDerivatives second = second_lie_derivatives(model, bf, unc, x);
  const double lf_h = eval_grad(bf, x).dot(eval_f(model, x));
  LinearizedConstraint c;
  c.p = second.lf2_h + gains.k1 * lf_h + gains.k0 * eval_h(bf, x);
  c.a = second.lgt_lf_h;
  c.degenerate = c.a.norm() <= kDegenerateGradientTol;
  return c;
}

void validate_relative_degree(const SystemModel& model, const BarrierFunction& bf,
                              const NormalizedUncertainty& unc, const Vector& x0) {
  if (bf.relative_degree == 2) {
    const double lgt = lie_derivatives(model, bf, unc, x0).lgt_h.norm();
    if (lgt >= 1e-12) {
      throw std::invalid_argument("barrier declared relative degree 2 but ||L_g~h(x0)|| = " +
                                  std::to_string(lgt));
    }
  } else if (bf.relative_degree != 1) {
    throw std::invalid_argument("only relative degree 1 or 2 barriers are supported");
  }
}

}  // namespace rcbf
