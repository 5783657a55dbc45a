#include "rcbf/safety_filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rcbf/sector_model.hpp"

namespace rcbf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_theta_value(double theta) {
  if (!(theta >= 0.0 && theta < 1.0)) {
    throw std::invalid_argument("filter: theta must lie in [0, 1), got " + std::to_string(theta));
  }
}

void validate_problem(const FilterProblem& prob) {
  const Eigen::Index m = prob.u0.size();
  if (m == 0) throw std::invalid_argument("filter: empty input vector");
  if (prob.constraint.a.size() != m) {
    throw std::invalid_argument("filter: constraint a and u0 differ in dimension");
  }
  if (!prob.u0.allFinite()) throw std::invalid_argument("filter: u0 is not finite");
  if (!std::isfinite(prob.constraint.p) || !prob.constraint.a.allFinite()) {
    throw std::invalid_argument("filter: constraint is not finite");
  }
  if (const auto* vec = std::get_if<Vector>(&prob.theta)) {
    if (vec->size() != m) throw std::invalid_argument("filter: theta vector has wrong length");
    for (Eigen::Index i = 0; i < vec->size(); ++i) check_theta_value((*vec)(i));
  } else {
    check_theta_value(std::get<double>(prob.theta));
  }
  if (prob.input_bound && !(*prob.input_bound > 0.0)) {
    throw std::invalid_argument("filter: input_bound must be positive");
  }
}

// Scalar theta, also accepting a length-1 vector.
double scalar_theta(const FilterProblem& prob, const char* who) {
  if (const auto* vec = std::get_if<Vector>(&prob.theta)) {
    if (vec->size() != 1) {
      throw std::invalid_argument(std::string(who) + ": requires a scalar theta");
    }
    return (*vec)(0);
  }
  return std::get<double>(prob.theta);
}

Vector channel_thetas(const FilterProblem& prob) {
  if (const auto* vec = std::get_if<Vector>(&prob.theta)) return *vec;
  if (prob.u0.size() != 1) {
    throw std::invalid_argument("filter_qp_channels: requires one theta per channel");
  }
  return Vector::Constant(1, std::get<double>(prob.theta));
}

double margin_of(const FilterProblem& prob, const Vector& u) {
  if (const auto* vec = std::get_if<Vector>(&prob.theta)) {
    return prob.constraint.robust_margin(u, *vec);
  }
  return prob.constraint.robust_margin(u, std::get<double>(prob.theta));
}

Vector worst_case_of(const FilterProblem& prob, const Vector& u) {
  if (prob.constraint.a.norm() <= kDegenerateGradientTol) return Vector::Zero(u.size());
  if (const auto* vec = std::get_if<Vector>(&prob.theta)) {
    return per_channel_worst_case(u, prob.constraint.a, *vec);
  }
  return worst_case_input(u, prob.constraint.a, std::get<double>(prob.theta));
}

bool in_box(const FilterProblem& prob, const Vector& u) {
  return !prob.input_bound || u.lpNorm<Eigen::Infinity>() <= *prob.input_bound;
}

FilterResult finish(const FilterProblem& prob, Vector u, FilterMode path) {
  FilterResult r;
  r.path = path;
  r.margin = margin_of(prob, u);
  r.altered = (u - prob.u0).norm() > kFilterTolFeas;
  r.w_star = worst_case_of(prob, u);
  r.u = std::move(u);
  return r;
}

// Baseline already safe, or the degenerate a = 0 case. Returns nullopt when optimization is needed.
std::optional<FilterResult> trivial_cases(const FilterProblem& prob, FilterMode path) {
  if (prob.constraint.a.norm() <= kDegenerateGradientTol) {
    Vector u = prob.u0;
    if (prob.input_bound) u = u.cwiseMax(-*prob.input_bound).cwiseMin(*prob.input_bound);
    FilterResult r = finish(prob, std::move(u), path);
    if (prob.constraint.p < 0.0) {
      r.status = FilterStatus::infeasible_degenerate;
      r.u = prob.u0;
      r.altered = false;
      r.margin = margin_of(prob, prob.u0);
    }
    return r;
  }
  if (in_box(prob, prob.u0) && margin_of(prob, prob.u0) >= 0.0) {
    return finish(prob, prob.u0, path);
  }
  return std::nullopt;
}

FilterStatus status_from_solver(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return FilterStatus::ok;
    case SolveStatus::infeasible: return FilterStatus::infeasible;
    default: return FilterStatus::solver_failure;
  }
}

void append_box(ConeProgram& prog, const Matrix& to_u, double bound) {
  const Eigen::Index nz = prog.c.size();
  for (Eigen::Index i = 0; i < to_u.rows(); ++i) {
    for (const double sign : {1.0, -1.0}) {
      ConeBlock blk{Matrix(0, nz), Vector(0), RowVector::Zero(nz), bound};
      blk.d.head(to_u.cols()) = -sign * to_u.row(i);
      prog.blocks.push_back(std::move(blk));
    }
  }
}

// Programs are posed in u / S with S the expected magnitude of u*, which keeps q near 1.
double program_scale(const Vector& u0, double p, double theta_max) {
  return std::max({1.0, u0.lpNorm<Eigen::Infinity>(), std::abs(p) / (1.0 - theta_max)});
}

// Rotated-cone epigraph ||(sqrt(2) T zu, q - 1)|| <= q + 1, i.e. 2 q >= ||T zu||^2, q last.
ConeBlock epigraph_block(const Matrix& to_u) {
  const Eigen::Index m = to_u.rows();
  const Eigen::Index nu = to_u.cols();
  ConeBlock blk{Matrix::Zero(m + 1, nu + 1), Vector::Zero(m + 1), RowVector::Zero(nu + 1), 1.0};
  blk.A.topLeftCorner(m, nu) = std::sqrt(2.0) * to_u;
  blk.A(m, nu) = 1.0;
  blk.b(m) = -1.0;
  blk.d(nu) = 1.0;
  return blk;
}

// Active-set polish for the split QP: min 1/2 ||T x - u0||^2 s.t. g x + p >= 0, x_j >= 0 for
// j in `nonneg`, |(T x)_i| <= box. Constraints that are tight at the interior-point x are
// imposed as equalities and the reduced KKT system is solved directly. The result is returned
// only if it is primal feasible with nonnegative multipliers, which certifies optimality.
std::optional<Vector> polish_split_qp(const Matrix& T, const Vector& u0, const RowVector& g,
                                      double p, const std::vector<Eigen::Index>& nonneg,
                                      std::optional<double> box, const Vector& x) {
  const Eigen::Index n = x.size();
  const double size = std::max({1.0, x.lpNorm<Eigen::Infinity>(), u0.lpNorm<Eigen::Infinity>()});
  const double tight = 1e-6 * size;
  const double tol = 1e-9 * size;

  // Equality rows (row, rhs): row * x = rhs.
  std::vector<RowVector> rows;
  std::vector<double> rhs;
  std::vector<char> is_bound;
  if (g * x + p <= tight) {
    rows.push_back(g);
    rhs.push_back(-p);
    is_bound.push_back(0);
  }
  for (const Eigen::Index j : nonneg) {
    if (x(j) > tight) continue;
    RowVector e = RowVector::Zero(n);
    e(j) = 1.0;
    rows.push_back(e);
    rhs.push_back(0.0);
    is_bound.push_back(1);
  }
  const Vector u = T * x;
  if (box) {
    for (Eigen::Index i = 0; i < T.rows(); ++i) {
      if (std::abs(u(i)) < *box - tight) continue;
      const double sign = u(i) >= 0.0 ? 1.0 : -1.0;
      rows.push_back(-sign * T.row(i));
      rhs.push_back(-*box);
      is_bound.push_back(0);
    }
  }

  const auto k = static_cast<Eigen::Index>(rows.size());
  Matrix kkt = Matrix::Zero(n + k, n + k);
  kkt.topLeftCorner(n, n) = T.transpose() * T;
  Vector b(n + k);
  b.head(n) = T.transpose() * u0;
  for (Eigen::Index r = 0; r < k; ++r) {
    kkt.block(n + r, 0, 1, n) = rows[r];
    kkt.block(0, n + r, n, 1) = -rows[r].transpose();
    b(n + r) = rhs[r];
  }
  const Eigen::FullPivLU<Matrix> lu(kkt);
  if (!lu.isInvertible()) return std::nullopt;
  const Vector sol = lu.solve(b);
  if (!sol.allFinite()) return std::nullopt;
  const Vector xp = sol.head(n);
  const Vector mult = sol.tail(k);

  // Multipliers of the imposed rows must be nonnegative, the rest must stay feasible.
  for (Eigen::Index r = 0; r < k; ++r) {
    if (mult(r) < -tol) return std::nullopt;
  }
  if (g * xp + p < -tol) return std::nullopt;
  for (const Eigen::Index j : nonneg) {
    if (xp(j) < -tol) return std::nullopt;
  }
  if (box && (T * xp).lpNorm<Eigen::Infinity>() > *box + tol) return std::nullopt;
  const double before = 0.5 * (u - u0).squaredNorm();
  const double after = 0.5 * (T * xp - u0).squaredNorm();
  if (after > before + tol * std::max(1.0, before)) return std::nullopt;

  Vector out = xp;
  for (const Eigen::Index j : nonneg) out(j) = std::max(out(j), 0.0);
  return out;
}

}  // namespace

const char* to_string(FilterMode mode) {
  switch (mode) {
    case FilterMode::socp: return "socp";
    case FilterMode::scalar_closed_form: return "scalar_closed_form";
    case FilterMode::qp_channels: return "qp_channels";
    case FilterMode::automatic: return "auto";
  }
  return "unknown";
}

FilterMode filter_mode_from_string(const std::string& name) {
  if (name == "socp") return FilterMode::socp;
  if (name == "scalar_closed_form" || name == "scalar") return FilterMode::scalar_closed_form;
  if (name == "qp_channels" || name == "qp") return FilterMode::qp_channels;
  if (name == "auto") return FilterMode::automatic;
  throw std::invalid_argument("unknown filter mode '" + name + "'");
}

const char* to_string(FilterStatus status) {
  switch (status) {
    case FilterStatus::ok: return "ok";
    case FilterStatus::infeasible: return "infeasible";
    case FilterStatus::infeasible_degenerate: return "infeasible_degenerate";
    case FilterStatus::solver_failure: return "solver_failure";
  }
  return "unknown";
}

FilterResult filter_socp(const FilterProblem& prob) {
  validate_problem(prob);
  const double theta = scalar_theta(prob, "filter_socp");
  if (auto r = trivial_cases(prob, FilterMode::socp)) return *r;

  const Eigen::Index m = prob.u0.size();
  const double a_norm = prob.constraint.a.norm();
  const RowVector a = prob.constraint.a / a_norm;
  const double p = prob.constraint.p / a_norm;
  const double scale = program_scale(prob.u0, p, theta);

  // z = (u, q) in scaled units, cost q - u0^T u.
  ConeProgram prog;
  prog.c.resize(m + 1);
  prog.c.head(m) = -prob.u0 / scale;
  prog.c(m) = 1.0;

  ConeBlock robust{Matrix(0, m + 1), Vector(0), RowVector::Zero(m + 1), p / scale};
  robust.d.head(m) = a;
  if (theta > 0.0) {
    robust.A = Matrix::Zero(m, m + 1);
    robust.A.leftCols(m) = theta * Matrix::Identity(m, m);
    robust.b = Vector::Zero(m);
  }
  prog.blocks.push_back(std::move(robust));
  prog.blocks.push_back(epigraph_block(Matrix::Identity(m, m)));
  if (prob.input_bound) append_box(prog, Matrix::Identity(m, m), *prob.input_bound / scale);

  const ConeSolution sol = solve(prog);
  const FilterStatus status = status_from_solver(sol.status);
  FilterResult r = finish(prob, status == FilterStatus::ok ? Vector(scale * sol.z.head(m)) : prob.u0,
                          FilterMode::socp);
  r.status = status;
  r.solver_invoked = true;
  r.solver_status = sol.status;
  r.solver_iterations = sol.iterations;
  if (status == FilterStatus::ok) {
    r.q_star = scale * scale * sol.z(m);
  } else {
    r.altered = false;
  }
  return r;
}

FilterResult filter_scalar(const FilterProblem& prob) {
  validate_problem(prob);
  if (prob.u0.size() != 1) throw std::invalid_argument("filter_scalar: requires m == 1");
  const double theta = scalar_theta(prob, "filter_scalar");
  if (auto r = trivial_cases(prob, FilterMode::scalar_closed_form)) return *r;

  const double p = prob.constraint.p;
  const double a = prob.constraint.a(0);
  const double lo_gain = -p / ((1.0 - theta) * a);
  const double hi_gain = -p / ((1.0 + theta) * a);

  double lower = -kInf;
  double upper = kInf;
  if (a > 0.0) {
    lower = std::max(lo_gain, hi_gain);
  } else {
    upper = std::min(lo_gain, hi_gain);
  }
  if (prob.input_bound) {
    lower = std::max(lower, -*prob.input_bound);
    upper = std::min(upper, *prob.input_bound);
  }
  if (lower > upper) {
    FilterResult r = finish(prob, prob.u0, FilterMode::scalar_closed_form);
    r.status = FilterStatus::infeasible;
    r.altered = false;
    return r;
  }
  return finish(prob, Vector::Constant(1, std::clamp(prob.u0(0), lower, upper)),
                FilterMode::scalar_closed_form);
}

FilterResult filter_qp_channels(const FilterProblem& prob) {
  validate_problem(prob);
  const Vector theta = channel_thetas(prob);
  FilterProblem per_channel = prob;
  per_channel.theta = theta;
  if (auto r = trivial_cases(per_channel, FilterMode::qp_channels)) {
    r->u_pos = r->u.cwiseMax(0.0);
    r->u_neg = (-r->u).cwiseMax(0.0);
    return *r;
  }

  const Eigen::Index m = prob.u0.size();
  const double a_norm = prob.constraint.a.norm();
  const RowVector a = prob.constraint.a / a_norm;
  const double p = prob.constraint.p / a_norm;

  // Column layout: a (u_p, u_n) pair per uncertain channel, a single free u_i otherwise.
  std::vector<Eigen::Index> pos_col(m), neg_col(m, -1);
  Eigen::Index nu = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    pos_col[i] = nu++;
    if (theta(i) * std::abs(a(i)) > 0.0) neg_col[i] = nu++;
  }
  Matrix to_u = Matrix::Zero(m, nu);
  RowVector abs_weight = RowVector::Zero(nu);
  for (Eigen::Index i = 0; i < m; ++i) {
    to_u(i, pos_col[i]) = 1.0;
    if (neg_col[i] >= 0) {
      to_u(i, neg_col[i]) = -1.0;
      const double w = theta(i) * std::abs(a(i));
      abs_weight(pos_col[i]) = w;
      abs_weight(neg_col[i]) = w;
    }
  }

  const double scale = program_scale(prob.u0, p, theta.maxCoeff());
  ConeProgram prog;
  prog.c.resize(nu + 1);
  prog.c.head(nu) = -(prob.u0.transpose() * to_u).transpose() / scale;
  prog.c(nu) = 1.0;

  ConeBlock robust{Matrix(0, nu + 1), Vector(0), RowVector::Zero(nu + 1), p / scale};
  robust.d.head(nu) = a * to_u - abs_weight;
  prog.blocks.push_back(std::move(robust));
  for (Eigen::Index i = 0; i < m; ++i) {
    if (neg_col[i] < 0) continue;
    for (const Eigen::Index col : {pos_col[i], neg_col[i]}) {
      ConeBlock nonneg{Matrix(0, nu + 1), Vector(0), RowVector::Zero(nu + 1), 0.0};
      nonneg.d(col) = 1.0;
      prog.blocks.push_back(std::move(nonneg));
    }
  }
  prog.blocks.push_back(epigraph_block(to_u));
  if (prob.input_bound) append_box(prog, to_u, *prob.input_bound / scale);

  const ConeSolution sol = solve(prog);
  const FilterStatus status = status_from_solver(sol.status);
  Vector zu = scale * sol.z.head(nu);
  bool polished = false;
  if (status == FilterStatus::ok) {
    std::vector<Eigen::Index> nonneg;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (neg_col[i] < 0) continue;
      nonneg.push_back(pos_col[i]);
      nonneg.push_back(neg_col[i]);
    }
    if (auto refined = polish_split_qp(to_u, prob.u0, a * to_u - abs_weight, p, nonneg,
                                       prob.input_bound, zu)) {
      zu = std::move(*refined);
      polished = true;
    }
  }
  FilterResult r = finish(per_channel, status == FilterStatus::ok ? Vector(to_u * zu) : prob.u0,
                          FilterMode::qp_channels);
  r.status = status;
  r.solver_invoked = true;
  r.solver_status = sol.status;
  r.solver_iterations = sol.iterations;
  if (status == FilterStatus::ok) {
    Vector up(m), un(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      if (neg_col[i] >= 0) {
        up(i) = zu(pos_col[i]);
        un(i) = zu(neg_col[i]);
      } else {
        up(i) = std::max(zu(pos_col[i]), 0.0);
        un(i) = std::max(-zu(pos_col[i]), 0.0);
      }
    }
    r.u_pos = std::move(up);
    r.u_neg = std::move(un);
    r.q_star = polished ? 0.5 * r.u.squaredNorm() : scale * scale * sol.z(nu);
  } else {
    r.altered = false;
  }
  return r;
}

FilterResult filter(const FilterProblem& prob) {
  switch (prob.mode) {
    case FilterMode::socp: return filter_socp(prob);
    case FilterMode::scalar_closed_form: return filter_scalar(prob);
    case FilterMode::qp_channels: return filter_qp_channels(prob);
    case FilterMode::automatic: break;
  }
  if (prob.u0.size() == 1) return filter_scalar(prob);
  if (std::holds_alternative<Vector>(prob.theta)) return filter_qp_channels(prob);
  return filter_socp(prob);
}

}  // namespace rcbf
