#include "rcbf/cone_solver.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace rcbf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Relative barrier gap at which the primal-dual iterations take over.
constexpr double kHandoffGap = 1e-6;
// Phase I ball radius, relative to the largest constant in the blocks.
constexpr double kPhase1Radius = 1e3;
constexpr int kRefineSteps = 2;
constexpr int kPolishSteps = 4;
constexpr double kPhase1Growth = 1e3;
constexpr double kPhase1MaxRadius = 1e12;

// A block seen as an affine map into its cone: s = M z + o, s = (d z + e, A z + b).
struct AffineBlock {
  Matrix M;
  Vector o;

  bool linear() const { return M.rows() == 1; }
  double nu() const { return linear() ? 1.0 : 2.0; }
  Vector slack(const Vector& z) const { return M * z + o; }
};

std::vector<AffineBlock> affine_blocks(const ConeProgram& prog, bool with_sigma) {
  const int n = prog.n_vars();
  const int cols = with_sigma ? n + 1 : n;
  std::vector<AffineBlock> out;
  out.reserve(prog.blocks.size());
  for (const ConeBlock& blk : prog.blocks) {
    const auto k = blk.A.rows();
    AffineBlock ab{Matrix::Zero(k + 1, cols), Vector(k + 1)};
    ab.M.block(0, 0, 1, n) = blk.d;
    if (k > 0) ab.M.block(1, 0, k, n) = blk.A;
    if (with_sigma) ab.M(0, n) = 1.0;  // relax every block by sigma
    ab.o(0) = blk.e;
    if (k > 0) ab.o.tail(k) = blk.b;
    out.push_back(std::move(ab));
  }
  return out;
}

// s0^2 - ||s1||^2 in factored form, accurate near the cone boundary.
double cone_det(const Vector& s) {
  const double n1 = s.tail(s.size() - 1).norm();
  return (s(0) - n1) * (s(0) + n1);
}

bool strictly_interior(const AffineBlock& blk, const Vector& s) {
  if (!s.allFinite()) return false;
  if (blk.linear()) return s(0) > 0.0;
  return s(0) > 0.0 && cone_det(s) > 0.0;
}

// Gradient and Hessian of F(s) = -log(s) or -log(s0^2 - ||s1||^2).
void barrier_derivatives(const AffineBlock& blk, const Vector& s, Vector& grad, Matrix& hess) {
  if (blk.linear()) {
    grad.resize(1);
    hess.resize(1, 1);
    grad(0) = -1.0 / s(0);
    hess(0, 0) = 1.0 / (s(0) * s(0));
    return;
  }
  const double det = cone_det(s);
  Vector js = -s;
  js(0) = s(0);
  grad = (-2.0 / det) * js;
  hess = (4.0 / (det * det)) * (js * js.transpose());
  hess(0, 0) -= 2.0 / det;
  hess.diagonal().tail(s.size() - 1).array() += 2.0 / det;
}

// Largest alpha with s + alpha ds still in the closed cone (infinity if unbounded).
double max_step(const AffineBlock& blk, const Vector& s, const Vector& ds) {
  if (blk.linear()) {
    return ds(0) < 0.0 ? -s(0) / ds(0) : kInf;
  }
  const Eigen::Index k = s.size() - 1;
  const double c0 = cone_det(s);
  const double c1 = 2.0 * (s(0) * ds(0) - s.tail(k).dot(ds.tail(k)));
  const double c2 = ds(0) * ds(0) - ds.tail(k).squaredNorm();

  double root = kInf;
  auto consider = [&root](double r) {
    if (r > 0.0 && r < root) root = r;
  };
  if (c2 == 0.0) {
    if (c1 < 0.0) consider(-c0 / c1);
  } else {
    const double disc = c1 * c1 - 4.0 * c2 * c0;
    if (disc >= 0.0) {
      const double q = -0.5 * (c1 + std::copysign(std::sqrt(disc), c1));
      if (q != 0.0) {
        consider(q / c2);
        consider(c0 / q);
      }
    }
  }
  // The apex half-line s0 > 0 must also hold.
  if (ds(0) < 0.0) consider(-s(0) / ds(0));
  return root;
}

// Solves H x = rhs after symmetric diagonal equilibration; regularizes on breakdown.
bool solve_spd(const Matrix& H, const Vector& rhs, Vector& x) {
  const Eigen::Index n = H.rows();
  Vector scale(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = H(i, i);
    scale(i) = (d > 0.0 && std::isfinite(d)) ? 1.0 / std::sqrt(d) : 1.0;
  }
  Matrix Hs = scale.asDiagonal() * H * scale.asDiagonal();
  Eigen::LDLT<Matrix> ldlt(Hs);
  const bool healthy = ldlt.info() == Eigen::Success && ldlt.isPositive() &&
                       ldlt.vectorD().minCoeff() > 1e-13;
  if (!healthy) {
    Hs.diagonal().array() += 1e-12;
    ldlt.compute(Hs);
    if (ldlt.info() != Eigen::Success) return false;
  }
  x = scale.asDiagonal() * ldlt.solve(scale.asDiagonal() * rhs);
  return x.allFinite();
}

bool newton_direction(const Matrix& H, const Vector& g, Vector& dz) {
  return solve_spd(H, -g, dz);
}

enum class OuterAction { proceed, converged, infeasible };

struct PathOutcome {
  Vector z;
  double t = 1.0;
  int outer = 0;
  int newton = 0;
  bool stopped_early = false;
  bool failed = false;
  OuterAction final_action = OuterAction::proceed;
};

template <typename StepHook, typename OuterHook>
PathOutcome follow_central_path(const std::vector<AffineBlock>& blocks, const Vector& c, Vector z,
                                const SolverSettings& settings, StepHook&& after_step,
                                OuterHook&& after_outer) {
  const Eigen::Index n = z.size();
  PathOutcome out;

  std::vector<Vector> slacks(blocks.size());
  auto update_slacks = [&](const Vector& zz) {
    for (std::size_t i = 0; i < blocks.size(); ++i) slacks[i] = blocks[i].slack(zz);
  };

  Vector grad_barrier(n);
  Matrix hess(n, n);
  Vector g_blk;
  Matrix h_blk;
  auto assemble = [&]() {
    grad_barrier.setZero();
    hess.setZero();
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      barrier_derivatives(blocks[i], slacks[i], g_blk, h_blk);
      grad_barrier.noalias() += blocks[i].M.transpose() * g_blk;
      hess.noalias() += blocks[i].M.transpose() * h_blk * blocks[i].M;
    }
  };

  update_slacks(z);
  assemble();

  // Initial t balancing the objective against the barrier gradient.
  double t = 1.0;
  {
    Vector hc, hg;
    if (newton_direction(hess, c, hc) && newton_direction(hess, grad_barrier, hg)) {
      const double cc = -c.dot(hc);  // c^T H^-1 c
      const double cg = -c.dot(hg);  // c^T H^-1 grad
      if (cc > 0.0 && std::isfinite(cg)) t = std::clamp(-cg / cc, 1e-10, 1e10);
    }
  }

  constexpr int kMaxInner = 50;
  Vector dz(n);
  for (out.outer = 0; out.outer < settings.max_iter;) {
    // Centering at the current t.
    bool centered = false;
    for (int inner = 0; inner < kMaxInner; ++inner) {
      const Vector g = t * c + grad_barrier;
      if (!newton_direction(hess, g, dz)) {
        out.failed = true;
        break;
      }
      const double decrement_sq = -g.dot(dz);
      if (!std::isfinite(decrement_sq)) {
        out.failed = true;
        break;
      }
      if (decrement_sq <= 1e-10) {
        centered = true;
        break;
      }

      const double lambda = std::sqrt(std::max(decrement_sq, 0.0));
      double alpha = lambda < 0.25 ? 1.0 : 1.0 / (1.0 + lambda);
      double boundary = kInf;
      for (std::size_t i = 0; i < blocks.size(); ++i) {
        boundary = std::min(boundary, max_step(blocks[i], slacks[i], blocks[i].M * dz));
      }
      alpha = std::min(alpha, settings.step_fraction * boundary);

      Vector trial = z + alpha * dz;
      bool inside = false;
      for (int halving = 0; halving < 60; ++halving) {
        inside = true;
        for (std::size_t i = 0; i < blocks.size() && inside; ++i) {
          inside = strictly_interior(blocks[i], blocks[i].slack(trial));
        }
        if (inside) break;
        alpha *= 0.5;
        trial = z + alpha * dz;
      }
      if (!inside || alpha == 0.0) {  // no representable progress left
        centered = true;
        break;
      }

      z = std::move(trial);
      ++out.newton;
      update_slacks(z);
      assemble();
      if (!z.allFinite() || z.lpNorm<Eigen::Infinity>() > 1e15) {
        out.failed = true;
        break;
      }
      if (after_step(z)) {
        out.stopped_early = true;
        break;
      }
      if (alpha * lambda < 1e-14 * (1.0 + z.norm())) {
        centered = true;
        break;
      }
    }
    ++out.outer;
    if (out.failed || out.stopped_early) break;
    if (!centered) continue;

    out.final_action = after_outer(z, t);
    if (out.final_action != OuterAction::proceed) break;
    t /= settings.mu_factor;
  }
  out.z = std::move(z);
  out.t = t;
  return out;
}

// Nesterov-Todd scaling W of one block, with W y = W^-1 s = lambda. For a cone block
// W = P(v) = 2 v v^T - det(v) J where v^2 is the scaling point.
struct NtScaling {
  bool linear = true;
  double beta = 1.0;  // linear blocks: W = beta
  Vector v;
  double det_v = 1.0;

  Vector apply(const Vector& x) const {
    if (linear) return beta * x;
    Vector out = (2.0 * v.dot(x)) * v;
    out(0) -= det_v * x(0);
    out.tail(x.size() - 1) += det_v * x.tail(x.size() - 1);
    return out;
  }
  Vector apply_inverse(const Vector& x) const {
    if (linear) return x / beta;
    Vector jv = -v;
    jv(0) = v(0);
    Vector out = (2.0 * jv.dot(x)) * jv;
    out(0) -= det_v * x(0);
    out.tail(x.size() - 1) += det_v * x.tail(x.size() - 1);
    return out / (det_v * det_v);
  }
};

NtScaling nt_scaling(const Vector& s, const Vector& y) {
  NtScaling w;
  if (s.size() == 1) {
    w.beta = std::sqrt(s(0) / y(0));
    return w;
  }
  w.linear = false;
  const double ns = std::sqrt(cone_det(s));
  const double ny = std::sqrt(cone_det(y));
  const Vector sbar = s / ns;
  Vector jybar = -y / ny;
  jybar(0) = y(0) / ny;
  const double gamma = std::sqrt(0.5 * (1.0 + sbar.dot(y / ny)));
  // Scaling point with det = ns / ny, then its square root.
  const double root_det = std::sqrt(ns / ny);
  Vector point = (root_det / (2.0 * gamma)) * (sbar + jybar);
  point(0) += root_det;
  w.v = point / std::sqrt(2.0 * point(0));
  w.det_v = root_det;
  return w;
}

// Jordan product x o v and its inverse in the first argument, x \ r.
Vector jordan_product(const Vector& x, const Vector& v) {
  if (x.size() == 1) return x.cwiseProduct(v);
  Vector out(x.size());
  out(0) = x.dot(v);
  out.tail(x.size() - 1) = x(0) * v.tail(v.size() - 1) + v(0) * x.tail(x.size() - 1);
  return out;
}

Vector jordan_divide(const Vector& x, const Vector& r) {
  if (x.size() == 1) return r.cwiseQuotient(x);
  const Eigen::Index k = x.size() - 1;
  Vector out(x.size());
  out(0) = (x(0) * r(0) - x.tail(k).dot(r.tail(k))) / cone_det(x);
  out.tail(k) = (r.tail(k) - out(0) * x.tail(k)) / x(0);
  return out;
}

double max_cone_step(const Vector& s, const Vector& ds) {
  const AffineBlock shape{Matrix(s.size(), 0), Vector()};
  return max_step(shape, s, ds);
}

enum class PdOutcome { converged, stalled, exhausted, failed };

struct PdState {
  Vector z;
  std::vector<Vector> s;
  std::vector<Vector> y;
  int iterations = 0;
};

struct PdTargets {
  double tol_feas;
  double tol_kkt;
  double tol_gap;
};

// Mehrotra predictor-corrector iterations on (z, s, y) for s = M z + o in K, M^T y = c, y in K.
PdOutcome primal_dual_refine(const std::vector<AffineBlock>& blocks, const Vector& c,
                             const PdTargets& targets, int max_iter, PdState& st) {
  const Eigen::Index n = c.size();
  const std::size_t nb = blocks.size();
  const double cmax = std::max(1.0, c.lpNorm<Eigen::Infinity>());

  std::vector<Vector> rp(nb), lambda(nb), ds_aff(nb), dy_aff(nb), rhs_s(nb);
  std::vector<NtScaling> w(nb);

  // Solves M^T dy = rx, ds - M dz = -rpv, W dy + W^-1 ds = d_s through the augmented system
  // [0 A^T; A I] [dz; W dy] with A = W^-1 M, which avoids squaring the conditioning of A.
  Eigen::Index rows = 0;
  for (const auto& b : blocks) rows += b.M.rows();
  Matrix kkt = Matrix::Zero(n + rows, n + rows);
  kkt.bottomRightCorner(rows, rows).setIdentity();
  Eigen::FullPivLU<Matrix> lu;
  Vector hscale(n);

  auto solve_once = [&](const Vector& rx, const std::vector<Vector>& rpv,
                        const std::vector<Vector>& d_s, Vector& dz, std::vector<Vector>& ds,
                        std::vector<Vector>& dy) {
    Vector rhs(n + rows);
    rhs.head(n) = hscale.asDiagonal() * rx;
    Eigen::Index off = n;
    for (std::size_t i = 0; i < nb; ++i) {
      const Eigen::Index r = blocks[i].M.rows();
      rhs.segment(off, r) = d_s[i] + w[i].apply_inverse(rpv[i]);
      off += r;
    }
    const Vector sol = lu.solve(rhs);
    dz = hscale.asDiagonal() * sol.head(n);
    ds.resize(nb);
    dy.resize(nb);
    off = n;
    for (std::size_t i = 0; i < nb; ++i) {
      const Eigen::Index r = blocks[i].M.rows();
      ds[i] = blocks[i].M * dz - rpv[i];
      dy[i] = w[i].apply_inverse(sol.segment(off, r));
      off += r;
    }
  };

  auto direction = [&](const std::vector<Vector>& d_s, const Vector& rx, Vector& dz,
                       std::vector<Vector>& ds, std::vector<Vector>& dy) {
    solve_once(rx, rp, d_s, dz, ds, dy);
    Vector cz;
    std::vector<Vector> cs, cy, e_p(nb), e_c(nb);
    for (int refine = 0; refine < kRefineSteps; ++refine) {
      Vector e_x = rx;
      for (std::size_t i = 0; i < nb; ++i) {
        e_x.noalias() -= blocks[i].M.transpose() * dy[i];
        e_p[i] = rp[i] - blocks[i].M * dz + ds[i];
        e_c[i] = d_s[i] - w[i].apply(dy[i]) - w[i].apply_inverse(ds[i]);
      }
      solve_once(e_x, e_p, e_c, cz, cs, cy);
      dz += cz;
      for (std::size_t i = 0; i < nb; ++i) {
        ds[i] += cs[i];
        dy[i] += cy[i];
      }
    }
    return dz.allFinite();
  };

  auto max_joint_step = [&](const std::vector<Vector>& ds, const std::vector<Vector>& dy) {
    double a = kInf;
    for (std::size_t i = 0; i < nb; ++i) {
      a = std::min({a, max_cone_step(st.s[i], ds[i]), max_cone_step(st.y[i], dy[i])});
    }
    return a;
  };

  // Once the targets hold, a few extra steps shrink complementarity further; the best
  // iterate that still meets the targets is kept and restored if a later step breaks down.
  std::optional<PdState> best;
  double best_gap = kInf;
  int polish_left = kPolishSteps;
  auto finish = [&](PdOutcome outcome) {
    if (!best) return outcome;
    const int iterations = st.iterations;
    st = *best;
    st.iterations = iterations;
    return PdOutcome::converged;
  };

  for (int it = 0;; ++it) {
    Vector rx = c;
    double gap = 0.0;
    double feas = 0.0;
    for (std::size_t i = 0; i < nb; ++i) {
      rx.noalias() -= blocks[i].M.transpose() * st.y[i];
      rp[i] = st.s[i] - blocks[i].slack(st.z);
      gap += st.s[i].dot(st.y[i]);
      feas = std::max(feas, rp[i].lpNorm<Eigen::Infinity>());
    }
    const double obj = c.dot(st.z);
    const bool met = gap <= targets.tol_gap * std::max(1.0, std::abs(obj)) &&
                     rx.lpNorm<Eigen::Infinity>() <= targets.tol_kkt * cmax &&
                     feas <= targets.tol_feas;
    if (met && gap < best_gap) {
      best = st;
      best_gap = gap;
    }
    if (best) {
      if (!met || polish_left-- <= 0) return finish(PdOutcome::converged);
    }
    if (it >= max_iter) return finish(PdOutcome::exhausted);
    ++st.iterations;

    const double mu = gap / static_cast<double>(nb);
    Matrix A(rows, n);
    Eigen::Index off = 0;
    for (std::size_t i = 0; i < nb; ++i) {
      w[i] = nt_scaling(st.s[i], st.y[i]);
      lambda[i] = w[i].apply(st.y[i]);
      const Eigen::Index r = blocks[i].M.rows();
      for (Eigen::Index col = 0; col < n; ++col) {
        A.block(off, col, r, 1) = w[i].apply_inverse(blocks[i].M.col(col));
      }
      off += r;
    }
    for (Eigen::Index k = 0; k < n; ++k) {
      const double norm = A.col(k).norm();
      hscale(k) = norm > 0.0 && std::isfinite(norm) ? 1.0 / norm : 1.0;
    }
    A = A * hscale.asDiagonal();
    kkt.bottomLeftCorner(rows, n) = A;
    kkt.topRightCorner(n, rows) = A.transpose();
    lu.compute(kkt);

    Vector dz;
    std::vector<Vector> ds, dy;
    for (std::size_t i = 0; i < nb; ++i) rhs_s[i] = -lambda[i];
    if (!direction(rhs_s, rx, dz, ds, dy)) return finish(PdOutcome::failed);
    const double alpha_aff = std::min(1.0, max_joint_step(ds, dy));
    double gap_aff = 0.0;
    for (std::size_t i = 0; i < nb; ++i) {
      gap_aff += (st.s[i] + alpha_aff * ds[i]).dot(st.y[i] + alpha_aff * dy[i]);
    }
    const double sigma = std::clamp(std::pow(std::max(gap_aff, 0.0) / gap, 3.0), 0.0, 1.0);

    for (std::size_t i = 0; i < nb; ++i) {
      Vector rc = -jordan_product(lambda[i], lambda[i]) -
                  jordan_product(w[i].apply_inverse(ds[i]), w[i].apply(dy[i]));
      rc(0) += sigma * mu;
      rhs_s[i] = jordan_divide(lambda[i], rc);
    }
    if (!direction(rhs_s, rx, dz, ds, dy)) return finish(PdOutcome::failed);
    const double alpha = std::min(1.0, 0.99 * max_joint_step(ds, dy));
    if (!(alpha > 1e-12)) return finish(PdOutcome::stalled);

    st.z += alpha * dz;
    for (std::size_t i = 0; i < nb; ++i) {
      st.s[i] += alpha * ds[i];
      st.y[i] += alpha * dy[i];
    }
    if (!st.z.allFinite()) return finish(PdOutcome::failed);
  }
}

double total_nu(const std::vector<AffineBlock>& blocks) {
  double nu = 0.0;
  for (const auto& b : blocks) nu += b.nu();
  return nu;
}

}  // namespace

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::max_iterations: return "max_iterations";
    case SolveStatus::numerical_failure: return "numerical_failure";
  }
  return "unknown";
}

void ConeProgram::validate() const {
  if (c.size() == 0) throw std::invalid_argument("cone program: no variables");
  if (blocks.empty()) throw std::invalid_argument("cone program: at least one block required");
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const ConeBlock& blk = blocks[i];
    const std::string where = "cone program block " + std::to_string(i) + ": ";
    if (blk.d.size() != c.size()) throw std::invalid_argument(where + "d has wrong length");
    if (blk.A.rows() > 0 && blk.A.cols() != c.size()) {
      throw std::invalid_argument(where + "A has wrong column count");
    }
    if (blk.b.size() != blk.A.rows()) throw std::invalid_argument(where + "b/A row mismatch");
    if (!blk.A.allFinite() || !blk.b.allFinite() || !blk.d.allFinite() || !std::isfinite(blk.e)) {
      throw std::invalid_argument(where + "non-finite data");
    }
  }
  if (!c.allFinite()) throw std::invalid_argument("cone program: non-finite cost");
}

Residuals residuals(const ConeProgram& prog, const Vector& z) {
  if (z.size() != prog.n_vars()) throw std::invalid_argument("residuals: dimension mismatch");
  Residuals r;
  r.objective = prog.c.dot(z);
  for (const ConeBlock& blk : prog.blocks) {
    const double lhs = blk.A.rows() > 0 ? (blk.A * z + blk.b).norm() : 0.0;
    r.max_violation = std::max(r.max_violation, lhs - blk.d.dot(z) - blk.e);
  }
  return r;
}

ConeSolution solve(const ConeProgram& prog, double tol, int max_iter) {
  SolverSettings s;
  s.tol_feas = tol;
  s.tol_kkt = tol;
  s.tol_gap = 1e-4 * tol;
  s.max_iter = max_iter;
  return solve(prog, s);
}

ConeSolution solve(const ConeProgram& prog, const SolverSettings& settings) {
  prog.validate();
  const int n = prog.n_vars();
  ConeSolution sol;
  sol.z = Vector::Zero(n);

  // Phase I: find a strictly feasible point unless z = 0 already is one.
  double worst = -kInf;
  for (const ConeBlock& blk : prog.blocks) worst = std::max(worst, blk.b.norm() - blk.e);
  if (worst >= 0.0) {
    // The relaxed problem is bounded by a ball ||z|| <= R so that its central path exists;
    // an infeasible verdict reached against the ball is retried with a larger radius.
    double scale = 1.0;
    for (const ConeBlock& blk : prog.blocks) {
      scale = std::max({scale, std::abs(blk.e), blk.b.lpNorm<Eigen::Infinity>()});
    }
    PathOutcome p1;
    for (double radius = kPhase1Radius * scale;; radius *= kPhase1Growth) {
      auto relaxed = affine_blocks(prog, true);
      AffineBlock ball{Matrix::Zero(n + 1, n + 1), Vector::Zero(n + 1)};
      ball.M.bottomLeftCorner(n, n).setIdentity();
      ball.o(0) = radius;
      relaxed.push_back(std::move(ball));

      Vector c1 = Vector::Zero(n + 1);
      c1(n) = 1.0;
      Vector z1 = Vector::Zero(n + 1);
      z1(n) = worst + 1.0;

      const double nu1 = total_nu(relaxed);
      double best_sigma = z1(n);
      int stalls = 0;
      auto sigma_negative = [n](const Vector& z) { return z(n) < 0.0; };
      auto phase1_outer = [&, radius](const Vector& z, double t) {
        const double sigma = z(n);
        // Centered, so sigma - nu1 / t bounds the relaxed optimum inside the ball. Dropping
        // the ball multiplier (2 / (t det)) (R, -z) stretches that bound to ||z|| <= reach.
        const double lower = sigma - nu1 / t;
        if (lower > settings.tol_feas) {
          const double zn = z.head(n).norm();
          const double det = radius * radius - zn * zn;
          const double lam0 = 2.0 * radius / (t * det);
          const double lam_bar = 2.0 * zn / (t * det);
          const double reach =
              lam_bar > 0.0 ? (lower + lam0 * radius - settings.tol_feas) / lam_bar : kInf;
          if (reach >= kPhase1MaxRadius * scale) return OuterAction::infeasible;
        }
        if (nu1 / t <= settings.tol_gap) return OuterAction::infeasible;
        if (sigma < best_sigma - 1e-12 * (1.0 + std::abs(best_sigma))) {
          best_sigma = sigma;
          stalls = 0;
        } else if (sigma > settings.tol_feas && ++stalls >= 10) {
          return OuterAction::infeasible;
        }
        return OuterAction::proceed;
      };
      SolverSettings remaining = settings;
      remaining.max_iter = std::max(1, settings.max_iter - sol.iterations);
      p1 = follow_central_path(relaxed, c1, z1, remaining, sigma_negative, phase1_outer);
      sol.iterations += p1.outer;
      sol.newton_steps += p1.newton;
      const bool against_ball = p1.z.head(n).norm() > 0.5 * radius;
      if (p1.stopped_early || p1.failed || p1.final_action != OuterAction::infeasible ||
          !against_ball || radius >= kPhase1MaxRadius * scale ||
          sol.iterations >= settings.max_iter) {
        break;
      }
    }
    sol.z = p1.z.head(n);
    if (!p1.stopped_early) {
      sol.objective = prog.c.dot(sol.z);
      sol.primal_residual = residuals(prog, sol.z).max_violation;
      if (p1.failed) {
        sol.status = SolveStatus::numerical_failure;
      } else if (p1.final_action == OuterAction::infeasible) {
        sol.status = SolveStatus::infeasible;
      } else {
        sol.status = SolveStatus::max_iterations;
      }
      return sol;
    }
  }

  // Phase II: barrier path-following to a coarse gap, then primal-dual iterations.
  const auto blocks = affine_blocks(prog, false);
  const double nu = total_nu(blocks);
  const double handoff = std::max(settings.tol_gap, kHandoffGap);
  auto never = [](const Vector&) { return false; };
  auto phase2_outer = [&](const Vector& z, double t) {
    const double target = handoff * std::max(1.0, std::abs(prog.c.dot(z)));
    return nu / t <= target ? OuterAction::converged : OuterAction::proceed;
  };
  SolverSettings remaining = settings;
  remaining.max_iter = std::max(1, settings.max_iter - sol.iterations);
  const PathOutcome p2 = follow_central_path(blocks, prog.c, sol.z, remaining, never, phase2_outer);
  sol.iterations += p2.outer;
  sol.newton_steps += p2.newton;

  PdState st;
  st.z = p2.z;
  const double mu = 1.0 / p2.t;
  Vector g_blk;
  Matrix h_blk;
  for (const AffineBlock& blk : blocks) {
    Vector slack = blk.slack(st.z);
    barrier_derivatives(blk, slack, g_blk, h_blk);
    st.y.push_back(-mu * g_blk);
    st.s.push_back(std::move(slack));
  }
  PdOutcome pd = PdOutcome::failed;
  if (!p2.failed && st.z.allFinite()) {
    const PdTargets targets{settings.tol_feas, settings.tol_kkt, settings.tol_gap};
    pd = primal_dual_refine(blocks, prog.c, targets,
                            std::max(0, settings.max_iter - sol.iterations), st);
    sol.iterations += st.iterations;
    sol.newton_steps += st.iterations;
  }

  sol.z = st.z;
  sol.objective = prog.c.dot(sol.z);
  sol.primal_residual = residuals(prog, sol.z).max_violation;
  Vector stationarity = prog.c;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    stationarity.noalias() -= blocks[i].M.transpose() * st.y[i];
    sol.duality_gap += st.s[i].dot(st.y[i]);
  }
  sol.duals = std::move(st.y);
  sol.kkt_residual = stationarity.lpNorm<Eigen::Infinity>();

  if (pd == PdOutcome::failed || !sol.z.allFinite()) {
    sol.status = SolveStatus::numerical_failure;
  } else if (pd == PdOutcome::exhausted) {
    sol.status = SolveStatus::max_iterations;
  } else if (pd == PdOutcome::stalled) {
    sol.status = SolveStatus::numerical_failure;
  } else if (sol.primal_residual > settings.tol_feas) {
    sol.status = SolveStatus::numerical_failure;
  } else {
    sol.status = SolveStatus::optimal;
  }
  return sol;
}

namespace {

void write_number(std::ostream& os, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  os.write(buf, res.ptr - buf);
}

template <typename Derived>
void write_vector(std::ostream& os, const Eigen::DenseBase<Derived>& v) {
  os << '[';
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i > 0) os << ' ';
    write_number(os, v(i));
  }
  os << ']';
}

}  // namespace

void write_listing(std::ostream& os, const ConeProgram& prog) {
  os << "cone_program n_vars=" << prog.n_vars() << " blocks=" << prog.blocks.size() << '\n';
  os << "c=";
  write_vector(os, prog.c);
  os << '\n';
  for (std::size_t i = 0; i < prog.blocks.size(); ++i) {
    const ConeBlock& blk = prog.blocks[i];
    os << "block " << i << " rows=" << blk.A.rows() << " A=[";
    for (Eigen::Index r = 0; r < blk.A.rows(); ++r) {
      if (r > 0) os << "; ";
      for (Eigen::Index col = 0; col < blk.A.cols(); ++col) {
        if (col > 0) os << ' ';
        write_number(os, blk.A(r, col));
      }
    }
    os << "] b=";
    write_vector(os, blk.b);
    os << " d=";
    write_vector(os, blk.d);
    os << " e=";
    write_number(os, blk.e);
    os << '\n';
  }
}

std::string to_listing(const ConeProgram& prog) {
  std::ostringstream os;
  write_listing(os, prog);
  return os.str();
}

}  // namespace rcbf
