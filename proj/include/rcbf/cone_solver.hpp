#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "rcbf/types.hpp"

namespace rcbf {

/// One second-order cone constraint ||A z + b|| <= d z + e.
///
/// A block whose A has zero rows is the linear inequality d z + e >= 0.
struct ConeBlock {
  Matrix A;
  Vector b;
  RowVector d;
  double e = 0.0;
};

/// minimize c^T z subject to every block.
struct ConeProgram {
  Vector c;
  std::vector<ConeBlock> blocks;

  int n_vars() const { return static_cast<int>(c.size()); }
  /// Throws std::invalid_argument on inconsistent dimensions or an empty block list.
  void validate() const;
};

enum class SolveStatus { optimal, infeasible, max_iterations, numerical_failure };

const char* to_string(SolveStatus status);

struct ConeSolution {
  Vector z;
  double objective = 0.0;
  SolveStatus status = SolveStatus::numerical_failure;
  int iterations = 0;     // outer (barrier parameter) iterations, both phases
  int newton_steps = 0;   // inner Newton steps, both phases
  double primal_residual = 0.0;
  double kkt_residual = 0.0;
  double duality_gap = 0.0;
  std::vector<Vector> duals;  // one per block, in the block's own cone
};

struct SolverSettings {
  double tol_feas = 1e-8;
  double tol_kkt = 1e-8;
  /// Target for the barrier duality gap, relative to max(1, |c^T z|).
  double tol_gap = 1e-11;
  int max_iter = 100;
  double mu_factor = 0.2;
  double step_fraction = 0.99;
};

/// Barrier path-following warm start finished by primal-dual predictor-corrector steps.
/// Never throws on numerical trouble; the outcome is reported through ConeSolution::status.
ConeSolution solve(const ConeProgram& prog, const SolverSettings& settings = {});

/// Convenience overload: tol_feas = tol_kkt = tol, gap target 1e-4 * tol.
ConeSolution solve(const ConeProgram& prog, double tol, int max_iter);

struct Residuals {
  double max_violation = 0.0;  // max over blocks of (||Az + b|| - d z - e)_+
  double objective = 0.0;
};

Residuals residuals(const ConeProgram& prog, const Vector& z);

/// Plain-text listing, one block per line. See docs/cone_program_format.md.
void write_listing(std::ostream& os, const ConeProgram& prog);
std::string to_listing(const ConeProgram& prog);

}  // namespace rcbf
