#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rcbf/commands.hpp"
#include "rcbf/cone_solver.hpp"
#include "rcbf/safety_filter.hpp"
#include "rcbf/sector_model.hpp"
#include "rcbf/simulation.hpp"
#include "rcbf/verification.hpp"
#include "rcbf/vehicle_lateral.hpp"

namespace py = pybind11;
using namespace rcbf;

namespace {

RowVector as_row(const Vector& a) { return a.transpose(); }

UncertaintyLevel as_level(const py::object& theta) {
  if (py::isinstance<py::float_>(theta) || py::isinstance<py::int_>(theta)) {
    return theta.cast<double>();
  }
  return theta.cast<Vector>();
}

Vector as_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

template <typename T>
Matrix stack_rows(const std::vector<T>& rows) {
  if (rows.empty()) return Matrix(0, 0);
  Matrix out(static_cast<Eigen::Index>(rows.size()), rows.front().size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out.row(static_cast<Eigen::Index>(k)) = rows[k].transpose();
  }
  return out;
}

Vector column(const std::vector<Vector>& rows, Eigen::Index j) {
  Vector out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) out(static_cast<Eigen::Index>(k)) = rows[k](j);
  return out;
}

py::dict simulate_py(const std::string& scenario, std::optional<double> design_theta,
                     std::optional<double> plant_theta, std::optional<double> dt,
                     std::optional<double> horizon, std::optional<std::uint64_t> seed) {
  RunConfig cfg;
  cfg.scenario = scenario;
  cfg.design_theta = design_theta;
  cfg.plant_theta = plant_theta;
  cfg.dt = dt;
  cfg.horizon = horizon;
  cfg.seed = seed;
  const ScenarioPreset preset = load_scenario(cfg);
  if (preset.is_sweep() && !design_theta) {
    throw std::invalid_argument("'" + preset.name + "' is a sweep; pass design_theta");
  }
  const Trajectory traj = simulate(build_scenario(preset.base));
  const TrajectoryMetrics m = trajectory_metrics(traj, obstacle_distance);

  py::dict metrics;
  metrics["min_h"] = m.min_h;
  metrics["argmin_t"] = m.argmin_t;
  metrics["min_distance"] = m.min_distance;
  metrics["violation"] = m.violation;
  metrics["steps_altered"] = m.steps_altered;
  metrics["steps_infeasible"] = m.steps_infeasible;
  metrics["max_abs_u"] = m.max_abs_u;

  std::vector<bool> altered(traj.altered.begin(), traj.altered.end());
  py::dict out;
  out["name"] = preset.base.name;
  out["t"] = as_vector(traj.times);
  out["x"] = stack_rows(traj.states);
  out["u0"] = column(traj.u0s, 0);
  out["u"] = column(traj.us, 0);
  out["w"] = column(traj.ws, 0);
  out["h"] = as_vector(traj.h_vals);
  out["hdot"] = as_vector(traj.hdot_vals);
  out["margin"] = as_vector(traj.margins);
  out["altered"] = altered;
  out["metrics"] = metrics;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Robust CBF safety filter for sector-bounded input nonlinearities";

  m.def(
      "normalize_sector",
      [](double alpha, double beta) {
        const NormalizedUncertainty n = normalize_sector({alpha, beta});
        return py::make_tuple(n.theta, n.scale);
      },
      py::arg("alpha"), py::arg("beta"), "Sector [alpha, beta] -> (theta, scale).");

  m.def(
      "worst_case_input",
      [](const Vector& u, const Vector& a, double theta) {
        return worst_case_input(u, as_row(a), theta);
      },
      py::arg("u"), py::arg("a"), py::arg("theta"),
      "Minimizer of a (u + w) over ||w|| <= theta ||u||.");

  m.def(
      "optimal_multiplier",
      [](const Vector& u, const Vector& a, double theta) {
        return optimal_multiplier(u, as_row(a), theta);
      },
      py::arg("u"), py::arg("a"), py::arg("theta"));

  m.def(
      "robust_margin",
      [](double p, const Vector& a, const Vector& u, const py::object& theta) {
        const LinearizedConstraint c{p, as_row(a)};
        const UncertaintyLevel level = as_level(theta);
        if (const double* t = std::get_if<double>(&level)) return c.robust_margin(u, *t);
        return c.robust_margin(u, std::get<Vector>(level));
      },
      py::arg("p"), py::arg("a"), py::arg("u"), py::arg("theta"));

  py::class_<FilterResult>(m, "FilterResult")
      .def_readonly("u", &FilterResult::u)
      .def_readonly("w_star", &FilterResult::w_star)
      .def_readonly("margin", &FilterResult::margin)
      .def_readonly("altered", &FilterResult::altered)
      .def_property_readonly("status", [](const FilterResult& r) { return to_string(r.status); })
      .def_property_readonly("path", [](const FilterResult& r) { return to_string(r.path); })
      .def_readonly("solver_invoked", &FilterResult::solver_invoked)
      .def_readonly("solver_iterations", &FilterResult::solver_iterations)
      .def_readonly("q_star", &FilterResult::q_star)
      .def_readonly("u_pos", &FilterResult::u_pos)
      .def_readonly("u_neg", &FilterResult::u_neg);

  m.def(
      "safety_filter",
      [](const Vector& u0, double p, const Vector& a, const py::object& theta,
         const std::string& mode, std::optional<double> input_bound) {
        FilterProblem prob;
        prob.u0 = u0;
        prob.constraint = {p, as_row(a)};
        prob.theta = as_level(theta);
        prob.mode = filter_mode_from_string(mode);
        prob.input_bound = input_bound;
        return filter(prob);
      },
      py::arg("u0"), py::arg("p"), py::arg("a"), py::arg("theta"), py::arg("mode") = "auto",
      py::arg("input_bound") = py::none(),
      "Minimally modifies u0 so that p + a (u + w) >= 0 for every admissible w.");

  py::class_<ConeSolution>(m, "ConeSolution")
      .def_readonly("z", &ConeSolution::z)
      .def_readonly("objective", &ConeSolution::objective)
      .def_property_readonly("status", [](const ConeSolution& s) { return to_string(s.status); })
      .def_readonly("iterations", &ConeSolution::iterations)
      .def_readonly("primal_residual", &ConeSolution::primal_residual)
      .def_readonly("kkt_residual", &ConeSolution::kkt_residual)
      .def_readonly("duality_gap", &ConeSolution::duality_gap)
      .def_readonly("duals", &ConeSolution::duals);

  m.def(
      "solve_cone_program",
      [](const Vector& c, const std::vector<std::tuple<Matrix, Vector, Vector, double>>& blocks,
         double tol_feas, double tol_gap, int max_iter) {
        ConeProgram prog;
        prog.c = c;
        for (const auto& [A, b, d, e] : blocks) {
          prog.blocks.push_back({A.rows() == 0 ? Matrix(0, c.size()) : A, b, as_row(d), e});
        }
        SolverSettings st;
        st.tol_feas = tol_feas;
        st.tol_kkt = tol_feas;
        st.tol_gap = tol_gap;
        st.max_iter = max_iter;
        return solve(prog, st);
      },
      py::arg("c"), py::arg("blocks"), py::arg("tol_feas") = 1e-8, py::arg("tol_gap") = 1e-11,
      py::arg("max_iter") = 100,
      "minimize c^T z s.t. ||A z + b|| <= d^T z + e for every (A, b, d, e) block.");

  m.def("preset_names", [] {
    std::vector<std::string> names;
    for (const auto& p : preset_scenarios()) names.push_back(p.name);
    return names;
  });

  m.def("simulate", &simulate_py, py::arg("scenario"), py::arg("design_theta") = py::none(),
        py::arg("plant_theta") = py::none(), py::arg("dt") = py::none(),
        py::arg("horizon") = py::none(), py::arg("seed") = py::none(),
        "Runs a preset or config file and returns the trajectory arrays and metrics.");

  m.def(
      "run_verification",
      [](const std::string& depth, std::uint64_t seed) {
        VerifyOptions opts;
        opts.depth = verify_depth_from_string(depth);
        opts.seed = seed;
        py::list out;
        for (const CheckResult& r : run_verification(opts)) {
          py::dict d;
          d["name"] = r.name;
          d["passed"] = r.passed;
          d["measured"] = r.measured;
          d["threshold"] = r.threshold;
          d["instances"] = r.instances;
          d["seconds"] = r.seconds;
          d["detail"] = r.detail;
          out.append(d);
        }
        return out;
      },
      py::arg("depth") = "quick", py::arg("seed") = 1);
}
