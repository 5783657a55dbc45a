#include <iostream>

#include <CLI11.hpp>

#include "rcbf/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Robust CBF safety filter: lateral-vehicle simulations and solver checks",
               "rcbf-shield"};
  app.require_subcommand(1);

  rcbf::RunConfig cfg;
  std::string depth = "quick";
  std::uint64_t seed = 0;

  auto add_run_options = [&](CLI::App* sub) {
    auto* scenario = sub->add_option("--scenario", cfg.scenario, "preset name or config path");
    sub->add_option("scenario_pos", cfg.scenario, "preset name or config path (positional)")
        ->excludes(scenario);
    sub->add_option("--config", cfg.config_path, "scenario config file")
        ->check(CLI::ExistingFile)
        ->excludes(scenario);
    sub->add_option("--out", cfg.out_dir, "output directory (default $RCBF_SHIELD_OUT or rcbf_out)");
    sub->add_option_function<double>("--design-theta", [&](double v) { cfg.design_theta = v; },
                                      "filter uncertainty level in [0, 1)");
    sub->add_option_function<double>("--plant-theta", [&](double v) { cfg.plant_theta = v; },
                                     "plant sector level in [0, 1)");
    sub->add_option_function<double>("--dt", [&](double v) { cfg.dt = v; }, "step size [s]");
    sub->add_option_function<double>("--horizon", [&](double v) { cfg.horizon = v; },
                                     "simulated time [s]");
    sub->add_flag("--svg", cfg.emit_svg, "also write trajectory.svg");
    sub->add_option_function<std::uint64_t>("--seed", [&](std::uint64_t v) { cfg.seed = v; },
                                            "seed for random nonlinearity fixtures");
  };

  auto* simulate = app.add_subcommand("simulate", "run one scenario");
  add_run_options(simulate);
  auto* sweep = app.add_subcommand("sweep", "run a scenario over a list of design theta levels");
  add_run_options(sweep);
  sweep->add_option("--thetas", cfg.thetas, "design levels (default: the scenario's list)")
      ->delimiter(',');
  auto* verify = app.add_subcommand("verify", "run the solver and integrator checks");
  verify->add_option("--depth", depth, "quick or full")->check(CLI::IsMember({"quick", "full"}));
  verify->add_option("--seed", seed, "base seed for the random instances");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : rcbf::kExitError;
  }

  if (*simulate) return rcbf::cmd_simulate(cfg, std::cout, std::cerr);
  if (*sweep) return rcbf::cmd_sweep(cfg, std::cout, std::cerr);
  cfg.depth = rcbf::verify_depth_from_string(depth);
  if (verify->count("--seed") > 0) cfg.seed = seed;
  return rcbf::cmd_verify(cfg, std::cout);
}
