// flowplan: route planning for vehicles in uncertain flow fields.
//
//   flowplan solve    --config run.cfg --out results/
//   flowplan simulate --config run.cfg --seed 7 --out results/
//   flowplan mse      --config mse.cfg --out results/
//
// Exit codes: 0 success, 1 usage or I/O, 2 config error, 3 numerical failure.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "flowplan/config.hpp"
#include "flowplan/errors.hpp"
#include "flowplan/experiment.hpp"

namespace {

struct CommonArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "results";
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config, "Config file (dotted.key = value)")->required();
  cmd->add_option("--seed", args.seed, "Override sim.seed");
  cmd->add_option("--out", args.out, "Output directory")->capture_default_str();
}

flowplan::ExperimentConfig load(const CommonArgs& args) {
  auto cfg = flowplan::load_config(args.config);
  if (args.seed) cfg.seed = *args.seed;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Route planning in uncertain flow fields"};
  app.require_subcommand(1);

  CommonArgs solve_args, sim_args, mse_args;
  auto* solve = app.add_subcommand("solve", "Classic and approximate policy iteration");
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo trials for each planner");
  auto* mse = app.add_subcommand("mse", "Approximation error versus grid size and k");
  add_common(solve, solve_args);
  add_common(simulate, sim_args);
  add_common(mse, mse_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help and version requests exit 0; every other parse failure is a usage error.
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*solve) {
      const auto s = flowplan::cmd_solve(load(solve_args), solve_args.out);
      std::printf("classic PI: %d iterations\n", s.classic.iterations);
      const auto& api = s.approximate;
      std::string status = api.converged ? "converged" : "not converged";
      if (api.cycle_length > 0) status += ", policy cycle of period " + std::to_string(api.cycle_length);
      std::printf("approximate PI: %d iterations (%s), value RMSE %.6g, max |v| %.6g\n",
                  api.iterations, status.c_str(), s.rmse, s.max_abs_value);
    } else if (*simulate) {
      for (const auto& r : flowplan::cmd_simulate(load(sim_args), sim_args.out)) {
        for (const auto& run : r.runs) {
          std::printf("A=%-5g %-8s reached %2d/%-2d  time %6.2f +- %5.2f h  length %6.2f +- %5.2f km\n",
                      r.strength, run.name.c_str(), run.stats.reached, run.stats.trials,
                      run.stats.mean_time_h, run.stats.std_time_h, run.stats.mean_length_km,
                      run.stats.std_length_km);
        }
      }
    } else if (*mse) {
      for (const auto& r : flowplan::cmd_mse(load(mse_args), mse_args.out)) {
        std::printf("n=%-3d k=%d  mse %.6g  max |v| %.6g\n", r.grid_n, r.k, r.mse, r.max_abs_value);
      }
    }
  } catch (const flowplan::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const flowplan::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const flowplan::IterationLimitError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
