#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "flowplan/config.hpp"
#include "flowplan/mdp.hpp"
#include "flowplan/policy_iter.hpp"
#include "flowplan/simulator.hpp"

namespace flowplan {

/// Field described by the config; `strength` overrides the gyre A.
std::shared_ptr<const FlowField> make_field(const ExperimentConfig& cfg,
                                            std::optional<double> strength = std::nullopt);

/// State grid from grid.*, or an n x n grid spanning the field domain.
StateSpace make_states(const ExperimentConfig& cfg, std::optional<int> grid_n = std::nullopt);

std::shared_ptr<const MdpModel> make_model(const ExperimentConfig& cfg,
                                           std::shared_ptr<const FlowField> field,
                                           const StateSpace& states);

ApiConfig make_api_config(const ExperimentConfig& cfg, int k);

struct PlannerRun {
  std::string name;
  TrialStats stats;
  std::vector<Trajectory> trajectories;
  int solver_iterations = 0;
  bool solver_converged = true;
};

struct ExperimentResult {
  double strength = 0.0;
  std::vector<PlannerRun> runs;

  const PlannerRun* find(const std::string& name) const;
};

/// Solves each configured planner on one field and runs cfg.trials trials per
/// planner. Trial i uses trial_rng(cfg.seed, i) for every planner.
ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                std::optional<double> strength = std::nullopt);

struct SolveSummary {
  ClassicPiResult classic;
  ApiResult approximate;
  double max_abs_value = 0.0;
  double rmse = 0.0;
};

/// Classic and approximate PI; writes policies, value table, raster, mesh,
/// coefficients and diagnostics into `out`.
SolveSummary cmd_solve(const ExperimentConfig& cfg, const std::filesystem::path& out);

/// run_experiment over sweep.A (or the configured A); writes stats.csv and one
/// trajectory file per (planner, A).
std::vector<ExperimentResult> cmd_simulate(const ExperimentConfig& cfg,
                                           const std::filesystem::path& out);

struct MseRecord {
  int grid_n = 0;
  int k = 0;
  double mse = 0.0;
  double max_abs_value = 0.0;
};

/// Value MSE of approximate vs classic PI over sweep.grid_n and k in {1, 2};
/// writes mse.csv. `force_oracle_coefficients` replaces the FEM solution by the
/// oracle values at the mesh nodes.
std::vector<MseRecord> cmd_mse(const ExperimentConfig& cfg, const std::filesystem::path& out,
                               bool force_oracle_coefficients = false);

}  // namespace flowplan
