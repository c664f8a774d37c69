#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "flowplan/geometry.hpp"
#include "flowplan/policy_iter.hpp"
#include "flowplan/simulator.hpp"
#include "flowplan/taylor_pde.hpp"

namespace flowplan {

enum class FieldKind { Gyre, Grid };

/// Everything one run needs. Serialized as flat `dotted.key = value` text;
/// see configs/README.md for the key reference.
struct ExperimentConfig {
  // field
  FieldKind field_kind = FieldKind::Gyre;
  double gyre_strength = 0.5;
  double gyre_size_km = 20.0;
  std::string field_csv;
  double domain_width_km = 40.0;
  double domain_height_km = 40.0;
  double sigma_x_kmh = 1.0;
  double sigma_y_kmh = 1.0;

  // state grid
  int grid_nx = 20;
  int grid_ny = 20;
  double cell_km = 2.0;
  Point2 grid_origin{1.0, 1.0};
  std::vector<std::pair<int, int>> obstacles;

  Point2 start{1.0, 1.0};
  Point2 goal{37.0, 37.0};

  // MDP
  double v_max_kmh = 3.0;
  double dt_h = 1.0;
  double gamma = 0.95;
  int pi_max_iterations = 500;

  // approximate policy iteration
  int k = 1;
  int api_max_iterations = 50;
  MomentConvention moment_convention = MomentConvention::Displacement;
  DiffusionForm diffusion_form = DiffusionForm::NonDivergence;
  InitialPolicy initial_policy = InitialPolicy::GoalAimed;

  // simulation
  int trials = 10;
  double budget_h = 30.0;
  double dt_sim_h = 0.1;
  double goal_radius_km = 1.0;
  NoiseMode noise_mode = NoiseMode::PerStep;
  std::uint64_t seed = 1;
  std::vector<std::string> planners{"pi", "api", "goal"};

  // sweeps and output
  std::vector<double> sweep_A;
  std::vector<int> sweep_grid_n{10, 20};
  int raster_n = 81;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Parses config text. Unknown keys, malformed values and inconsistent
/// settings raise ConfigError naming the key and line.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical text form; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& cfg);

/// Cross-field checks (goal inside grid, k in {1, 2}, ...). Throws ConfigError.
void validate(const ExperimentConfig& cfg);

std::string to_string(MomentConvention c);
std::string to_string(DiffusionForm f);
std::string to_string(InitialPolicy p);
std::string to_string(NoiseMode m);

}  // namespace flowplan
