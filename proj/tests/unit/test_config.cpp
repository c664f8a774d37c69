#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "flowplan/config.hpp"
#include "flowplan/errors.hpp"

using namespace flowplan;

TEST_CASE("defaults survive a round trip") {
  const ExperimentConfig c;
  CHECK(parse_config_text(serialize_config(c)) == c);
}

TEST_CASE("non-default settings survive a round trip") {
  ExperimentConfig c;
  c.gyre_strength = 1.5;
  c.sigma_x_kmh = 3.0;
  c.sigma_y_kmh = 0.25;
  c.k = 2;
  c.moment_convention = MomentConvention::PaperLiteral;
  c.diffusion_form = DiffusionForm::Divergence;
  c.initial_policy = InitialPolicy::UniformNorth;
  c.noise_mode = NoiseMode::Brownian;
  c.seed = 123456789012345ULL;
  c.planners = {"pi", "api_k2", "goal"};
  c.sweep_A = {0, 0.5, 1.25};
  c.sweep_grid_n = {6, 12};
  c.obstacles = {{3, 4}, {5, 6}};
  c.dt_sim_h = 0.05;
  c.gamma = 0.9;
  CHECK(parse_config_text(serialize_config(c)) == c);
}

TEST_CASE("shipped config parses and validates") {
  const auto path = std::filesystem::path(FLOWPLAN_SOURCE_DIR) / "configs" / "gyre_20x20.cfg";
  const ExperimentConfig c = load_config(path);
  CHECK(c.gyre_strength == 0.5);
  CHECK(c.grid_nx == 20);
  CHECK(c.goal == Point2{37, 37});
  CHECK_NOTHROW(validate(c));
}

TEST_CASE("errors name the key") {
  auto key_of = [](const std::string& text) {
    try {
      validate(parse_config_text(text));
    } catch (const ConfigError& e) {
      return e.key();
    }
    return std::string("<none>");
  };
  CHECK(key_of("api.k = 3\n") == "api.k");
  CHECK(key_of("mdp.gamma = 1\n") == "mdp.gamma");
  CHECK(key_of("field.A = strong\n") == "field.A");
  CHECK(key_of("grid.cell = 2\n") == "grid.cell");
  CHECK(key_of("api.moment_convention = sideways\n") == "api.moment_convention");
  CHECK(key_of("api.diffusion_form = mixed\n") == "api.diffusion_form");
  CHECK(key_of("sim.planners = [pi, dijkstra]\n") == "sim.planners");
  CHECK(key_of("goal.x_km = 90\n") == "goal.x_km");
  CHECK(key_of("# comment only\n\nfield.A = 1.0\n") == "<none>");

  try {
    parse_config_text("field.A = 1\nfield.A = 2\n");
    FAIL("duplicate key accepted");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "field.A");
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse_config_text("just words\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/flowplan.cfg"), ConfigError);
}

TEST_CASE("enum names") {
  CHECK(to_string(MomentConvention::Displacement) == "displacement");
  CHECK(to_string(MomentConvention::PaperLiteral) == "paper-literal");
  CHECK(to_string(DiffusionForm::NonDivergence) == "nondivergence");
  CHECK(to_string(InitialPolicy::UniformNorth) == "uniform-N");
  CHECK(to_string(NoiseMode::PerTrial) == "per-trial");
}
