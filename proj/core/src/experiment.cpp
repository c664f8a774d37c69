#include "flowplan/experiment.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "flowplan/csv_export.hpp"
#include "flowplan/errors.hpp"

namespace flowplan {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  return os;
}

std::string strength_tag(double a) {
  std::ostringstream os;
  os << "A" << a;
  return os.str();
}

double max_abs(const ValueTable& v) {
  double m = 0.0;
  for (double x : v.values) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

const PlannerRun* ExperimentResult::find(const std::string& name) const {
  for (const auto& r : runs) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

std::shared_ptr<const FlowField> make_field(const ExperimentConfig& cfg,
                                            std::optional<double> strength) {
  const NoiseParams noise{cfg.sigma_x_kmh, cfg.sigma_y_kmh};
  if (cfg.field_kind == FieldKind::Grid) {
    std::ifstream in(cfg.field_csv);
    if (!in) throw ConfigError("field.csv", 0, "cannot open '" + cfg.field_csv + "'");
    return std::make_shared<const FlowField>(load_grid_field(read_field_csv(in), noise));
  }
  const GyreParams g{strength.value_or(cfg.gyre_strength), cfg.gyre_size_km};
  const Domain d{{0.0, 0.0}, {cfg.domain_width_km, cfg.domain_height_km}};
  return std::make_shared<const FlowField>(FlowField::gyre(g, noise, d));
}

StateSpace make_states(const ExperimentConfig& cfg, std::optional<int> grid_n) {
  Point2 origin = cfg.grid_origin;
  double cell = cfg.cell_km;
  int nx = cfg.grid_nx, ny = cfg.grid_ny;
  if (grid_n) {
    nx = ny = *grid_n;
    cell = cfg.domain_width_km / *grid_n;
    origin = {0.5 * cell, 0.5 * cell};
  }
  auto index = [&](double v, double o, int n) {
    return std::clamp(static_cast<int>(std::lround((v - o) / cell)), 0, n - 1);
  };
  StateSpace st(origin, cell, nx, ny, index(cfg.goal.x, origin.x, nx),
                index(cfg.goal.y, origin.y, ny));
  if (!grid_n) {
    for (const auto& [i, j] : cfg.obstacles) st.set_obstacle(i, j);
  }
  return st;
}

std::shared_ptr<const MdpModel> make_model(const ExperimentConfig& cfg,
                                           std::shared_ptr<const FlowField> field,
                                           const StateSpace& states) {
  MdpParams p;
  p.dt_h = cfg.dt_h;
  p.v_max_kmh = cfg.v_max_kmh;
  p.gamma = cfg.gamma;
  return std::make_shared<const MdpModel>(build_model(std::move(field), states, p));
}

ApiConfig make_api_config(const ExperimentConfig& cfg, int k) {
  ApiConfig a;
  a.k = k;
  a.max_iterations = cfg.api_max_iterations;
  a.moment_convention = cfg.moment_convention;
  a.diffusion_form = cfg.diffusion_form;
  a.initial_policy = cfg.initial_policy;
  return a;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, std::optional<double> strength) {
  validate(cfg);
  auto field = make_field(cfg, strength);
  const StateSpace states = make_states(cfg);
  auto model = make_model(cfg, field, states);
  const Point2 goal = states.position(states.goal());
  auto moments = std::make_shared<const MomentTable>(*model, cfg.moment_convention);

  SimParams sp;
  sp.goal_radius_km = cfg.goal_radius_km;
  sp.dt_sim_h = cfg.dt_sim_h;
  sp.budget_h = cfg.budget_h;
  sp.noise_mode = cfg.noise_mode;
  sp.requery_h = cfg.dt_h;

  ExperimentResult result;
  result.strength = field->gyre_params() ? field->gyre_params()->strength : 0.0;

  for (const std::string& name : cfg.planners) {
    PlannerRun run;
    Planner planner = GoalOrientedPlanner{goal, cfg.v_max_kmh};
    if (name == "pi") {
      ClassicPiOptions opts;
      opts.max_iterations = cfg.pi_max_iterations;
      ClassicPiResult pi = classic_policy_iteration(*model, opts);
      run.solver_iterations = pi.iterations;
      planner = DiscretePolicyPlanner{model, std::move(pi.policy)};
    } else if (name != "goal") {
      const int k = name == "api" ? cfg.k : (name == "api_k1" ? 1 : 2);
      ApiResult api = approximate_policy_iteration(*model, make_api_config(cfg, k));
      run.solver_iterations = api.iterations;
      run.solver_converged = api.converged;
      planner = ContinuousPolicyPlanner{model, moments, api.value};
    }
    run.name = name == "api" ? "api_k" + std::to_string(cfg.k) : name;
    run.trajectories.resize(static_cast<size_t>(cfg.trials));
#pragma omp parallel for schedule(dynamic)
    for (int t = 0; t < cfg.trials; ++t) {
      Rng rng = trial_rng(cfg.seed, static_cast<std::uint64_t>(t));
      run.trajectories[static_cast<size_t>(t)] =
          simulate_trial(*field, planner, cfg.start, goal, sp, rng, &states);
    }
    run.stats = summarize(run.trajectories);
    result.runs.push_back(std::move(run));
  }
  return result;
}

SolveSummary cmd_solve(const ExperimentConfig& cfg, const fs::path& out) {
  validate(cfg);
  fs::create_directories(out);
  auto field = make_field(cfg);
  const StateSpace states = make_states(cfg);
  auto model = make_model(cfg, field, states);

  SolveSummary s;
  ClassicPiOptions opts;
  opts.max_iterations = cfg.pi_max_iterations;
  s.classic = classic_policy_iteration(*model, opts);

  auto diag_os = open_out(out / "diagnostics.jsonl");
  for (size_t i = 0; i < s.classic.change_counts.size(); ++i) {
    IterationDiagnostics d;
    d.iteration = static_cast<int>(i) + 1;
    d.policy_changes = s.classic.change_counts[i];
    csv::write_diagnostics_line(diag_os, "classic_pi", d);
  }
  s.approximate = approximate_policy_iteration(
      *model, make_api_config(cfg, cfg.k),
      [&](const IterationDiagnostics& d) { csv::write_diagnostics_line(diag_os, "approximate_pi", d); });
  csv::write_summary_line(diag_os, "classic_pi", s.classic.iterations, true, 0);
  csv::write_summary_line(diag_os, "approximate_pi", s.approximate.iterations,
                          s.approximate.converged, s.approximate.cycle_length);

  const ContinuousValue& v = *s.approximate.value;
  s.max_abs_value = max_abs(s.classic.values);
  s.rmse = std::sqrt(value_mse(v, s.classic.values, states));

  {
    auto os = open_out(out / "policy_pi.csv");
    csv::write_policy(os, s.classic.policy);
  }
  {
    auto os = open_out(out / "policy_api.csv");
    csv::write_policy(os, s.approximate.policy);
  }
  {
    auto os = open_out(out / "values_pi.csv");
    csv::write_value_table(os, states, s.classic.values);
  }
  {
    auto os = open_out(out / "value_raster.csv");
    csv::write_raster(os, v, cfg.raster_n, cfg.raster_n);
  }
  {
    auto os = open_out(out / "mesh_nodes.csv");
    csv::write_mesh_nodes(os, v.mesh());
  }
  {
    auto os = open_out(out / "mesh_triangles.csv");
    csv::write_mesh_triangles(os, v.mesh());
  }
  {
    auto os = open_out(out / "coefficients.csv");
    const auto coeffs = assemble_coefficients(*model, s.approximate.policy,
                                              v.mesh().node_to_state(), cfg.moment_convention,
                                              cfg.diffusion_form);
    csv::write_coefficients(os, v.mesh(), coeffs);
  }
  return s;
}

std::vector<ExperimentResult> cmd_simulate(const ExperimentConfig& cfg, const fs::path& out) {
  validate(cfg);
  fs::create_directories(out);
  std::vector<double> sweep = cfg.sweep_A;
  if (sweep.empty() || cfg.field_kind == FieldKind::Grid) sweep = {cfg.gyre_strength};

  std::vector<ExperimentResult> results;
  for (double a : sweep) results.push_back(run_experiment(cfg, a));

  auto stats = open_out(out / "stats.csv");
  csv::write_stats_header(stats);
  for (const auto& r : results) {
    for (const auto& run : r.runs) {
      csv::write_stats_row(stats, run.name, r.strength, cfg.sigma_x_kmh, run.stats);
      auto os = open_out(out / ("trajectories_" + run.name + "_" + strength_tag(r.strength) + ".csv"));
      csv::write_trajectories(os, run.trajectories);
    }
  }
  return results;
}

std::vector<MseRecord> cmd_mse(const ExperimentConfig& cfg, const fs::path& out,
                               bool force_oracle_coefficients) {
  validate(cfg);
  fs::create_directories(out);
  auto field = make_field(cfg);
  std::vector<MseRecord> records;
  for (int n : cfg.sweep_grid_n) {
    const StateSpace states = make_states(cfg, n);
    auto model = make_model(cfg, field, states);
    ClassicPiOptions opts;
    opts.max_iterations = cfg.pi_max_iterations;
    const ClassicPiResult pi = classic_policy_iteration(*model, opts);
    for (int k : {1, 2}) {
      std::shared_ptr<const ContinuousValue> v;
      if (force_oracle_coefficients) {
        auto mesh = std::make_shared<const Mesh>(build_mesh(states, k));
        Eigen::VectorXd a(mesh->num_nodes());
        for (int i = 0; i < mesh->num_nodes(); ++i) {
          a[i] = pi.values[mesh->node_to_state()[static_cast<size_t>(i)]];
        }
        v = std::make_shared<const ContinuousValue>(mesh, std::move(a));
      } else {
        v = approximate_policy_iteration(*model, make_api_config(cfg, k)).value;
      }
      records.push_back({n, k, value_mse(*v, pi.values, states), max_abs(pi.values)});
    }
  }
  auto os = open_out(out / "mse.csv");
  csv::write_mse_header(os);
  for (const auto& r : records) csv::write_mse_row(os, r.grid_n, r.k, r.mse, r.max_abs_value);
  return records;
}

}  // namespace flowplan
