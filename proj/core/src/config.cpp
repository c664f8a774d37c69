#include "flowplan/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include "flowplan/errors.hpp"

namespace flowplan {

namespace {

struct Entry {
  std::string value;
  int line = 0;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

double to_double(const std::string& key, const Entry& e) {
  const std::string v = trim(e.value);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    throw ConfigError(key, e.line, "expected a number, got '" + v + "'");
  }
  return out;
}

long long to_integer(const std::string& key, const Entry& e) {
  const std::string v = trim(e.value);
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    throw ConfigError(key, e.line, "expected an integer, got '" + v + "'");
  }
  return out;
}

std::vector<std::string> to_list(const std::string& key, const Entry& e) {
  const std::string v = trim(e.value);
  if (v.size() < 2 || v.front() != '[' || v.back() != ']') {
    throw ConfigError(key, e.line, "expected a list like [a, b], got '" + v + "'");
  }
  std::vector<std::string> out;
  const std::string body = trim(v.substr(1, v.size() - 2));
  if (body.empty()) return out;
  std::istringstream in(body);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = unquote(trim(item));
    if (item.empty()) throw ConfigError(key, e.line, "empty list element");
    out.push_back(item);
  }
  return out;
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return os.str();
}

template <class T, class F>
std::string fmt_list(const std::vector<T>& items, F&& f) {
  std::string out = "[";
  for (size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += f(items[i]);
  }
  return out + "]";
}

MomentConvention parse_convention(const std::string& key, const Entry& e) {
  const std::string v = unquote(trim(e.value));
  if (v == "displacement") return MomentConvention::Displacement;
  if (v == "paper-literal") return MomentConvention::PaperLiteral;
  throw ConfigError(key, e.line, "expected displacement or paper-literal, got '" + v + "'");
}

DiffusionForm parse_form(const std::string& key, const Entry& e) {
  const std::string v = unquote(trim(e.value));
  if (v == "nondivergence") return DiffusionForm::NonDivergence;
  if (v == "divergence") return DiffusionForm::Divergence;
  throw ConfigError(key, e.line, "expected nondivergence or divergence, got '" + v + "'");
}

InitialPolicy parse_initial(const std::string& key, const Entry& e) {
  const std::string v = unquote(trim(e.value));
  if (v == "goal-aimed") return InitialPolicy::GoalAimed;
  if (v == "uniform-N") return InitialPolicy::UniformNorth;
  throw ConfigError(key, e.line, "expected goal-aimed or uniform-N, got '" + v + "'");
}

NoiseMode parse_noise_mode(const std::string& key, const Entry& e) {
  const std::string v = unquote(trim(e.value));
  if (v == "per-step") return NoiseMode::PerStep;
  if (v == "per-trial") return NoiseMode::PerTrial;
  if (v == "brownian") return NoiseMode::Brownian;
  throw ConfigError(key, e.line, "expected per-step, per-trial or brownian, got '" + v + "'");
}

FieldKind parse_field_kind(const std::string& key, const Entry& e) {
  const std::string v = unquote(trim(e.value));
  if (v == "gyre") return FieldKind::Gyre;
  if (v == "grid") return FieldKind::Grid;
  throw ConfigError(key, e.line, "expected gyre or grid, got '" + v + "'");
}

int line_of(const std::map<std::string, Entry>& entries, const std::string& key) {
  const auto it = entries.find(key);
  return it == entries.end() ? 0 : it->second.line;
}

void validate_impl(const ExperimentConfig& c, const std::map<std::string, Entry>& entries) {
  auto fail = [&](const std::string& key, const std::string& what) {
    throw ConfigError(key, line_of(entries, key), what);
  };
  if (c.k != 1 && c.k != 2) fail("api.k", "must be 1 or 2, got " + std::to_string(c.k));
  if (!(c.gamma >= 0.0 && c.gamma < 1.0)) fail("mdp.gamma", "must lie in [0, 1)");
  if (!(c.v_max_kmh > 0)) fail("vehicle.v_max_kmh", "must be positive");
  if (!(c.dt_h > 0)) fail("mdp.dt_h", "must be positive");
  if (!(c.gyre_size_km > 0)) fail("field.s_km", "must be positive");
  if (!(c.domain_width_km > 0)) fail("domain.width_km", "must be positive");
  if (!(c.domain_height_km > 0)) fail("domain.height_km", "must be positive");
  if (c.sigma_x_kmh < 0) fail("noise.sigma_x_kmh", "must be non-negative");
  if (c.sigma_y_kmh < 0) fail("noise.sigma_y_kmh", "must be non-negative");
  if (c.grid_nx < 2) fail("grid.nx", "must be >= 2");
  if (c.grid_ny < 2) fail("grid.ny", "must be >= 2");
  if (!(c.cell_km > 0)) fail("grid.cell_km", "must be positive");
  if (c.pi_max_iterations < 1) fail("mdp.max_iterations", "must be >= 1");
  if (c.api_max_iterations < 1) fail("api.max_iterations", "must be >= 1");
  if (c.trials < 1) fail("sim.trials", "must be >= 1");
  if (!(c.budget_h > 0)) fail("sim.budget_h", "must be positive");
  if (!(c.dt_sim_h > 0)) fail("sim.dt_sim_h", "must be positive");
  if (!(c.goal_radius_km > 0)) fail("sim.goal_radius_km", "must be positive");
  if (c.raster_n < 2) fail("raster.n", "must be >= 2");
  if (c.field_kind == FieldKind::Grid && c.field_csv.empty()) {
    fail("field.csv", "required when field.kind = grid");
  }
  for (int n : c.sweep_grid_n) {
    if (n < 3) fail("sweep.grid_n", "grid sizes must be >= 3");
  }
  for (const auto& p : c.planners) {
    if (p != "pi" && p != "api" && p != "api_k1" && p != "api_k2" && p != "goal") {
      fail("sim.planners", "unknown planner '" + p + "' (pi, api, api_k1, api_k2, goal)");
    }
  }
  const double half = 0.5 * c.cell_km;
  auto in_grid = [&](const Point2& p) {
    return p.x >= c.grid_origin.x - half && p.y >= c.grid_origin.y - half &&
           p.x <= c.grid_origin.x + (c.grid_nx - 0.5) * c.cell_km &&
           p.y <= c.grid_origin.y + (c.grid_ny - 0.5) * c.cell_km;
  };
  if (!in_grid(c.goal)) fail("goal.x_km", "goal lies outside the state grid");
  if (!in_grid(c.start)) fail("start.x_km", "start lies outside the state grid");
  for (const auto& [i, j] : c.obstacles) {
    if (i < 0 || j < 0 || i >= c.grid_nx || j >= c.grid_ny) {
      fail("obstacles.i", "obstacle cell outside the grid");
    }
  }
}

}  // namespace

std::string to_string(MomentConvention c) {
  return c == MomentConvention::Displacement ? "displacement" : "paper-literal";
}

std::string to_string(DiffusionForm f) {
  return f == DiffusionForm::NonDivergence ? "nondivergence" : "divergence";
}

std::string to_string(InitialPolicy p) {
  return p == InitialPolicy::GoalAimed ? "goal-aimed" : "uniform-N";
}

std::string to_string(NoiseMode m) {
  switch (m) {
    case NoiseMode::PerStep: return "per-step";
    case NoiseMode::PerTrial: return "per-trial";
    case NoiseMode::Brownian: return "brownian";
  }
  return "per-step";
}

ExperimentConfig parse_config(std::istream& in) {
  std::map<std::string, Entry> entries;
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("", lineno, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("", lineno, "missing key");
    if (entries.count(key)) throw ConfigError(key, lineno, "duplicate key");
    entries[key] = {trim(line.substr(eq + 1)), lineno};
  }

  ExperimentConfig c;
  using Setter = std::function<void(const std::string&, const Entry&)>;
  const std::map<std::string, Setter> setters{
      {"field.kind", [&](auto& k, auto& e) { c.field_kind = parse_field_kind(k, e); }},
      {"field.A", [&](auto& k, auto& e) { c.gyre_strength = to_double(k, e); }},
      {"field.s_km", [&](auto& k, auto& e) { c.gyre_size_km = to_double(k, e); }},
      {"field.csv", [&](auto&, auto& e) { c.field_csv = unquote(trim(e.value)); }},
      {"domain.width_km", [&](auto& k, auto& e) { c.domain_width_km = to_double(k, e); }},
      {"domain.height_km", [&](auto& k, auto& e) { c.domain_height_km = to_double(k, e); }},
      {"noise.sigma_kmh",
       [&](auto& k, auto& e) { c.sigma_x_kmh = c.sigma_y_kmh = to_double(k, e); }},
      {"noise.sigma_x_kmh", [&](auto& k, auto& e) { c.sigma_x_kmh = to_double(k, e); }},
      {"noise.sigma_y_kmh", [&](auto& k, auto& e) { c.sigma_y_kmh = to_double(k, e); }},
      {"grid.nx", [&](auto& k, auto& e) { c.grid_nx = static_cast<int>(to_integer(k, e)); }},
      {"grid.ny", [&](auto& k, auto& e) { c.grid_ny = static_cast<int>(to_integer(k, e)); }},
      {"grid.cell_km", [&](auto& k, auto& e) { c.cell_km = to_double(k, e); }},
      {"grid.origin_x_km", [&](auto& k, auto& e) { c.grid_origin.x = to_double(k, e); }},
      {"grid.origin_y_km", [&](auto& k, auto& e) { c.grid_origin.y = to_double(k, e); }},
      {"start.x_km", [&](auto& k, auto& e) { c.start.x = to_double(k, e); }},
      {"start.y_km", [&](auto& k, auto& e) { c.start.y = to_double(k, e); }},
      {"goal.x_km", [&](auto& k, auto& e) { c.goal.x = to_double(k, e); }},
      {"goal.y_km", [&](auto& k, auto& e) { c.goal.y = to_double(k, e); }},
      {"vehicle.v_max_kmh", [&](auto& k, auto& e) { c.v_max_kmh = to_double(k, e); }},
      {"mdp.dt_h", [&](auto& k, auto& e) { c.dt_h = to_double(k, e); }},
      {"mdp.gamma", [&](auto& k, auto& e) { c.gamma = to_double(k, e); }},
      {"mdp.max_iterations",
       [&](auto& k, auto& e) { c.pi_max_iterations = static_cast<int>(to_integer(k, e)); }},
      {"api.k", [&](auto& k, auto& e) { c.k = static_cast<int>(to_integer(k, e)); }},
      {"api.max_iterations",
       [&](auto& k, auto& e) { c.api_max_iterations = static_cast<int>(to_integer(k, e)); }},
      {"api.moment_convention",
       [&](auto& k, auto& e) { c.moment_convention = parse_convention(k, e); }},
      {"api.diffusion_form", [&](auto& k, auto& e) { c.diffusion_form = parse_form(k, e); }},
      {"api.initial_policy", [&](auto& k, auto& e) { c.initial_policy = parse_initial(k, e); }},
      {"sim.trials", [&](auto& k, auto& e) { c.trials = static_cast<int>(to_integer(k, e)); }},
      {"sim.budget_h", [&](auto& k, auto& e) { c.budget_h = to_double(k, e); }},
      {"sim.dt_sim_h", [&](auto& k, auto& e) { c.dt_sim_h = to_double(k, e); }},
      {"sim.goal_radius_km", [&](auto& k, auto& e) { c.goal_radius_km = to_double(k, e); }},
      {"sim.noise_mode", [&](auto& k, auto& e) { c.noise_mode = parse_noise_mode(k, e); }},
      {"sim.seed",
       [&](auto& k, auto& e) {
         const long long v = to_integer(k, e);
         if (v < 0) throw ConfigError(k, e.line, "seed must be non-negative");
         c.seed = static_cast<std::uint64_t>(v);
       }},
      {"sim.planners", [&](auto& k, auto& e) { c.planners = to_list(k, e); }},
      {"sweep.A",
       [&](auto& k, auto& e) {
         c.sweep_A.clear();
         for (const auto& s : to_list(k, e)) c.sweep_A.push_back(to_double(k, {s, e.line}));
       }},
      {"sweep.grid_n",
       [&](auto& k, auto& e) {
         c.sweep_grid_n.clear();
         for (const auto& s : to_list(k, e)) {
           c.sweep_grid_n.push_back(static_cast<int>(to_integer(k, {s, e.line})));
         }
       }},
      {"raster.n", [&](auto& k, auto& e) { c.raster_n = static_cast<int>(to_integer(k, e)); }},
      {"obstacles.i", [](auto&, auto&) {}},
      {"obstacles.j", [](auto&, auto&) {}},
  };

  for (const auto& [key, entry] : entries) {
    const auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError(key, entry.line, "unknown key");
    it->second(key, entry);
  }

  const bool has_i = entries.count("obstacles.i") > 0;
  const bool has_j = entries.count("obstacles.j") > 0;
  if (has_i != has_j) {
    const std::string missing = has_i ? "obstacles.j" : "obstacles.i";
    throw ConfigError(missing, 0, "obstacles.i and obstacles.j must be given together");
  }
  if (has_i) {
    const auto& ei = entries.at("obstacles.i");
    const auto& ej = entries.at("obstacles.j");
    const auto li = to_list("obstacles.i", ei);
    const auto lj = to_list("obstacles.j", ej);
    if (li.size() != lj.size()) {
      throw ConfigError("obstacles.j", ej.line, "obstacles.i and obstacles.j differ in length");
    }
    for (size_t n = 0; n < li.size(); ++n) {
      c.obstacles.emplace_back(static_cast<int>(to_integer("obstacles.i", {li[n], ei.line})),
                               static_cast<int>(to_integer("obstacles.j", {lj[n], ej.line})));
    }
  }

  validate_impl(c, entries);
  return c;
}

ExperimentConfig parse_config_text(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", 0, "cannot open " + path.string());
  ExperimentConfig cfg = parse_config(in);
  // A relative field.csv names a file next to the config.
  if (!cfg.field_csv.empty() && std::filesystem::path(cfg.field_csv).is_relative()) {
    cfg.field_csv = (path.parent_path() / cfg.field_csv).string();
  }
  return cfg;
}

void validate(const ExperimentConfig& cfg) { validate_impl(cfg, {}); }

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream os;
  auto kv = [&os](const std::string& k, const std::string& v) { os << k << " = " << v << '\n'; };
  const auto d = [](double v) { return fmt_double(v); };
  const auto i = [](int v) { return std::to_string(v); };
  const auto s = [](const std::string& v) { return v; };

  kv("field.kind", c.field_kind == FieldKind::Gyre ? "gyre" : "grid");
  kv("field.A", d(c.gyre_strength));
  kv("field.s_km", d(c.gyre_size_km));
  if (!c.field_csv.empty()) kv("field.csv", "\"" + c.field_csv + "\"");
  kv("domain.width_km", d(c.domain_width_km));
  kv("domain.height_km", d(c.domain_height_km));
  kv("noise.sigma_x_kmh", d(c.sigma_x_kmh));
  kv("noise.sigma_y_kmh", d(c.sigma_y_kmh));
  kv("grid.nx", i(c.grid_nx));
  kv("grid.ny", i(c.grid_ny));
  kv("grid.cell_km", d(c.cell_km));
  kv("grid.origin_x_km", d(c.grid_origin.x));
  kv("grid.origin_y_km", d(c.grid_origin.y));
  if (!c.obstacles.empty()) {
    std::vector<int> is, js;
    for (const auto& [oi, oj] : c.obstacles) {
      is.push_back(oi);
      js.push_back(oj);
    }
    kv("obstacles.i", fmt_list(is, i));
    kv("obstacles.j", fmt_list(js, i));
  }
  kv("start.x_km", d(c.start.x));
  kv("start.y_km", d(c.start.y));
  kv("goal.x_km", d(c.goal.x));
  kv("goal.y_km", d(c.goal.y));
  kv("vehicle.v_max_kmh", d(c.v_max_kmh));
  kv("mdp.dt_h", d(c.dt_h));
  kv("mdp.gamma", d(c.gamma));
  kv("mdp.max_iterations", i(c.pi_max_iterations));
  kv("api.k", i(c.k));
  kv("api.max_iterations", i(c.api_max_iterations));
  kv("api.moment_convention", to_string(c.moment_convention));
  kv("api.diffusion_form", to_string(c.diffusion_form));
  kv("api.initial_policy", to_string(c.initial_policy));
  kv("sim.trials", i(c.trials));
  kv("sim.budget_h", d(c.budget_h));
  kv("sim.dt_sim_h", d(c.dt_sim_h));
  kv("sim.goal_radius_km", d(c.goal_radius_km));
  kv("sim.noise_mode", to_string(c.noise_mode));
  kv("sim.seed", std::to_string(c.seed));
  kv("sim.planners", fmt_list(c.planners, s));
  kv("sweep.A", fmt_list(c.sweep_A, d));
  kv("sweep.grid_n", fmt_list(c.sweep_grid_n, i));
  kv("raster.n", i(c.raster_n));
  return os.str();
}

}  // namespace flowplan
