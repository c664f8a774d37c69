#include "flowplan/mdp.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "flowplan/errors.hpp"

namespace flowplan {

// ---------------------------------------------------------------------------
// StateSpace

StateSpace::StateSpace(Point2 origin, double cell_km, int nx, int ny, int goal_i, int goal_j)
    : origin_(origin), cell_(cell_km), nx_(nx), ny_(ny), goal_(0) {
  if (!(cell_km > 0)) throw std::invalid_argument("state cell size must be positive");
  if (nx < 1 || ny < 1 || nx * ny < 4) throw std::invalid_argument("state grid needs >= 4 states");
  if (!in_grid(goal_i, goal_j)) throw std::invalid_argument("goal outside the state grid");
  goal_ = id(goal_i, goal_j);
  obstacle_.assign(static_cast<size_t>(nx * ny), 0);
}

StateId StateSpace::locate(const Point2& p) const {
  const int i = std::clamp(static_cast<int>(std::lround((p.x - origin_.x) / cell_)), 0, nx_ - 1);
  const int j = std::clamp(static_cast<int>(std::lround((p.y - origin_.y) / cell_)), 0, ny_ - 1);
  return id(i, j);
}

void StateSpace::set_obstacle(int i, int j, bool blocked) {
  if (!in_grid(i, j)) throw std::invalid_argument("obstacle outside the state grid");
  if (blocked && id(i, j) == goal_) throw std::invalid_argument("goal cannot be an obstacle");
  obstacle_[static_cast<size_t>(id(i, j))] = blocked ? 1 : 0;
}

StateSpace StateSpace::mirrored_x() const {
  StateSpace out(origin_, cell_, nx_, ny_, nx_ - 1 - col(goal_), row(goal_));
  for (StateId s = 0; s < size(); ++s) {
    if (is_obstacle(s)) out.set_obstacle(nx_ - 1 - col(s), row(s));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Actions

std::string_view compass_name(Compass c) {
  static constexpr std::array<std::string_view, kActionCount> names{"N",  "NE", "E", "SE",
                                                                    "S",  "SW", "W", "NW"};
  return names[static_cast<size_t>(c)];
}

double compass_heading(Compass c) {
  // N is +y; each step clockwise subtracts pi/4.
  return std::numbers::pi / 2 - static_cast<int>(c) * std::numbers::pi / 4;
}

std::array<Action, kActionCount> compass_actions(double v_max) {
  std::array<Action, kActionCount> out{};
  for (int a = 0; a < kActionCount; ++a) {
    const auto c = static_cast<Compass>(a);
    out[static_cast<size_t>(a)] = {c, std::remainder(compass_heading(c), 2 * std::numbers::pi),
                                   v_max};
  }
  return out;
}

// ---------------------------------------------------------------------------
// Transitions

TransitionRow gaussian_row(const StateSpace& states, std::span<const StateId> candidates,
                           const Point2& mean, const NoiseParams& noise, double dt_h) {
  if (candidates.empty()) throw std::logic_error("empty successor set");
  const double var_x = noise.sigma_x * noise.sigma_x * dt_h;
  const double var_y = noise.sigma_y * noise.sigma_y * dt_h;

  // Log-weights keep the sigma -> 0+ regime finite. A zero-variance axis is the
  // limit: only successors at the minimal offset along that axis survive.
  std::vector<double> dx2(candidates.size()), dy2(candidates.size());
  for (size_t k = 0; k < candidates.size(); ++k) {
    const Point2 c = states.position(candidates[k]);
    dx2[k] = (c.x - mean.x) * (c.x - mean.x);
    dy2[k] = (c.y - mean.y) * (c.y - mean.y);
  }
  constexpr double kTieTol = 1e-12;
  std::vector<bool> alive(candidates.size(), true);
  auto restrict_axis = [&](const std::vector<double>& d2) {
    double best = std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < d2.size(); ++k) {
      if (alive[k]) best = std::min(best, d2[k]);
    }
    for (size_t k = 0; k < d2.size(); ++k) {
      if (alive[k] && d2[k] > best + kTieTol * std::max(1.0, best)) alive[k] = false;
    }
  };
  if (var_x == 0.0) restrict_axis(dx2);
  if (var_y == 0.0) restrict_axis(dy2);

  std::vector<double> logw(candidates.size(), -std::numeric_limits<double>::infinity());
  double max_logw = -std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < candidates.size(); ++k) {
    if (!alive[k]) continue;
    double lw = 0.0;
    if (var_x > 0.0) lw -= 0.5 * dx2[k] / var_x;
    if (var_y > 0.0) lw -= 0.5 * dy2[k] / var_y;
    logw[k] = lw;
    max_logw = std::max(max_logw, lw);
  }

  TransitionRow row;
  double total = 0.0;
  for (size_t k = 0; k < candidates.size(); ++k) {
    if (!alive[k]) continue;
    const double w = std::exp(logw[k] - max_logw);
    if (w > 0.0) {
      row.push_back({candidates[k], w});
      total += w;
    }
  }
  for (auto& t : row) t.probability /= total;
  return row;
}

double transition_reward(const MdpModel& model, StateId s, StateId next) {
  const auto& st = model.states();
  const auto& r = model.params().rewards;
  if (st.is_terminal(s)) return 0.0;
  if (st.is_goal(next)) return r.goal;
  if (st.is_obstacle(next)) return r.obstacle;
  return r.step;
}

double expected_reward(const MdpModel& model, StateId s, int a) { return model.reward(s, a); }

MdpModel::MdpModel(StateSpace states, std::shared_ptr<const FlowField> field, MdpParams params)
    : states_(std::move(states)),
      field_(std::move(field)),
      params_(params),
      actions_(compass_actions(params.v_max_kmh)) {}

MdpModel MdpModel::with_reward_shift(double c) const {
  MdpModel out = *this;
  for (double& r : out.rewards_) r += c;
  return out;
}

MdpModel build_model(std::shared_ptr<const FlowField> field, const StateSpace& states,
                     const MdpParams& params) {
  if (!field) throw std::invalid_argument("build_model: null field");
  if (!(params.v_max_kmh > 0)) throw std::invalid_argument("v_max must be positive");
  if (!(params.dt_h > 0)) throw std::invalid_argument("dt must be positive");
  if (!(params.gamma >= 0 && params.gamma < 1)) throw std::invalid_argument("gamma must be in [0,1)");

  MdpModel model(states, std::move(field), params);
  const int n = states.size();
  model.rows_.assign(static_cast<size_t>(n) * kActionCount, {});
  model.rewards_.assign(static_cast<size_t>(n) * kActionCount, 0.0);

  const FlowField& f = *model.field_;
  const auto& acts = model.actions_;

#pragma omp parallel for schedule(static)
  for (StateId s = 0; s < n; ++s) {
    const size_t base = static_cast<size_t>(s) * kActionCount;
    if (states.is_terminal(s)) {
      for (int a = 0; a < kActionCount; ++a) model.rows_[base + a] = {{s, 1.0}};
      continue;
    }
    std::vector<StateId> candidates;
    candidates.reserve(9);
    const int i = states.col(s);
    const int j = states.row(s);
    for (int dj = -1; dj <= 1; ++dj) {
      for (int di = -1; di <= 1; ++di) {
        if (states.in_grid(i + di, j + dj)) candidates.push_back(states.id(i + di, j + dj));
      }
    }
    const Point2 p = states.position(s);
    const Velocity2 drift = f.velocity(p);
    for (int a = 0; a < kActionCount; ++a) {
      const Action& act = acts[static_cast<size_t>(a)];
      const Point2 mean{p.x + (drift.vx + act.speed * std::cos(act.heading)) * params.dt_h,
                        p.y + (drift.vy + act.speed * std::sin(act.heading)) * params.dt_h};
      TransitionRow row = gaussian_row(states, candidates, mean, f.noise(), params.dt_h);
      double r = 0.0;
      for (const auto& t : row) r += t.probability * transition_reward(model, s, t.state);
      model.rows_[base + a] = std::move(row);
      model.rewards_[base + a] = r;
    }
  }
  return model;
}

// ---------------------------------------------------------------------------
// Policies

int count_changes(const Policy& a, const Policy& b) {
  int n = 0;
  for (size_t s = 0; s < a.size(); ++s) n += a.actions[s] != b.actions[s];
  return n;
}

Policy goal_aimed_policy(const MdpModel& model) {
  const auto& st = model.states();
  const Point2 goal = st.position(st.goal());
  Policy pi{std::vector<int>(static_cast<size_t>(st.size()), 0)};
  for (StateId s = 0; s < st.size(); ++s) {
    if (st.is_terminal(s)) continue;
    const Point2 p = st.position(s);
    const double bearing = std::atan2(goal.y - p.y, goal.x - p.x);
    double best = std::numeric_limits<double>::infinity();
    for (int a = 0; a < kActionCount; ++a) {
      const double diff =
          std::abs(std::remainder(bearing - model.actions()[static_cast<size_t>(a)].heading,
                                  2 * std::numbers::pi));
      if (diff < best - 1e-12) {
        best = diff;
        pi[s] = a;
      }
    }
  }
  return pi;
}

Policy uniform_policy(const MdpModel& model, int action) {
  return Policy{std::vector<int>(static_cast<size_t>(model.num_states()), action)};
}

double q_value(const MdpModel& model, const ValueTable& v, StateId s, int a) {
  double ev = 0.0;
  for (const auto& t : model.transitions(s, a)) ev += t.probability * v[t.state];
  return model.reward(s, a) + model.gamma() * ev;
}

int argmax_lowest(std::span<const double, kActionCount> q) {
  const double best = *std::max_element(q.begin(), q.end());
  const double tol = 1e-12 * std::max(1.0, std::abs(best));
  for (int a = 0; a < kActionCount; ++a) {
    if (q[static_cast<size_t>(a)] >= best - tol) return a;
  }
  return 0;
}

ValueTable policy_evaluation_exact(const MdpModel& model, const Policy& pi) {
  const int n = model.num_states();
  const double gamma = model.gamma();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(n) * 10);
  Eigen::VectorXd r(n);
  for (StateId s = 0; s < n; ++s) {
    trips.emplace_back(s, s, 1.0);
    for (const auto& t : model.transitions(s, pi[s])) {
      trips.emplace_back(s, t.state, -gamma * t.probability);
    }
    r[s] = model.reward(s, pi[s]);
  }
  Eigen::SparseMatrix<double> a(n, n);
  a.setFromTriplets(trips.begin(), trips.end());
  a.makeCompressed();

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw NumericalError("policy evaluation: factorization failed");
  Eigen::VectorXd v = lu.solve(r);
  const double residual = (a * v - r).lpNorm<Eigen::Infinity>();
  if (!(residual < 1e-9)) {
    throw NumericalError("policy evaluation residual " + std::to_string(residual), residual);
  }
  return ValueTable{std::vector<double>(v.data(), v.data() + n)};
}

Policy policy_improvement_discrete(const MdpModel& model, const ValueTable& v) {
  const int n = model.num_states();
  Policy pi{std::vector<int>(static_cast<size_t>(n), 0)};
#pragma omp parallel for schedule(static)
  for (StateId s = 0; s < n; ++s) {
    std::array<double, kActionCount> q{};
    for (int a = 0; a < kActionCount; ++a) q[static_cast<size_t>(a)] = q_value(model, v, s, a);
    pi[s] = argmax_lowest(q);
  }
  return pi;
}

ValueIterationResult value_iteration(const MdpModel& model, double tol, int max_iterations) {
  const int n = model.num_states();
  ValueIterationResult res;
  res.values.values.assign(static_cast<size_t>(n), 0.0);
  ValueTable next = res.values;
  for (int it = 1; it <= max_iterations; ++it) {
    double delta = 0.0;
    for (StateId s = 0; s < n; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < kActionCount; ++a) best = std::max(best, q_value(model, res.values, s, a));
      delta = std::max(delta, std::abs(best - res.values[s]));
      next[s] = best;
    }
    std::swap(res.values, next);
    res.iterations = it;
    res.last_delta = delta;
    if (delta < tol) return res;
  }
  throw IterationLimitError("value iteration did not converge in " +
                            std::to_string(max_iterations) + " sweeps");
}

ClassicPiResult classic_policy_iteration(const MdpModel& model, const ClassicPiOptions& opts) {
  ClassicPiResult res;
  res.policy = opts.initial ? *opts.initial : uniform_policy(model, 0);
  for (int it = 1; it <= opts.max_iterations; ++it) {
    res.values = policy_evaluation_exact(model, res.policy);
    if (opts.record_history) res.value_history.push_back(res.values);
    Policy next = policy_improvement_discrete(model, res.values);
    const int changes = count_changes(res.policy, next);
    res.change_counts.push_back(changes);
    res.iterations = it;
    res.policy = std::move(next);
    if (changes == 0) return res;
  }
  throw IterationLimitError("classic policy iteration exceeded " +
                            std::to_string(opts.max_iterations) + " iterations");
}

}  // namespace flowplan
