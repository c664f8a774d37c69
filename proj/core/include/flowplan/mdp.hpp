#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "flowplan/flowfield.hpp"
#include "flowplan/geometry.hpp"

namespace flowplan {

using StateId = int;

/// Regular grid of states at cell centers: position(i, j) = origin + (i, j) * cell.
class StateSpace {
 public:
  StateSpace(Point2 origin, double cell_km, int nx, int ny, int goal_i, int goal_j);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int size() const { return nx_ * ny_; }
  double cell() const { return cell_; }
  const Point2& origin() const { return origin_; }

  StateId id(int i, int j) const { return j * nx_ + i; }
  int col(StateId s) const { return s % nx_; }
  int row(StateId s) const { return s / nx_; }
  bool in_grid(int i, int j) const { return i >= 0 && j >= 0 && i < nx_ && j < ny_; }
  Point2 position(StateId s) const {
    return {origin_.x + col(s) * cell_, origin_.y + row(s) * cell_};
  }

  /// State whose cell contains p (nearest center, clamped to the grid).
  StateId locate(const Point2& p) const;

  StateId goal() const { return goal_; }
  bool is_goal(StateId s) const { return s == goal_; }
  bool is_obstacle(StateId s) const { return obstacle_[static_cast<size_t>(s)] != 0; }
  bool is_terminal(StateId s) const { return is_goal(s) || is_obstacle(s); }

  /// Marks (i, j) as an obstacle. The goal cannot be an obstacle.
  void set_obstacle(int i, int j, bool blocked = true);

  /// Mirror image across the vertical axis through the grid center.
  StateSpace mirrored_x() const;

 private:
  Point2 origin_;
  double cell_;
  int nx_;
  int ny_;
  StateId goal_;
  std::vector<std::uint8_t> obstacle_;
};

enum class Compass : std::uint8_t { N, NE, E, SE, S, SW, W, NW };
inline constexpr int kActionCount = 8;

/// Compass action: commanded heading (radians, CCW from +x) at speed v_max.
struct Action {
  Compass compass;
  double heading;
  double speed;
};

std::string_view compass_name(Compass c);
double compass_heading(Compass c);
std::array<Action, kActionCount> compass_actions(double v_max);

struct Transition {
  StateId state;
  double probability;
};
using TransitionRow = std::vector<Transition>;

/// Reward constants: per step, on entering an obstacle, on entering the goal.
struct RewardScheme {
  double step = -0.1;
  double obstacle = -1.0;
  double goal = 0.0;
};

struct MdpParams {
  double dt_h = 1.0;
  double v_max_kmh = 3.0;
  double gamma = 0.95;
  RewardScheme rewards;
};

/// Grid MDP with 8 compass actions and Gaussian transition law. Immutable after build.
class MdpModel {
 public:
  const StateSpace& states() const { return states_; }
  const FlowField& field() const { return *field_; }
  std::shared_ptr<const FlowField> field_ptr() const { return field_; }
  const MdpParams& params() const { return params_; }
  double gamma() const { return params_.gamma; }
  const std::array<Action, kActionCount>& actions() const { return actions_; }
  int num_states() const { return states_.size(); }

  const TransitionRow& transitions(StateId s, int a) const {
    return rows_[static_cast<size_t>(s) * kActionCount + a];
  }
  /// Expected reward sum_{s'} T(s,a;s') R(s,a,s').
  double reward(StateId s, int a) const {
    return rewards_[static_cast<size_t>(s) * kActionCount + a];
  }

  /// Copy with every R(s,a) increased by c.
  MdpModel with_reward_shift(double c) const;

 private:
  friend MdpModel build_model(std::shared_ptr<const FlowField>, const StateSpace&,
                              const MdpParams&);
  MdpModel(StateSpace states, std::shared_ptr<const FlowField> field, MdpParams params);

  StateSpace states_;
  std::shared_ptr<const FlowField> field_;
  MdpParams params_;
  std::array<Action, kActionCount> actions_;
  std::vector<TransitionRow> rows_;
  std::vector<double> rewards_;
};

/// Builds transitions and expected rewards for every (state, action). Successor
/// candidates are the in-grid Moore neighborhood plus the state itself; goal and
/// obstacle states are absorbing.
MdpModel build_model(std::shared_ptr<const FlowField> field, const StateSpace& states,
                     const MdpParams& params);

/// Normalized bivariate-Gaussian weights of `candidates` around `mean`, with
/// per-axis variance sigma^2 * dt. Zero variance is treated as the sigma -> 0+ limit.
TransitionRow gaussian_row(const StateSpace& states, std::span<const StateId> candidates,
                           const Point2& mean, const NoiseParams& noise, double dt_h);

/// R(s,a,s') for the reward scheme of `model`.
double transition_reward(const MdpModel& model, StateId s, StateId next);

double expected_reward(const MdpModel& model, StateId s, int a);

struct ValueTable {
  std::vector<double> values;

  double operator[](StateId s) const { return values[static_cast<size_t>(s)]; }
  double& operator[](StateId s) { return values[static_cast<size_t>(s)]; }
  size_t size() const { return values.size(); }
};

struct Policy {
  std::vector<int> actions;

  int operator[](StateId s) const { return actions[static_cast<size_t>(s)]; }
  int& operator[](StateId s) { return actions[static_cast<size_t>(s)]; }
  size_t size() const { return actions.size(); }
  friend bool operator==(const Policy&, const Policy&) = default;
};

/// Number of states where the two policies choose different actions.
int count_changes(const Policy& a, const Policy& b);

/// Action whose heading points most directly from each state toward the goal.
Policy goal_aimed_policy(const MdpModel& model);
Policy uniform_policy(const MdpModel& model, int action = 0);

/// Q(s,a) = R(s,a) + gamma * sum T(s,a;s') v(s').
double q_value(const MdpModel& model, const ValueTable& v, StateId s, int a);

/// Index of the largest value, preferring the lowest index among near-ties.
int argmax_lowest(std::span<const double, kActionCount> q);

/// Solves (I - gamma P^pi) v = r^pi directly. Throws NumericalError if the
/// residual exceeds 1e-9.
ValueTable policy_evaluation_exact(const MdpModel& model, const Policy& pi);

/// Greedy policy with respect to v; ties go to the lowest action index.
Policy policy_improvement_discrete(const MdpModel& model, const ValueTable& v);

struct ValueIterationResult {
  ValueTable values;
  int iterations = 0;
  double last_delta = 0.0;
};

/// Bellman optimality iteration until the sup-norm update drops below tol.
ValueIterationResult value_iteration(const MdpModel& model, double tol = 1e-12,
                                     int max_iterations = 100000);

struct ClassicPiOptions {
  int max_iterations = 500;
  std::optional<Policy> initial;
  bool record_history = false;
};

struct ClassicPiResult {
  Policy policy;
  ValueTable values;
  int iterations = 0;
  std::vector<int> change_counts;
  std::vector<ValueTable> value_history;
};

/// Exact evaluation alternated with greedy improvement until the policy is stable.
/// Throws IterationLimitError past max_iterations.
ClassicPiResult classic_policy_iteration(const MdpModel& model, const ClassicPiOptions& opts = {});

}  // namespace flowplan
