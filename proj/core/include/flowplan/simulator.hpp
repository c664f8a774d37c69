#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "flowplan/flowfield.hpp"
#include "flowplan/mdp.hpp"
#include "flowplan/policy_iter.hpp"

namespace flowplan {

using Rng = std::mt19937_64;

/// Commanded heading (radians) and speed (km/h) relative to the water.
struct Command {
  double heading = 0.0;
  double speed = 0.0;
};

/// How the disturbance noise enters the integrator.
enum class NoiseMode {
  PerStep,   ///< fresh N(0, sigma^2) velocity draw every integration step
  PerTrial,  ///< one velocity draw held for the whole trial
  Brownian,  ///< displacement noise sigma * sqrt(dt_sim) per step
};

/// Euler step p' = clamp(p + (v_d(p) + w + v [cos psi, sin psi]) dt) with a
/// caller-supplied noise velocity w.
Point2 step_with_noise(const FlowField& field, const Point2& p, const Command& cmd, double dt_h,
                       const Velocity2& noise);

/// Euler step with a fresh disturbance draw.
Point2 step(const FlowField& field, const Point2& p, const Command& cmd, double dt_h, Rng& rng);

/// Full speed straight at the goal; a zero command when already there.
Command goal_oriented_action(const Point2& p, const Point2& goal, double v_max);

/// Discrete MDP policy: the action of the cell containing the vehicle.
struct DiscretePolicyPlanner {
  std::shared_ptr<const MdpModel> model;
  Policy policy;
};

/// Continuous policy: greedy action from the FEM value at the exact position.
struct ContinuousPolicyPlanner {
  std::shared_ptr<const MdpModel> model;
  std::shared_ptr<const MomentTable> moments;
  std::shared_ptr<const ContinuousValue> value;
};

struct GoalOrientedPlanner {
  Point2 goal;
  double v_max = 3.0;
};

using Planner = std::variant<DiscretePolicyPlanner, ContinuousPolicyPlanner, GoalOrientedPlanner>;

struct TrajectorySample {
  double t = 0.0;
  Point2 p;
  double heading = 0.0;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  bool reached = false;
  bool collided = false;
  double time_cost = 0.0;
  double length = 0.0;
};

struct SimParams {
  double goal_radius_km = 1.0;
  double dt_sim_h = 0.1;
  double budget_h = 30.0;
  NoiseMode noise_mode = NoiseMode::PerStep;
  /// Re-query cadence of discrete planners when the cell does not change.
  double requery_h = 1.0;
};

/// Runs one trial from start until the goal radius is entered, the budget is
/// exhausted, or the vehicle enters an obstacle cell of `occupancy`.
Trajectory simulate_trial(const FlowField& field, const Planner& planner, const Point2& start,
                          const Point2& goal, const SimParams& params, Rng& rng,
                          const StateSpace* occupancy = nullptr);

struct TrialStats {
  int trials = 0;
  int reached = 0;
  double mean_time_h = 0.0;
  double std_time_h = 0.0;
  double mean_length_km = 0.0;
  double std_length_km = 0.0;
};

/// Mean and (n - 1)-normalized standard deviation over all trials.
TrialStats summarize(std::span<const Trajectory> trials);

/// Independent stream for one trial, derived from (master seed, trial index).
Rng trial_rng(std::uint64_t master_seed, std::uint64_t trial);

}  // namespace flowplan
