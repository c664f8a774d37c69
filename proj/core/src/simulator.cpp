#include "flowplan/simulator.hpp"

#include <cmath>
#include <numeric>

namespace flowplan {

namespace {

Command action_command(const MdpModel& model, int a) {
  const Action& act = model.actions()[static_cast<size_t>(a)];
  return {act.heading, act.speed};
}

// Holds the last discrete command until the cell changes or the re-query period lapses.
struct CommandCache {
  StateId cell = -1;
  double issued_at = -1.0;
  Command cmd;
};

Command plan(const Planner& planner, const Point2& p, const Point2& goal, double t,
             const SimParams& params, CommandCache& cache) {
  return std::visit(
      [&](const auto& pl) -> Command {
        using T = std::decay_t<decltype(pl)>;
        if constexpr (std::is_same_v<T, GoalOrientedPlanner>) {
          return goal_oriented_action(p, goal, pl.v_max);
        } else if constexpr (std::is_same_v<T, DiscretePolicyPlanner>) {
          const StateSpace& st = pl.model->states();
          const StateId s = st.locate(p);
          if (st.is_goal(s)) return goal_oriented_action(p, goal, pl.model->params().v_max_kmh);
          if (s != cache.cell || t - cache.issued_at >= params.requery_h - 1e-12) {
            cache = {s, t, action_command(*pl.model, pl.policy[s])};
          }
          return cache.cmd;
        } else {
          const MdpModel& model = *pl.model;
          const StateSpace& st = model.states();
          if (st.is_goal(st.locate(p))) return goal_oriented_action(p, goal, model.params().v_max_kmh);
          const Point2 q = pl.value->mesh().closest_point(p);
          return action_command(model, select_action_at(model, *pl.moments, *pl.value, q));
        }
      },
      planner);
}

}  // namespace

Point2 step_with_noise(const FlowField& field, const Point2& p, const Command& cmd, double dt_h,
                       const Velocity2& noise) {
  const Velocity2 vd = field.velocity(p);
  const Point2 next{p.x + (vd.vx + noise.vx + cmd.speed * std::cos(cmd.heading)) * dt_h,
                    p.y + (vd.vy + noise.vy + cmd.speed * std::sin(cmd.heading)) * dt_h};
  return field.domain().clamp(next);
}

Point2 step(const FlowField& field, const Point2& p, const Command& cmd, double dt_h, Rng& rng) {
  return step_with_noise(field, p, cmd, dt_h, field.noise_draw(rng));
}

Command goal_oriented_action(const Point2& p, const Point2& goal, double v_max) {
  if (p == goal) return {0.0, 0.0};
  return {std::atan2(goal.y - p.y, goal.x - p.x), v_max};
}

Trajectory simulate_trial(const FlowField& field, const Planner& planner, const Point2& start,
                          const Point2& goal, const SimParams& params, Rng& rng,
                          const StateSpace* occupancy) {
  Trajectory traj;
  const double dt = params.dt_sim_h;
  const long steps = std::lround(params.budget_h / dt);
  CommandCache cache;
  Point2 p = field.domain().clamp(start);

  Velocity2 held{};
  if (params.noise_mode == NoiseMode::PerTrial) held = field.noise_draw(rng);
  const double brownian = std::sqrt(1.0 / dt);

  traj.samples.reserve(static_cast<size_t>(steps) + 1);
  Command cmd = plan(planner, p, goal, 0.0, params, cache);
  traj.samples.push_back({0.0, p, cmd.heading});
  if (distance(p, goal) <= params.goal_radius_km) {
    traj.reached = true;
    return traj;
  }

  for (long k = 1; k <= steps; ++k) {
    const double t_prev = (k - 1) * dt;
    if (k > 1) cmd = plan(planner, p, goal, t_prev, params, cache);
    Velocity2 w;
    switch (params.noise_mode) {
      case NoiseMode::PerStep:
        w = field.noise_draw(rng);
        break;
      case NoiseMode::PerTrial:
        w = held;
        break;
      case NoiseMode::Brownian: {
        const Velocity2 d = field.noise_draw(rng);
        w = {d.vx * brownian, d.vy * brownian};
        break;
      }
    }
    const Point2 next = step_with_noise(field, p, cmd, dt, w);
    traj.length += distance(p, next);
    p = next;
    const double t = k * dt;
    traj.samples.push_back({t, p, cmd.heading});

    if (distance(p, goal) <= params.goal_radius_km) {
      traj.reached = true;
      traj.time_cost = t;
      return traj;
    }
    if (occupancy && occupancy->is_obstacle(occupancy->locate(p))) {
      traj.collided = true;
      break;
    }
  }
  traj.time_cost = params.budget_h;
  return traj;
}

TrialStats summarize(std::span<const Trajectory> trials) {
  TrialStats st;
  st.trials = static_cast<int>(trials.size());
  if (trials.empty()) return st;
  for (const auto& t : trials) {
    st.reached += t.reached;
    st.mean_time_h += t.time_cost;
    st.mean_length_km += t.length;
  }
  st.mean_time_h /= st.trials;
  st.mean_length_km /= st.trials;
  if (st.trials > 1) {
    double vt = 0.0, vl = 0.0;
    for (const auto& t : trials) {
      vt += (t.time_cost - st.mean_time_h) * (t.time_cost - st.mean_time_h);
      vl += (t.length - st.mean_length_km) * (t.length - st.mean_length_km);
    }
    st.std_time_h = std::sqrt(vt / (st.trials - 1));
    st.std_length_km = std::sqrt(vl / (st.trials - 1));
  }
  return st;
}

Rng trial_rng(std::uint64_t master_seed, std::uint64_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                    static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
  return Rng(seq);
}

}  // namespace flowplan
