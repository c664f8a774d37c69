#include <doctest.h>

#include <cmath>
#include <numbers>

#include "flowplan/simulator.hpp"
#include "support.hpp"

using namespace flowplan;
using namespace flowplan::testing;
using std::numbers::pi;

namespace {

const Domain kBox = square_domain(20, 2.0);

Point2 end_point(const Trajectory& t) { return t.samples.back().p; }

}  // namespace

TEST_CASE("deterministic Euler steps") {
  const FlowField still = FlowField::still(NoiseParams{}, kBox);
  Rng rng(1);
  const Point2 a = step(still, {10, 10}, {0.0, 3.0}, 0.1, rng);
  CHECK(a.x == doctest::Approx(10.3));
  CHECK(a.y == doctest::Approx(10.0));

  const FlowField gyre = FlowField::gyre({0.5, 20}, NoiseParams{}, kBox);
  const Point2 p{7, 13};
  const Velocity2 u = gyre.velocity(p);
  const Point2 b = step(gyre, p, {1.0, 0.0}, 0.1, rng);
  CHECK(b.x == doctest::Approx(p.x + 0.1 * u.vx));
  CHECK(b.y == doctest::Approx(p.y + 0.1 * u.vy));

  const Point2 c = step_with_noise(still, {39.9, 0.05}, {pi / 4, 3.0}, 1.0, {0, -1});
  CHECK(c.x == 40.0);
  CHECK(c.y == doctest::Approx(0.05 - 1 + 3 * std::sin(pi / 4)));
  const Point2 d = step_with_noise(still, {0.5, 0.5}, {pi, 3.0}, 1.0, {0, -2});
  CHECK(d.x == 0.0);
  CHECK(d.y == 0.0);
}

TEST_CASE("mean noisy step matches the drift") {
  const FlowField f = FlowField::gyre({0.8, 20}, NoiseParams::isotropic(1.0), kBox);
  const Point2 p{14, 22};
  const Command cmd{0.6, 2.0};
  const double dt = 0.1;
  const Velocity2 u = f.velocity(p);
  const double ex = (u.vx + 2.0 * std::cos(0.6)) * dt, ey = (u.vy + 2.0 * std::sin(0.6)) * dt;
  Rng rng(42);
  constexpr int n = 100000;
  double sx = 0, sy = 0, sxx = 0, syy = 0;
  for (int k = 0; k < n; ++k) {
    const Point2 q = step(f, p, cmd, dt, rng);
    const double dx = q.x - p.x, dy = q.y - p.y;
    sx += dx, sy += dy, sxx += dx * dx, syy += dy * dy;
  }
  const double mx = sx / n, my = sy / n;
  const double se_x = std::sqrt((sxx / n - mx * mx) / n), se_y = std::sqrt((syy / n - my * my) / n);
  CHECK(std::abs(mx - ex) < 2 * se_x);
  CHECK(std::abs(my - ey) < 2 * se_y);
}

TEST_CASE("goal-oriented headings") {
  CHECK(goal_oriented_action({0, 0}, {1, 0}, 3).heading == doctest::Approx(0.0));
  CHECK(goal_oriented_action({0, 0}, {0, -1}, 3).heading == doctest::Approx(-pi / 2));
  const Command c = goal_oriented_action({1, 1}, {2, 2}, 3);
  CHECK(c.heading == doctest::Approx(pi / 4));
  CHECK(c.speed == 3.0);
  CHECK(goal_oriented_action({2, 2}, {2, 2}, 3).speed == 0.0);
}

TEST_CASE("straight run in still water takes d / v_max") {
  const FlowField f = FlowField::still(NoiseParams{}, kBox);
  const Point2 start{1, 1}, goal{37, 37};
  SimParams sp;
  Rng rng(3);
  const Trajectory t = simulate_trial(f, GoalOrientedPlanner{goal, 3.0}, start, goal, sp, rng);
  const double d = distance(start, goal);
  CHECK(t.reached);
  CHECK(std::abs(t.time_cost - (d - sp.goal_radius_km) / 3.0) <= sp.dt_sim_h + 1e-9);
  CHECK(t.length >= d - sp.goal_radius_km - 1e-9);
  CHECK(std::abs(t.time_cost * 3.0 - t.length) <= 0.02 * t.length);
}

TEST_CASE("trial invariants and determinism") {
  const FlowField f = FlowField::gyre({1.5, 20}, NoiseParams::isotropic(3.0), kBox);
  const Point2 start{1, 1}, goal{37, 37};
  SimParams sp;
  for (std::uint64_t trial = 0; trial < 6; ++trial) {
    Rng a = trial_rng(7, trial), b = trial_rng(7, trial);
    const Trajectory x = simulate_trial(f, GoalOrientedPlanner{goal, 3.0}, start, goal, sp, a);
    const Trajectory y = simulate_trial(f, GoalOrientedPlanner{goal, 3.0}, start, goal, sp, b);
    REQUIRE(x.samples.size() == y.samples.size());
    for (size_t i = 0; i < x.samples.size(); ++i) {
      CHECK(x.samples[i].p == y.samples[i].p);
      CHECK(x.samples[i].heading == y.samples[i].heading);
    }
    CHECK(x.time_cost <= sp.budget_h + 1e-9);
    if (!x.reached) CHECK(x.time_cost == doctest::Approx(sp.budget_h));
    if (x.reached) CHECK(x.length >= distance(start, goal) - sp.goal_radius_km - 1e-9);
    for (const auto& s : x.samples) CHECK(kBox.contains(s.p));
  }
  Rng r0 = trial_rng(7, 0), r1 = trial_rng(7, 1);
  CHECK(r0() != r1());
}

TEST_CASE("zero-noise trials are identical") {
  const FlowField f = FlowField::gyre({0.5, 20}, NoiseParams{}, kBox);
  SimParams sp;
  std::vector<Trajectory> ts;
  for (std::uint64_t t = 0; t < 10; ++t) {
    Rng rng = trial_rng(1, t);
    ts.push_back(simulate_trial(f, GoalOrientedPlanner{{37, 37}, 3.0}, {1, 1}, {37, 37}, sp, rng));
  }
  const TrialStats st = summarize(ts);
  CHECK(st.trials == 10);
  CHECK(st.std_time_h == 0.0);
  CHECK(st.std_length_km == 0.0);
}

TEST_CASE("summary statistics") {
  std::vector<Trajectory> ts(3);
  ts[0].time_cost = 1, ts[1].time_cost = 2, ts[2].time_cost = 6;
  ts[0].length = 3, ts[1].length = 3, ts[2].length = 3;
  ts[0].reached = ts[2].reached = true;
  const TrialStats st = summarize(ts);
  CHECK(st.reached == 2);
  CHECK(st.mean_time_h == doctest::Approx(3.0));
  CHECK(st.std_time_h == doctest::Approx(std::sqrt(7.0)));
  CHECK(st.std_length_km == 0.0);
}

TEST_CASE("first-order Euler consistency") {
  const FlowField f = FlowField::gyre({1.0, 20}, NoiseParams{}, kBox);
  auto endpoint = [&](double dt) {
    SimParams sp;
    sp.dt_sim_h = dt;
    sp.budget_h = 3.0;
    sp.goal_radius_km = 1e-6;
    Rng rng(0);
    return end_point(simulate_trial(f, GoalOrientedPlanner{{37, 37}, 3.0}, {4, 9}, {37, 37}, sp, rng));
  };
  const Point2 a = endpoint(0.1), b = endpoint(0.05), c = endpoint(0.025);
  const double ratio = distance(a, b) / distance(b, c);
  INFO("ratio " << ratio);
  CHECK(ratio >= 1.5);
  CHECK(ratio <= 2.5);
}

TEST_CASE("discrete and continuous planners agree in still water") {
  const auto st = square_states(20, 2.0, 18, 18);
  auto field = still_field(0.0, kBox);
  auto model = std::make_shared<const MdpModel>(model_on(field, st));
  const ApiResult api = approximate_policy_iteration(*model, ApiConfig{});
  auto moments = std::make_shared<const MomentTable>(*model, MomentConvention::Displacement);
  // Both planners act greedily on the same value function; only the query points differ.
  const Policy grid_policy = improve_policy_continuous(*model, *moments, *api.value);
  SimParams sp;
  Rng r1(5), r2(5);
  const Trajectory d = simulate_trial(*field, DiscretePolicyPlanner{model, grid_policy}, {1, 1}, {37, 37}, sp, r1);
  const Trajectory c =
      simulate_trial(*field, ContinuousPolicyPlanner{model, moments, api.value}, {1, 1}, {37, 37}, sp, r2);
  CHECK(d.reached);
  CHECK(c.reached);
  const size_t n = std::min(d.samples.size(), c.samples.size());
  for (size_t i = 0; i < n; ++i) CHECK(distance(d.samples[i].p, c.samples[i].p) <= st.cell() + 1e-9);
}
