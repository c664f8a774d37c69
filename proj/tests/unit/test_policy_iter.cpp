#include <doctest.h>

#include <memory>

#include "flowplan/errors.hpp"
#include "flowplan/policy_iter.hpp"
#include "support.hpp"

using namespace flowplan;
using namespace flowplan::testing;

namespace {

const StateSpace kGrid = square_states(20, 2.0, 18, 18);

MdpModel gyre_model(double a = 0.5, double sigma = 1.0) {
  return model_on(gyre_field(a, 20, sigma, square_domain(20, 2.0)), kGrid);
}

std::shared_ptr<const ContinuousValue> interpolant(const Mesh& mesh, auto&& f) {
  auto m = std::make_shared<const Mesh>(mesh);
  Eigen::VectorXd a(m->num_nodes());
  for (int i = 0; i < m->num_nodes(); ++i) a[i] = f(i, m->nodes()[static_cast<size_t>(i)]);
  return std::make_shared<const ContinuousValue>(m, std::move(a));
}

bool interior(const StateSpace& st, StateId s) {
  const int i = st.col(s), j = st.row(s);
  return i > 0 && j > 0 && i < st.nx() - 1 && j < st.ny() - 1;
}

}  // namespace

TEST_CASE("zero rewards give a zero value and stop after one improvement") {
  MdpParams p;
  p.rewards = {0.0, 0.0, 0.0};
  const MdpModel m = build_model(gyre_field(0.5, 20, 1.0, square_domain(20, 2.0)), kGrid, p);
  ApiConfig cfg;
  cfg.initial_policy = InitialPolicy::UniformNorth;
  const ApiResult r = approximate_policy_iteration(m, cfg);
  CHECK(r.value->coefficients().cwiseAbs().maxCoeff() < 1e-6);
  CHECK(r.converged);
  CHECK(r.iterations == 1);
  CHECK(r.change_counts == std::vector<int>{0});
  for (StateId s = 0; s < m.num_states(); ++s) CHECK(r.policy[s] == static_cast<int>(Compass::N));
}

TEST_CASE("zero value: improvement is the reward argmax") {
  const MdpModel m = gyre_model();
  const MomentTable mt(m, MomentConvention::Displacement);
  const auto v = interpolant(build_mesh(kGrid, 1), [](int, const Point2&) { return 0.0; });
  const Policy pi = improve_policy_continuous(m, mt, *v);
  for (StateId s = 0; s < m.num_states(); ++s) {
    std::array<double, kActionCount> r{};
    for (int a = 0; a < kActionCount; ++a) r[static_cast<size_t>(a)] = m.reward(s, a) - 0.0;
    CHECK(pi[s] == argmax_lowest(r));
  }
}

TEST_CASE("linear value with gradient (1, 0) steers east") {
  MdpParams p;
  p.rewards = {0.0, 0.0, 0.0};
  // Zero noise snaps E, NE and SE onto the same column; light noise separates them.
  const MdpModel m = build_model(still_field(1.0, square_domain(20, 2.0)), kGrid, p);
  const MomentTable mt(m, MomentConvention::Displacement);
  const auto v = interpolant(build_mesh(kGrid, 1), [](int, const Point2& q) { return q.x; });
  const Policy pi = improve_policy_continuous(m, mt, *v);
  for (StateId s = 0; s < m.num_states(); ++s) {
    if (interior(kGrid, s) && !kGrid.is_goal(s)) CHECK(pi[s] == static_cast<int>(Compass::E));
  }
}

TEST_CASE("the reaction term does not change the argmax") {
  const MdpModel m = gyre_model(1.0, 1.5);
  const MomentTable mt(m, MomentConvention::Displacement);
  const Mesh mesh = build_mesh(kGrid, 1);
  const auto v = evaluate_policy_fem(m, goal_aimed_policy(m), std::make_shared<const Mesh>(mesh),
                                     MomentConvention::Displacement);
  CHECK(improve_policy_continuous(m, mt, *v, true) == improve_policy_continuous(m, mt, *v, false));
  for (StateId s = 0; s < m.num_states(); s += 13) {
    const auto with = continuous_scores(m, mt, *v, s, kGrid.position(s), true);
    const auto without = continuous_scores(m, mt, *v, s, kGrid.position(s), false);
    for (int a = 1; a < kActionCount; ++a) {
      CHECK((with[static_cast<size_t>(a)] - with[0]) ==
            doctest::Approx(without[static_cast<size_t>(a)] - without[0]).epsilon(1e-12));
    }
  }
}

TEST_CASE("value_mse") {
  const MdpModel m = gyre_model();
  const auto oracle = classic_policy_iteration(m).values;
  const Mesh mesh = build_mesh(kGrid, 1);
  auto at = [&](int i) { return oracle[mesh.node_to_state()[static_cast<size_t>(i)]]; };
  const auto exact = interpolant(mesh, [&](int i, const Point2&) { return at(i); });
  CHECK(value_mse(*exact, oracle, kGrid) < 1e-28);
  const double c = 0.173;
  const auto shifted = interpolant(mesh, [&](int i, const Point2&) { return at(i) + c; });
  CHECK(value_mse(*shifted, oracle, kGrid) == doctest::Approx(c * c).epsilon(1e-10));
}

TEST_CASE("continuous improvement on the oracle interpolant tracks classic improvement") {
  const MdpModel m = gyre_model();
  const auto oracle = classic_policy_iteration(m).values;
  const Mesh mesh = build_mesh(kGrid, 1);
  const auto v = interpolant(mesh, [&](int i, const Point2&) { return oracle[mesh.node_to_state()[static_cast<size_t>(i)]]; });
  const MomentTable mt(m, MomentConvention::Displacement);
  const Policy cont = improve_policy_continuous(m, mt, *v);
  const Policy disc = policy_improvement_discrete(m, oracle);
  int n = 0, same = 0;
  for (StateId s = 0; s < m.num_states(); ++s) {
    if (!interior(kGrid, s) || kGrid.is_terminal(s)) continue;
    ++n;
    same += cont[s] == disc[s];
  }
  INFO("agreement " << same << "/" << n);
  CHECK(same >= 0.95 * n);
}

TEST_CASE("approximate policy iteration run properties") {
  const MdpModel m = gyre_model();
  for (int k : {1, 2}) {
    ApiConfig cfg;
    cfg.k = k;
    std::vector<IterationDiagnostics> seen;
    const ApiResult r = approximate_policy_iteration(m, cfg, [&](const IterationDiagnostics& d) { seen.push_back(d); });
    CHECK(r.policy.size() == static_cast<size_t>(m.num_states()));
    CHECK(r.iterations >= 1);
    CHECK(r.iterations <= cfg.max_iterations);
    CHECK(r.change_counts.size() == static_cast<size_t>(r.iterations));
    CHECK(seen.size() == r.diagnostics.size());
    CHECK(std::abs(r.value->evaluate(kGrid.position(kGrid.goal()))) < 1e-9);
    for (const auto& d : r.diagnostics) CHECK(d.residual < 1e-8);
    if (r.converged) {
      CHECK(r.change_counts.back() == 0);
      CHECK(r.cycle_length == 0);
    } else {
      CHECK((r.cycle_length >= 2 || r.iterations == cfg.max_iterations));
    }

    const ApiResult again = approximate_policy_iteration(m, cfg);
    CHECK(again.policy == r.policy);
    CHECK((again.value->coefficients() - r.value->coefficients()).norm() == 0.0);
  }
}

TEST_CASE("cycle detection ends a run that revisits a policy") {
  // An iteration cap of one can never revisit; the cap is reported instead.
  const MdpModel m = gyre_model(1.0, 1.0);
  ApiConfig cfg;
  cfg.max_iterations = 1;
  const ApiResult r = approximate_policy_iteration(m, cfg);
  CHECK(r.iterations == 1);
  if (!r.converged) CHECK(r.cycle_length == 0);

  cfg.max_iterations = 50;
  const ApiResult full = approximate_policy_iteration(m, cfg);
  if (full.cycle_length > 0) {
    CHECK(!full.converged);
    CHECK(full.cycle_length >= 2);
    CHECK(full.cycle_length <= full.iterations);
    // The final policy is the one that closed the loop, so the run stops early.
    CHECK(full.iterations < cfg.max_iterations);
  }
}

TEST_CASE("points outside the mesh are rejected") {
  const MdpModel m = gyre_model();
  const MomentTable mt(m, MomentConvention::Displacement);
  const auto v = interpolant(build_mesh(kGrid, 1), [](int, const Point2&) { return 0.0; });
  CHECK_THROWS_AS(select_action_at(m, mt, *v, {0.2, 0.2}), DomainError);
  const std::vector<Point2> pts{{5.0, 5.0}, {30.0, 12.5}};
  CHECK(improve_policy_continuous(m, mt, *v, pts).size() == 2);
}
