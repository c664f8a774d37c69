#include "flowplan/policy_iter.hpp"

#include <algorithm>
#include <chrono>

#include "flowplan/errors.hpp"
#include "flowplan/fem.hpp"

namespace flowplan {

std::array<double, kActionCount> continuous_scores(const MdpModel& model,
                                                   const MomentTable& moments,
                                                   const ContinuousValue& v, StateId state,
                                                   const Point2& p, bool keep_reaction_term) {
  const Eigen::Vector2d grad = v.gradient(p);
  const Eigen::Matrix2d& hess = v.hessian_recovered(p).hessian;
  const double gamma = model.gamma();
  const double reaction = keep_reaction_term ? (1.0 - gamma) * v.evaluate(p) : 0.0;
  std::array<double, kActionCount> q{};
  for (int a = 0; a < kActionCount; ++a) {
    const DriftDiffusion& m = moments.at(state, a);
    const double transport = m.mu.dot(grad) + 0.5 * (m.sigma.cwiseProduct(hess)).sum();
    q[static_cast<size_t>(a)] = model.reward(state, a) + gamma * transport - reaction;
  }
  return q;
}

int select_action_at(const MdpModel& model, const MomentTable& moments, const ContinuousValue& v,
                     const Point2& p, bool keep_reaction_term) {
  const StateId s = model.states().locate(p);
  return argmax_lowest(continuous_scores(model, moments, v, s, p, keep_reaction_term));
}

Policy improve_policy_continuous(const MdpModel& model, const MomentTable& moments,
                                 const ContinuousValue& v, bool keep_reaction_term) {
  const StateSpace& st = model.states();
  Policy pi{std::vector<int>(static_cast<size_t>(st.size()), 0)};
#pragma omp parallel for schedule(static)
  for (StateId s = 0; s < st.size(); ++s) {
    const Point2 p = v.mesh().closest_point(st.position(s));
    pi[s] = argmax_lowest(continuous_scores(model, moments, v, s, p, keep_reaction_term));
  }
  return pi;
}

std::vector<int> improve_policy_continuous(const MdpModel& model, const MomentTable& moments,
                                           const ContinuousValue& v,
                                           std::span<const Point2> points,
                                           bool keep_reaction_term) {
  std::vector<int> out(points.size(), 0);
  for (size_t k = 0; k < points.size(); ++k) {
    out[k] = select_action_at(model, moments, v, points[k], keep_reaction_term);
  }
  return out;
}

std::shared_ptr<const ContinuousValue> evaluate_policy_fem(const MdpModel& model,
                                                           const Policy& pi,
                                                           std::shared_ptr<const Mesh> mesh,
                                                           MomentConvention convention,
                                                           IterationDiagnostics* diag,
                                                           DiffusionForm form) {
  const auto t0 = std::chrono::steady_clock::now();
  const PdeCoefficients coeffs =
      assemble_coefficients(model, pi, mesh->node_to_state(), convention, form);
  AssemblyReport report;
  SparseSystem sys = constrain_goal(assemble(*mesh, coeffs, &report), mesh->goal_node());
  double residual = 0.0;
  Eigen::VectorXd a = solve(sys, &residual);
  const auto t1 = std::chrono::steady_clock::now();
  auto value = std::make_shared<const ContinuousValue>(std::move(mesh), std::move(a));
  if (diag) {
    diag->residual = residual;
    diag->max_peclet = report.max_peclet;
    diag->value_min = value->coefficients().minCoeff();
    diag->value_max = value->coefficients().maxCoeff();
    diag->hessian_fallbacks = value->hessian_fallbacks();
    diag->solve_seconds = std::chrono::duration<double>(t1 - t0).count();
  }
  return value;
}

ApiResult approximate_policy_iteration(const MdpModel& model, const ApiConfig& cfg,
                                       const DiagnosticsObserver& observer) {
  if (cfg.max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
  auto mesh = std::make_shared<const Mesh>(build_mesh(model.states(), cfg.k));
  const MomentTable moments(model, cfg.moment_convention);

  ApiResult res;
  res.policy = cfg.initial_policy == InitialPolicy::GoalAimed ? goal_aimed_policy(model)
                                                              : uniform_policy(model, 0);
  std::vector<Policy> history;
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    IterationDiagnostics diag;
    diag.iteration = it;
    res.value = evaluate_policy_fem(model, res.policy, mesh, cfg.moment_convention, &diag,
                                    cfg.diffusion_form);
    Policy next = improve_policy_continuous(model, moments, *res.value, cfg.keep_reaction_term);
    diag.policy_changes = count_changes(res.policy, next);
    res.change_counts.push_back(diag.policy_changes);
    res.diagnostics.push_back(diag);
    res.iterations = it;
    if (observer) observer(diag);
    if (diag.policy_changes == 0) {
      res.converged = true;
      break;
    }
    // history holds pi_1 .. pi_{it-1}; next == pi_j closes a cycle of period it + 1 - j.
    const auto seen = std::find(history.begin(), history.end(), next);
    const int period = static_cast<int>(history.end() - seen) + 1;
    const bool cycled = seen != history.end();
    history.push_back(std::move(res.policy));
    res.policy = std::move(next);
    if (cycled) {
      res.cycle_length = period;
      break;
    }
  }
  return res;
}

double value_mse(const ContinuousValue& v, const ValueTable& oracle, const StateSpace& states) {
  if (static_cast<int>(oracle.size()) != states.size()) {
    throw std::invalid_argument("oracle does not cover the state space");
  }
  double sum = 0.0;
  int count = 0;
  for (StateId s = 0; s < states.size(); ++s) {
    if (states.is_obstacle(s)) continue;
    const Point2 p = v.mesh().closest_point(states.position(s));
    const double e = v.evaluate(p) - oracle[s];
    sum += e * e;
    ++count;
  }
  return count > 0 ? sum / count : 0.0;
}

}  // namespace flowplan
