#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "flowplan/continuous_value.hpp"
#include "flowplan/mdp.hpp"
#include "flowplan/mesh.hpp"
#include "flowplan/taylor_pde.hpp"

namespace flowplan {

enum class InitialPolicy { GoalAimed, UniformNorth };

struct ApiConfig {
  int k = 1;
  int max_iterations = 50;
  MomentConvention moment_convention = MomentConvention::Displacement;
  DiffusionForm diffusion_form = DiffusionForm::NonDivergence;
  InitialPolicy initial_policy = InitialPolicy::GoalAimed;
  /// Keep the action-independent -(1 - gamma) v(s) term in the improvement score.
  bool keep_reaction_term = true;
};

/// One record of the per-iteration diagnostics stream.
struct IterationDiagnostics {
  int iteration = 0;
  int policy_changes = 0;
  double residual = 0.0;
  double value_min = 0.0;
  double value_max = 0.0;
  double max_peclet = 0.0;
  int hessian_fallbacks = 0;
  double solve_seconds = 0.0;
};

struct ApiResult {
  Policy policy;
  std::shared_ptr<const ContinuousValue> value;
  int iterations = 0;
  std::vector<int> change_counts;
  bool converged = false;
  /// Period of the policy cycle that stopped the run; 0 when none was seen.
  int cycle_length = 0;
  std::vector<IterationDiagnostics> diagnostics;
};

using DiagnosticsObserver = std::function<void(const IterationDiagnostics&)>;

/// Improvement score R(s,a) + gamma (mu . grad v + tr(sigma H) / 2) - (1 - gamma) v
/// for every action, using the moments of `state` and derivatives of v at p.
std::array<double, kActionCount> continuous_scores(const MdpModel& model,
                                                   const MomentTable& moments,
                                                   const ContinuousValue& v, StateId state,
                                                   const Point2& p, bool keep_reaction_term = true);

/// Greedy action at an arbitrary covered point p, using the moments of the
/// state whose cell contains p. Throws DomainError when p is outside the mesh.
int select_action_at(const MdpModel& model, const MomentTable& moments, const ContinuousValue& v,
                     const Point2& p, bool keep_reaction_term = true);

/// Policy improvement on every grid state. States outside the mesh cover (the
/// odd corners of a k = 2 mesh) are scored at their nearest covered point.
Policy improve_policy_continuous(const MdpModel& model, const MomentTable& moments,
                                 const ContinuousValue& v, bool keep_reaction_term = true);

/// Policy improvement on an arbitrary point set; one action per point.
std::vector<int> improve_policy_continuous(const MdpModel& model, const MomentTable& moments,
                                           const ContinuousValue& v,
                                           std::span<const Point2> points,
                                           bool keep_reaction_term = true);

/// FEM evaluation of a fixed policy on `mesh`: coefficients, assembly, goal
/// constraint and solve.
std::shared_ptr<const ContinuousValue> evaluate_policy_fem(
    const MdpModel& model, const Policy& pi, std::shared_ptr<const Mesh> mesh,
    MomentConvention convention, IterationDiagnostics* diag = nullptr,
    DiffusionForm form = DiffusionForm::NonDivergence);

/// Approximate policy iteration: FEM evaluation alternated with continuous
/// improvement on all grid states until the policy stops changing. A policy
/// that repeats an earlier iterate ends the run unconverged, with the period
/// in cycle_length.
ApiResult approximate_policy_iteration(const MdpModel& model, const ApiConfig& cfg,
                                       const DiagnosticsObserver& observer = {});

/// Mean over non-obstacle states of (v(center) - oracle(state))^2.
double value_mse(const ContinuousValue& v, const ValueTable& oracle, const StateSpace& states);

}  // namespace flowplan
