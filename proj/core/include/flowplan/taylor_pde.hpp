#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "flowplan/mdp.hpp"

namespace flowplan {

/// Sign convention for the first transition moment.
enum class MomentConvention {
  Displacement,   ///< mu = E[s' - s], drift along the expected motion
  PaperLiteral,   ///< mu = E[s - s'], the negated form
};

/// How the second-order term (1/2) sigma : grad grad v enters the weak form.
enum class DiffusionForm {
  NonDivergence,  ///< sigma : H, weak form with drift mu - (1/2) div sigma
  Divergence,     ///< div(sigma grad v), sigma inside the divergence
};

/// First moment mu (km) and non-central second moment sigma (km^2) of the
/// one-step displacement under one (state, action).
struct DriftDiffusion {
  Eigen::Vector2d mu = Eigen::Vector2d::Zero();
  Eigen::Matrix2d sigma = Eigen::Matrix2d::Zero();
};

DriftDiffusion drift_and_diffusion(const MdpModel& model, StateId s, int a,
                                   MomentConvention convention = MomentConvention::Displacement);

/// Moments of an explicit transition row around `from`.
DriftDiffusion row_moments(const StateSpace& states, StateId from, const TransitionRow& row,
                           MomentConvention convention = MomentConvention::Displacement);

/// Moments for every (state, action), laid out as [s * 8 + a].
class MomentTable {
 public:
  MomentTable(const MdpModel& model, MomentConvention convention);

  const DriftDiffusion& at(StateId s, int a) const {
    return table_[static_cast<size_t>(s) * kActionCount + a];
  }
  MomentConvention convention() const { return convention_; }

 private:
  MomentConvention convention_;
  std::vector<DriftDiffusion> table_;
};

struct NodeCoefficients {
  Eigen::Vector2d mu = Eigen::Vector2d::Zero();
  Eigen::Matrix2d sigma = Eigen::Matrix2d::Zero();
  double reward = 0.0;  ///< R(s, pi(s)) at the node's state

  /// Right-hand side of the strong form, -R.
  double source() const { return -reward; }
};

/// Drift, diffusion and reward sampled at mesh nodes under a fixed policy.
struct PdeCoefficients {
  std::vector<NodeCoefficients> nodes;
  double gamma = 0.0;
  int goal_node = -1;
  DiffusionForm form = DiffusionForm::NonDivergence;

  double reaction() const { return 1.0 - gamma; }
};

/// Samples coefficients at nodes; node_to_state[i] names the state of node i.
/// Throws std::invalid_argument on unmapped nodes.
PdeCoefficients assemble_coefficients(const MdpModel& model, const Policy& pi,
                                      std::span<const StateId> node_to_state,
                                      MomentConvention convention = MomentConvention::Displacement,
                                      DiffusionForm form = DiffusionForm::NonDivergence);

}  // namespace flowplan
