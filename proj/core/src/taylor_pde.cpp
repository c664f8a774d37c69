#include "flowplan/taylor_pde.hpp"

#include <stdexcept>
#include <string>

namespace flowplan {

DriftDiffusion row_moments(const StateSpace& states, StateId from, const TransitionRow& row,
                           MomentConvention convention) {
  const Point2 p = states.position(from);
  DriftDiffusion out;
  for (const auto& t : row) {
    const Point2 q = states.position(t.state);
    const Eigen::Vector2d d(q.x - p.x, q.y - p.y);
    out.mu += t.probability * d;
    out.sigma += t.probability * (d * d.transpose());
  }
  if (convention == MomentConvention::PaperLiteral) out.mu = -out.mu;
  return out;
}

DriftDiffusion drift_and_diffusion(const MdpModel& model, StateId s, int a,
                                   MomentConvention convention) {
  return row_moments(model.states(), s, model.transitions(s, a), convention);
}

MomentTable::MomentTable(const MdpModel& model, MomentConvention convention)
    : convention_(convention),
      table_(static_cast<size_t>(model.num_states()) * kActionCount) {
  const int n = model.num_states();
#pragma omp parallel for schedule(static)
  for (StateId s = 0; s < n; ++s) {
    for (int a = 0; a < kActionCount; ++a) {
      table_[static_cast<size_t>(s) * kActionCount + a] =
          drift_and_diffusion(model, s, a, convention);
    }
  }
}

PdeCoefficients assemble_coefficients(const MdpModel& model, const Policy& pi,
                                      std::span<const StateId> node_to_state,
                                      MomentConvention convention, DiffusionForm form) {
  PdeCoefficients out;
  out.gamma = model.gamma();
  out.form = form;
  out.nodes.resize(node_to_state.size());
  const int n = model.num_states();
  for (size_t i = 0; i < node_to_state.size(); ++i) {
    const StateId s = node_to_state[i];
    if (s < 0 || s >= n) {
      throw std::invalid_argument("mesh node " + std::to_string(i) + " maps to no state");
    }
    const int a = pi[s];
    const DriftDiffusion m = drift_and_diffusion(model, s, a, convention);
    out.nodes[i] = {m.mu, m.sigma, model.reward(s, a)};
    if (model.states().is_goal(s)) out.goal_node = static_cast<int>(i);
  }
  return out;
}

}  // namespace flowplan
