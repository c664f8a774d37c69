#pragma once

#include <memory>

#include "flowplan/flowfield.hpp"
#include "flowplan/mdp.hpp"

namespace flowplan::testing {

/// n x n states at cell centers of an (n * cell) square domain.
inline StateSpace square_states(int n, double cell, int goal_i, int goal_j) {
  return StateSpace({cell / 2, cell / 2}, cell, n, n, goal_i, goal_j);
}

inline Domain square_domain(int n, double cell) { return Domain{{0, 0}, {n * cell, n * cell}}; }

inline std::shared_ptr<const FlowField> still_field(double sigma, const Domain& d) {
  return std::make_shared<const FlowField>(FlowField::still(NoiseParams::isotropic(sigma), d));
}

inline std::shared_ptr<const FlowField> gyre_field(double a, double s, double sigma,
                                                   const Domain& d) {
  return std::make_shared<const FlowField>(
      FlowField::gyre({a, s}, NoiseParams::isotropic(sigma), d));
}

inline MdpModel model_on(std::shared_ptr<const FlowField> f, const StateSpace& st,
                         double gamma = 0.95, double v_max = 3.0, double dt = 1.0) {
  MdpParams p;
  p.gamma = gamma;
  p.v_max_kmh = v_max;
  p.dt_h = dt;
  return build_model(std::move(f), st, p);
}

}  // namespace flowplan::testing
