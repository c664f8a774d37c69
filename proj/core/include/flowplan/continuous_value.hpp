#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "flowplan/mesh.hpp"

namespace flowplan {

/// Recovered second derivative; `fallback` marks a rank-deficient patch
/// for which the zero matrix was returned.
struct HessianEstimate {
  Eigen::Matrix2d hessian = Eigen::Matrix2d::Zero();
  bool fallback = false;
};

/// Piecewise-linear value v = sum a_i phi_i over a mesh.
///
/// Element gradients, area-weighted nodal gradients and patch-fitted nodal
/// Hessians are computed once at construction; the object is immutable.
class ContinuousValue {
 public:
  ContinuousValue(std::shared_ptr<const Mesh> mesh, Eigen::VectorXd coefficients);

  const Mesh& mesh() const { return *mesh_; }
  std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }
  const Eigen::VectorXd& coefficients() const { return coefficients_; }

  /// Barycentric interpolation. Throws DomainError outside the mesh.
  double evaluate(const Point2& p) const;

  /// Element gradient inside an element; area-weighted average of the
  /// incident elements on shared edges and at nodes. Throws DomainError outside.
  Eigen::Vector2d gradient(const Point2& p) const;

  /// Quadratic least-squares Hessian of the node nearest to p.
  /// Throws DomainError outside the mesh.
  const HessianEstimate& hessian_recovered(const Point2& p) const;

  const Eigen::Vector2d& element_gradient(int t) const {
    return element_gradients_[static_cast<size_t>(t)];
  }
  const Eigen::Vector2d& node_gradient(int node) const {
    return node_gradients_[static_cast<size_t>(node)];
  }
  const HessianEstimate& node_hessian(int node) const {
    return node_hessians_[static_cast<size_t>(node)];
  }
  int nearest_node(const Point2& p) const;

  /// Number of nodes whose Hessian fit fell back to zero.
  int hessian_fallbacks() const;

 private:
  std::shared_ptr<const Mesh> mesh_;
  Eigen::VectorXd coefficients_;
  std::vector<Eigen::Vector2d> element_gradients_;
  std::vector<Eigen::Vector2d> node_gradients_;
  std::vector<HessianEstimate> node_hessians_;
};

/// Least-squares fit of v = c + g.d + d^T H d / 2 over `patch` nodes, with
/// d measured from `center`. Returns fallback when the patch has fewer than six
/// nodes or the fit is rank-deficient.
HessianEstimate fit_patch_hessian(const Mesh& mesh, const Eigen::VectorXd& values,
                                  const Point2& center, const std::vector<int>& patch);

/// Nodes of the elements incident to `node` (the node included), optionally
/// grown by further rings.
std::vector<int> node_patch(const Mesh& mesh, int node, int rings = 1);

}  // namespace flowplan
