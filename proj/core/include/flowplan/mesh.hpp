#pragma once

#include <array>
#include <optional>
#include <vector>

#include "flowplan/geometry.hpp"
#include "flowplan/mdp.hpp"

namespace flowplan {

using Triangle = std::array<int, 3>;

/// Containing triangle and barycentric coordinates of a located point.
struct PointLocation {
  int triangle = -1;
  std::array<double, 3> bary{};
};

/// Conforming triangulation whose vertices are MDP states.
class Mesh {
 public:
  /// Triangles are reoriented counter-clockwise. Throws MeshError on
  /// degenerate triangles, unused nodes or a goal node out of range.
  Mesh(std::vector<Point2> nodes, std::vector<Triangle> triangles,
       std::vector<StateId> node_to_state, int goal_node);

  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_triangles() const { return static_cast<int>(triangles_.size()); }
  const std::vector<Point2>& nodes() const { return nodes_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const std::vector<StateId>& node_to_state() const { return node_to_state_; }
  const std::vector<int>& boundary_nodes() const { return boundary_nodes_; }
  int goal_node() const { return goal_node_; }

  /// Triangles incident to a node.
  const std::vector<int>& node_triangles(int node) const {
    return node_triangles_[static_cast<size_t>(node)];
  }
  /// Node holding state s, if any.
  std::optional<int> node_of_state(StateId s) const;

  double area(int t) const { return areas_[static_cast<size_t>(t)]; }
  std::array<double, 3> barycentric(int t, const Point2& p) const;

  /// First triangle containing p (boundary tolerance 1e-9 km), by linear scan.
  std::optional<PointLocation> locate(const Point2& p) const;
  /// All triangles containing p; more than one on shared edges and nodes.
  std::vector<PointLocation> locate_all(const Point2& p) const;

  /// p itself when covered, otherwise the nearest point of the mesh boundary.
  Point2 closest_point(const Point2& p) const;

  static constexpr double kLocateTol = 1e-9;

 private:
  std::vector<Point2> nodes_;
  std::vector<Triangle> triangles_;
  std::vector<StateId> node_to_state_;
  std::vector<int> boundary_nodes_;
  std::vector<std::array<int, 2>> boundary_edges_;
  std::vector<std::vector<int>> node_triangles_;
  std::vector<double> areas_;
  int goal_node_;
};

/// Structured triangulation of the state grid. k = 1 keeps every state and
/// splits each cell along its SW-NE diagonal; k = 2 keeps the checkerboard of
/// states with even i + j (plus the goal) and splits the diamonds they form.
Mesh build_mesh(const StateSpace& states, int k);

}  // namespace flowplan
