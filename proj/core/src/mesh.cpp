#include "flowplan/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "flowplan/errors.hpp"

namespace flowplan {

namespace {

double signed_area(const Point2& a, const Point2& b, const Point2& c) {
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

Point2 closest_on_segment(const Point2& p, const Point2& a, const Point2& b) {
  const double ex = b.x - a.x, ey = b.y - a.y;
  const double len2 = ex * ex + ey * ey;
  double t = len2 > 0 ? ((p.x - a.x) * ex + (p.y - a.y) * ey) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return {a.x + t * ex, a.y + t * ey};
}

}  // namespace

Mesh::Mesh(std::vector<Point2> nodes, std::vector<Triangle> triangles,
           std::vector<StateId> node_to_state, int goal_node)
    : nodes_(std::move(nodes)),
      triangles_(std::move(triangles)),
      node_to_state_(std::move(node_to_state)),
      goal_node_(goal_node) {
  const int n = num_nodes();
  if (node_to_state_.size() != nodes_.size()) throw MeshError("node/state map size mismatch");
  if (goal_node_ < 0 || goal_node_ >= n) throw MeshError("goal node out of range");
  if (triangles_.empty()) throw MeshError("mesh has no triangles");

  node_triangles_.assign(static_cast<size_t>(n), {});
  areas_.reserve(triangles_.size());
  std::map<std::array<int, 2>, int> edge_use;
  for (size_t t = 0; t < triangles_.size(); ++t) {
    Triangle& tri = triangles_[t];
    for (int v : tri) {
      if (v < 0 || v >= n) throw MeshError("triangle references a missing node");
    }
    double area = signed_area(nodes_[tri[0]], nodes_[tri[1]], nodes_[tri[2]]);
    if (area < 0) {
      std::swap(tri[1], tri[2]);
      area = -area;
    }
    if (!(area > 1e-12)) {
      throw MeshError("degenerate triangle " + std::to_string(t));
    }
    areas_.push_back(area);
    for (int k = 0; k < 3; ++k) {
      node_triangles_[static_cast<size_t>(tri[k])].push_back(static_cast<int>(t));
      std::array<int, 2> e{tri[k], tri[(k + 1) % 3]};
      if (e[0] > e[1]) std::swap(e[0], e[1]);
      ++edge_use[e];
    }
  }
  for (int v = 0; v < n; ++v) {
    if (node_triangles_[static_cast<size_t>(v)].empty()) {
      throw MeshError("node " + std::to_string(v) + " belongs to no triangle");
    }
  }
  std::vector<bool> on_boundary(static_cast<size_t>(n), false);
  for (const auto& [e, count] : edge_use) {
    if (count > 2) throw MeshError("non-manifold edge");
    if (count == 1) {
      boundary_edges_.push_back(e);
      on_boundary[static_cast<size_t>(e[0])] = true;
      on_boundary[static_cast<size_t>(e[1])] = true;
    }
  }
  for (int v = 0; v < n; ++v) {
    if (on_boundary[static_cast<size_t>(v)]) boundary_nodes_.push_back(v);
  }
}

std::optional<int> Mesh::node_of_state(StateId s) const {
  const auto it = std::find(node_to_state_.begin(), node_to_state_.end(), s);
  if (it == node_to_state_.end()) return std::nullopt;
  return static_cast<int>(it - node_to_state_.begin());
}

std::array<double, 3> Mesh::barycentric(int t, const Point2& p) const {
  const Triangle& tri = triangles_[static_cast<size_t>(t)];
  const Point2& a = nodes_[tri[0]];
  const Point2& b = nodes_[tri[1]];
  const Point2& c = nodes_[tri[2]];
  const double inv = 1.0 / (2.0 * areas_[static_cast<size_t>(t)]);
  const double l0 = ((b.x - p.x) * (c.y - p.y) - (c.x - p.x) * (b.y - p.y)) * inv;
  const double l1 = ((c.x - p.x) * (a.y - p.y) - (a.x - p.x) * (c.y - p.y)) * inv;
  return {l0, l1, 1.0 - l0 - l1};
}

std::optional<PointLocation> Mesh::locate(const Point2& p) const {
  for (int t = 0; t < num_triangles(); ++t) {
    const auto l = barycentric(t, p);
    const double tol = kLocateTol / std::sqrt(areas_[static_cast<size_t>(t)]);
    if (l[0] >= -tol && l[1] >= -tol && l[2] >= -tol) return PointLocation{t, l};
  }
  return std::nullopt;
}

std::vector<PointLocation> Mesh::locate_all(const Point2& p) const {
  std::vector<PointLocation> out;
  for (int t = 0; t < num_triangles(); ++t) {
    const auto l = barycentric(t, p);
    const double tol = kLocateTol / std::sqrt(areas_[static_cast<size_t>(t)]);
    if (l[0] >= -tol && l[1] >= -tol && l[2] >= -tol) out.push_back({t, l});
  }
  return out;
}

Point2 Mesh::closest_point(const Point2& p) const {
  if (locate(p)) return p;
  Point2 best = p;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& e : boundary_edges_) {
    const Point2 q = closest_on_segment(p, nodes_[static_cast<size_t>(e[0])],
                                        nodes_[static_cast<size_t>(e[1])]);
    const double d = distance(p, q);
    if (d < best_d) {
      best_d = d;
      best = q;
    }
  }
  return best;
}

Mesh build_mesh(const StateSpace& states, int k) {
  const int nx = states.nx();
  const int ny = states.ny();
  if (k != 1 && k != 2) throw MeshError("subsample factor must be 1 or 2");
  if (nx < 2 || ny < 2) throw MeshError("state grid needs >= 2 states per axis");
  if (k == 2 && (nx < 3 || ny < 3)) throw MeshError("k = 2 needs >= 3 states per axis");

  const StateId goal = states.goal();
  auto keep = [&](int i, int j) {
    return states.in_grid(i, j) && (k == 1 || (i + j) % 2 == 0 || states.id(i, j) == goal);
  };

  std::vector<int> node_index(static_cast<size_t>(states.size()), -1);
  std::vector<Point2> nodes;
  std::vector<StateId> node_to_state;
  for (StateId s = 0; s < states.size(); ++s) {
    if (keep(states.col(s), states.row(s))) {
      node_index[static_cast<size_t>(s)] = static_cast<int>(nodes.size());
      nodes.push_back(states.position(s));
      node_to_state.push_back(s);
    }
  }
  auto node = [&](int i, int j) {
    return states.in_grid(i, j) ? node_index[static_cast<size_t>(states.id(i, j))] : -1;
  };

  std::vector<Triangle> tris;
  if (k == 1) {
    for (int j = 0; j + 1 < ny; ++j) {
      for (int i = 0; i + 1 < nx; ++i) {
        tris.push_back({node(i, j), node(i + 1, j), node(i + 1, j + 1)});
        tris.push_back({node(i, j), node(i + 1, j + 1), node(i, j + 1)});
      }
    }
  } else {
    // Every odd state is the center of a diamond of up to four even neighbors.
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        if ((i + j) % 2 == 0) continue;
        const int r = node(i + 1, j), u = node(i, j + 1), l = node(i - 1, j), d = node(i, j - 1);
        if (states.id(i, j) == goal) {
          const int c = node(i, j);
          const std::array<int, 4> ring{r, u, l, d};
          for (int q = 0; q < 4; ++q) {
            const int a = ring[static_cast<size_t>(q)];
            const int b = ring[static_cast<size_t>((q + 1) % 4)];
            if (a >= 0 && b >= 0) tris.push_back({c, a, b});
          }
          continue;
        }
        if (l >= 0 && r >= 0) {
          if (u >= 0) tris.push_back({l, r, u});
          if (d >= 0) tris.push_back({l, d, r});
        } else if (u >= 0 && d >= 0) {
          if (r >= 0) tris.push_back({d, r, u});
          if (l >= 0) tris.push_back({d, u, l});
        }
      }
    }
  }
  const int goal_node = node_index[static_cast<size_t>(goal)];
  return Mesh(std::move(nodes), std::move(tris), std::move(node_to_state), goal_node);
}

}  // namespace flowplan
