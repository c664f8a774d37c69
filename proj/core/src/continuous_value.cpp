#include "flowplan/continuous_value.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <sstream>

#include "flowplan/errors.hpp"
#include "flowplan/fem.hpp"

namespace flowplan {

namespace {

[[noreturn]] void outside(const Point2& p) {
  std::ostringstream msg;
  msg << "point (" << p.x << ", " << p.y << ") outside the mesh";
  throw DomainError(msg.str());
}

}  // namespace

std::vector<int> node_patch(const Mesh& mesh, int node, int rings) {
  std::set<int> patch{node};
  std::vector<int> frontier{node};
  for (int r = 0; r < rings; ++r) {
    std::vector<int> next;
    for (int v : frontier) {
      for (int t : mesh.node_triangles(v)) {
        for (int w : mesh.triangles()[static_cast<size_t>(t)]) {
          if (patch.insert(w).second) next.push_back(w);
        }
      }
    }
    frontier = std::move(next);
  }
  return {patch.begin(), patch.end()};
}

HessianEstimate fit_patch_hessian(const Mesh& mesh, const Eigen::VectorXd& values,
                                  const Point2& center, const std::vector<int>& patch) {
  if (patch.size() < 6) return {Eigen::Matrix2d::Zero(), true};
  double scale = 0.0;
  for (int v : patch) scale = std::max(scale, distance(mesh.nodes()[static_cast<size_t>(v)], center));
  if (!(scale > 0.0)) return {Eigen::Matrix2d::Zero(), true};

  // Scaled local coordinates keep the normal equations well conditioned.
  Eigen::MatrixXd a(static_cast<Eigen::Index>(patch.size()), 6);
  Eigen::VectorXd b(static_cast<Eigen::Index>(patch.size()));
  for (size_t r = 0; r < patch.size(); ++r) {
    const Point2& q = mesh.nodes()[static_cast<size_t>(patch[r])];
    const double u = (q.x - center.x) / scale;
    const double w = (q.y - center.y) / scale;
    const auto row = static_cast<Eigen::Index>(r);
    a.row(row) << 1.0, u, w, 0.5 * u * u, u * w, 0.5 * w * w;
    b[row] = values[patch[r]];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(1e-10);
  if (qr.rank() < 6) return {Eigen::Matrix2d::Zero(), true};
  const Eigen::VectorXd c = qr.solve(b);
  const double s2 = scale * scale;
  HessianEstimate out;
  out.hessian << c[3] / s2, c[4] / s2, c[4] / s2, c[5] / s2;
  return out;
}

ContinuousValue::ContinuousValue(std::shared_ptr<const Mesh> mesh, Eigen::VectorXd coefficients)
    : mesh_(std::move(mesh)), coefficients_(std::move(coefficients)) {
  if (!mesh_) throw std::invalid_argument("ContinuousValue: null mesh");
  const Mesh& m = *mesh_;
  if (coefficients_.size() != m.num_nodes()) {
    throw std::invalid_argument("coefficient count does not match mesh nodes");
  }

  element_gradients_.resize(static_cast<size_t>(m.num_triangles()));
  for (int t = 0; t < m.num_triangles(); ++t) {
    const Triangle& tri = m.triangles()[static_cast<size_t>(t)];
    const std::array<Point2, 3> v{m.nodes()[static_cast<size_t>(tri[0])],
                                  m.nodes()[static_cast<size_t>(tri[1])],
                                  m.nodes()[static_cast<size_t>(tri[2])]};
    const auto g = p1_gradients(v);
    const Eigen::Vector3d a(coefficients_[tri[0]], coefficients_[tri[1]], coefficients_[tri[2]]);
    element_gradients_[static_cast<size_t>(t)] = g.transpose() * a;
  }

  node_gradients_.resize(static_cast<size_t>(m.num_nodes()));
  node_hessians_.resize(static_cast<size_t>(m.num_nodes()));
  for (int v = 0; v < m.num_nodes(); ++v) {
    Eigen::Vector2d sum = Eigen::Vector2d::Zero();
    double area = 0.0;
    for (int t : m.node_triangles(v)) {
      sum += m.area(t) * element_gradients_[static_cast<size_t>(t)];
      area += m.area(t);
    }
    node_gradients_[static_cast<size_t>(v)] = sum / area;

    const Point2& center = m.nodes()[static_cast<size_t>(v)];
    HessianEstimate h = fit_patch_hessian(m, coefficients_, center, node_patch(m, v, 1));
    node_hessians_[static_cast<size_t>(v)] = h;
  }
}

double ContinuousValue::evaluate(const Point2& p) const {
  const auto loc = mesh_->locate(p);
  if (!loc) outside(p);
  const Triangle& tri = mesh_->triangles()[static_cast<size_t>(loc->triangle)];
  return loc->bary[0] * coefficients_[tri[0]] + loc->bary[1] * coefficients_[tri[1]] +
         loc->bary[2] * coefficients_[tri[2]];
}

Eigen::Vector2d ContinuousValue::gradient(const Point2& p) const {
  const auto locs = mesh_->locate_all(p);
  if (locs.empty()) outside(p);
  if (locs.size() == 1) return element_gradients_[static_cast<size_t>(locs.front().triangle)];
  Eigen::Vector2d sum = Eigen::Vector2d::Zero();
  double area = 0.0;
  for (const auto& l : locs) {
    sum += mesh_->area(l.triangle) * element_gradients_[static_cast<size_t>(l.triangle)];
    area += mesh_->area(l.triangle);
  }
  return sum / area;
}

int ContinuousValue::nearest_node(const Point2& p) const {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int v = 0; v < mesh_->num_nodes(); ++v) {
    const double d = distance(p, mesh_->nodes()[static_cast<size_t>(v)]);
    if (d < best_d) {
      best_d = d;
      best = v;
    }
  }
  return best;
}

const HessianEstimate& ContinuousValue::hessian_recovered(const Point2& p) const {
  if (!mesh_->locate(p)) outside(p);
  return node_hessians_[static_cast<size_t>(nearest_node(p))];
}

int ContinuousValue::hessian_fallbacks() const {
  return static_cast<int>(std::count_if(node_hessians_.begin(), node_hessians_.end(),
                                        [](const HessianEstimate& h) { return h.fallback; }));
}

}  // namespace flowplan
