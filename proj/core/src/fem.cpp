#include "flowplan/fem.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "flowplan/errors.hpp"

namespace flowplan {

namespace {

double twice_area(const std::array<Point2, 3>& v) {
  return (v[1].x - v[0].x) * (v[2].y - v[0].y) - (v[2].x - v[0].x) * (v[1].y - v[0].y);
}

}  // namespace

Eigen::Matrix<double, 3, 2> p1_gradients(const std::array<Point2, 3>& v) {
  const double det = twice_area(v);
  if (!(std::abs(det) > 2e-12)) throw MeshError("degenerate element");
  Eigen::Matrix<double, 3, 2> g;
  for (int k = 0; k < 3; ++k) {
    const Point2& b = v[static_cast<size_t>((k + 1) % 3)];
    const Point2& c = v[static_cast<size_t>((k + 2) % 3)];
    g(k, 0) = (b.y - c.y) / det;
    g(k, 1) = (c.x - b.x) / det;
  }
  return g;
}

Eigen::Matrix3d p1_diffusion(const std::array<Point2, 3>& v, const Eigen::Matrix2d& sigma) {
  const auto g = p1_gradients(v);
  const double area = 0.5 * std::abs(twice_area(v));
  return area * g * sigma * g.transpose();
}

Eigen::Matrix3d p1_mass(const std::array<Point2, 3>& v) {
  const double area = 0.5 * std::abs(twice_area(v));
  Eigen::Matrix3d m;
  m << 2, 1, 1, 1, 2, 1, 1, 1, 2;
  return area / 12.0 * m;
}

Eigen::Matrix3d p1_advection(const std::array<Point2, 3>& v, const Eigen::Vector2d& mu) {
  const auto g = p1_gradients(v);
  const double area = 0.5 * std::abs(twice_area(v));
  // int phi_i = area / 3; mu . grad phi_j is constant on the element.
  const Eigen::RowVector3d transport = (g * mu).transpose();
  return (area / 3.0) * Eigen::Vector3d::Ones() * transport;
}

SparseSystem assemble(const Mesh& mesh, const PdeCoefficients& coeffs, AssemblyReport* report) {
  const int n = mesh.num_nodes();
  if (static_cast<int>(coeffs.nodes.size()) != n) {
    throw std::invalid_argument("coefficient count does not match mesh nodes");
  }
  const double gamma = coeffs.gamma;
  const double reaction = coeffs.reaction();

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(mesh.num_triangles()) * 9);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
  double max_peclet = 0.0;

  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const Triangle& tri = mesh.triangles()[static_cast<size_t>(t)];
    const std::array<Point2, 3> v{mesh.nodes()[static_cast<size_t>(tri[0])],
                                  mesh.nodes()[static_cast<size_t>(tri[1])],
                                  mesh.nodes()[static_cast<size_t>(tri[2])]};
    Eigen::Vector2d mu = Eigen::Vector2d::Zero();
    Eigen::Matrix2d sigma = Eigen::Matrix2d::Zero();
    Eigen::Vector3d reward;
    for (int a = 0; a < 3; ++a) {
      const auto& c = coeffs.nodes[static_cast<size_t>(tri[static_cast<size_t>(a)])];
      mu += c.mu / 3.0;
      sigma += c.sigma / 3.0;
      reward[a] = c.reward;
    }
    if (coeffs.form == DiffusionForm::NonDivergence) {
      // sigma : H = div(sigma grad v) - (div sigma) . grad v, sigma linear on the element.
      const auto g = p1_gradients(v);
      Eigen::Vector2d div = Eigen::Vector2d::Zero();
      for (int a = 0; a < 3; ++a) {
        div += coeffs.nodes[static_cast<size_t>(tri[static_cast<size_t>(a)])].sigma *
               g.row(a).transpose();
      }
      mu -= 0.5 * div;
    }
    const Eigen::Matrix3d ke = gamma * p1_advection(v, mu) - 0.5 * gamma * p1_diffusion(v, sigma) -
                               reaction * p1_mass(v);
    // Source integrated exactly against the P1 interpolant of R.
    const Eigen::Vector3d fe = p1_mass(v) * reward;
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) trips.emplace_back(tri[a], tri[b], ke(a, b));
      f[tri[a]] -= fe[a];
    }

    const double speed = mu.norm();
    if (speed > 0.0) {
      const Eigen::Vector2d dir = mu / speed;
      const double diffusivity = 0.5 * gamma * dir.dot(sigma * dir);
      double h = 0.0;
      for (int a = 0; a < 3; ++a) {
        h = std::max(h, distance(v[static_cast<size_t>(a)], v[static_cast<size_t>((a + 1) % 3)]));
      }
      const double pe = diffusivity > 0.0 ? gamma * speed * h / (2.0 * diffusivity)
                                          : std::numeric_limits<double>::infinity();
      max_peclet = std::max(max_peclet, pe);
    }
  }

  SparseSystem sys;
  sys.K.resize(n, n);
  sys.K.setFromTriplets(trips.begin(), trips.end());
  sys.K.makeCompressed();
  sys.F = std::move(f);
  if (report) report->max_peclet = max_peclet;
  return sys;
}

SparseSystem constrain_goal(SparseSystem system, int node, double value) {
  auto& k = system.K;
  if (node < 0 || node >= k.rows()) throw std::out_of_range("constrained node out of range");
  for (int col = 0; col < k.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(k, col); it; ++it) {
      if (it.col() == node && it.row() != node) {
        system.F[it.row()] -= it.value() * value;
        it.valueRef() = 0.0;
      } else if (it.row() == node) {
        it.valueRef() = it.col() == node ? 1.0 : 0.0;
      }
    }
  }
  if (k.coeff(node, node) != 1.0) k.coeffRef(node, node) = 1.0;
  k.prune(0.0);
  system.F[node] = value;
  return system;
}

Eigen::VectorXd solve(const SparseSystem& system, double* relative_residual) {
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(system.K);
  if (lu.info() != Eigen::Success) throw NumericalError("sparse LU factorization failed");
  Eigen::VectorXd a = lu.solve(system.F);
  if (lu.info() != Eigen::Success) throw NumericalError("sparse LU solve failed");
  const double scale = std::max(1.0, system.F.lpNorm<Eigen::Infinity>());
  const double residual = (system.K * a - system.F).lpNorm<Eigen::Infinity>() / scale;
  if (relative_residual) *relative_residual = residual;
  if (!(residual < 1e-8)) {
    throw NumericalError("FEM solve residual " + std::to_string(residual) + " above 1e-8",
                         residual);
  }
  return a;
}

}  // namespace flowplan
