#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <array>

#include "flowplan/mesh.hpp"
#include "flowplan/taylor_pde.hpp"

namespace flowplan {

/// Galerkin system K a = F of the drift-diffusion-reaction weak form.
struct SparseSystem {
  Eigen::SparseMatrix<double> K;
  Eigen::VectorXd F;
};

/// Gradients of the three P1 basis functions on a triangle (rows).
Eigen::Matrix<double, 3, 2> p1_gradients(const std::array<Point2, 3>& v);

/// Element matrix int (sigma grad phi_j) . grad phi_i.
Eigen::Matrix3d p1_diffusion(const std::array<Point2, 3>& v, const Eigen::Matrix2d& sigma);

/// Exact element mass matrix int phi_j phi_i = area / 12 [[2,1,1],[1,2,1],[1,1,2]].
Eigen::Matrix3d p1_mass(const std::array<Point2, 3>& v);

/// Element matrix int (mu . grad phi_j) phi_i with constant mu.
Eigen::Matrix3d p1_advection(const std::array<Point2, 3>& v, const Eigen::Vector2d& mu);

struct AssemblyReport {
  double max_peclet = 0.0;  ///< largest element Peclet number gamma|mu|h / (2 D)
};

/// Assembles
///   K_ij = gamma int (mu . grad phi_j) phi_i - gamma/2 int (sigma grad phi_j) . grad phi_i
///          - (1 - gamma) int phi_j phi_i
///   F_i  = -int R phi_i
/// with element-constant mu and sigma (vertex averages) and R interpolated in P1. The zero-flux boundary
/// condition is natural and adds nothing.
SparseSystem assemble(const Mesh& mesh, const PdeCoefficients& coeffs,
                      AssemblyReport* report = nullptr);

/// Imposes a(node) = value by symmetric elimination: row and column cleared,
/// unit diagonal, column contributions moved to F. Idempotent.
SparseSystem constrain_goal(SparseSystem system, int node, double value = 0.0);

/// Sparse LU solve. Throws NumericalError when ||K a - F||_inf / max(1, ||F||_inf) >= 1e-8.
Eigen::VectorXd solve(const SparseSystem& system, double* relative_residual = nullptr);

}  // namespace flowplan
