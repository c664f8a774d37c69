#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "flowplan/continuous_value.hpp"
#include "flowplan/mdp.hpp"
#include "flowplan/mesh.hpp"
#include "flowplan/policy_iter.hpp"
#include "flowplan/simulator.hpp"
#include "flowplan/taylor_pde.hpp"

namespace flowplan::csv {

inline constexpr const char* kValueHeader = "state_id,i,j,x_km,y_km,value";
inline constexpr const char* kPolicyHeader = "state_id,action";
inline constexpr const char* kMeshNodesHeader = "node_id,state_id,x_km,y_km,boundary";
inline constexpr const char* kMeshTrianglesHeader = "triangle_id,n0,n1,n2";
inline constexpr const char* kRasterHeader = "x_km,y_km,value";
inline constexpr const char* kCoefficientsHeader = "node_id,x_km,y_km,mu_x,mu_y,sxx,sxy,syy,source";
inline constexpr const char* kTrajectoryHeader = "trial,t_h,x_km,y_km,psi_rad";
inline constexpr const char* kStatsHeader =
    "planner,A,sigma,mean_time_h,std_time_h,mean_len_km,std_len_km,reached";
inline constexpr const char* kMseHeader = "grid_n,k,mse,max_abs_value";

void write_value_table(std::ostream& os, const StateSpace& states, const ValueTable& v);
void write_policy(std::ostream& os, const Policy& pi);
void write_mesh_nodes(std::ostream& os, const Mesh& mesh);
void write_mesh_triangles(std::ostream& os, const Mesh& mesh);
void write_coefficients(std::ostream& os, const Mesh& mesh, const PdeCoefficients& coeffs);

/// Dense nx x ny sample of v over the mesh bounding box; points outside the
/// cover are evaluated at their nearest covered point.
void write_raster(std::ostream& os, const ContinuousValue& v, int nx, int ny);

void write_trajectories(std::ostream& os, std::span<const Trajectory> trials);

void write_stats_header(std::ostream& os);
void write_stats_row(std::ostream& os, const std::string& planner, double strength, double sigma,
                     const TrialStats& st);

void write_mse_header(std::ostream& os);
void write_mse_row(std::ostream& os, int grid_n, int k, double mse, double max_abs_value);

/// One JSON object per line.
void write_diagnostics_line(std::ostream& os, const std::string& solver,
                            const IterationDiagnostics& d);

/// Closing record of a solver run: iterations, convergence and cycle period.
void write_summary_line(std::ostream& os, const std::string& solver, int iterations,
                        bool converged, int cycle_length);

/// Splits one CSV line on commas (no quoting).
std::vector<std::string> split_line(const std::string& line);

}  // namespace flowplan::csv
