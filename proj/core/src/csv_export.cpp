#include "flowplan/csv_export.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace flowplan::csv {

namespace {

// Fixed significant digits keep the files byte-stable across runs.
struct Num {
  double v;
};
std::ostream& operator<<(std::ostream& os, Num n) {
  std::ostringstream tmp;
  tmp << std::setprecision(12) << n.v;
  return os << tmp.str();
}

}  // namespace

void write_value_table(std::ostream& os, const StateSpace& states, const ValueTable& v) {
  os << kValueHeader << '\n';
  for (StateId s = 0; s < states.size(); ++s) {
    const Point2 p = states.position(s);
    os << s << ',' << states.col(s) << ',' << states.row(s) << ',' << Num{p.x} << ','
       << Num{p.y} << ',' << Num{v[s]} << '\n';
  }
}

void write_policy(std::ostream& os, const Policy& pi) {
  os << kPolicyHeader << '\n';
  for (size_t s = 0; s < pi.size(); ++s) os << s << ',' << pi.actions[s] << '\n';
}

void write_mesh_nodes(std::ostream& os, const Mesh& mesh) {
  os << kMeshNodesHeader << '\n';
  const auto& b = mesh.boundary_nodes();
  for (int n = 0; n < mesh.num_nodes(); ++n) {
    const Point2& p = mesh.nodes()[static_cast<size_t>(n)];
    const bool on_b = std::binary_search(b.begin(), b.end(), n);
    os << n << ',' << mesh.node_to_state()[static_cast<size_t>(n)] << ',' << Num{p.x} << ','
       << Num{p.y} << ',' << (on_b ? 1 : 0) << '\n';
  }
}

void write_mesh_triangles(std::ostream& os, const Mesh& mesh) {
  os << kMeshTrianglesHeader << '\n';
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const Triangle& tri = mesh.triangles()[static_cast<size_t>(t)];
    os << t << ',' << tri[0] << ',' << tri[1] << ',' << tri[2] << '\n';
  }
}

void write_coefficients(std::ostream& os, const Mesh& mesh, const PdeCoefficients& coeffs) {
  os << kCoefficientsHeader << '\n';
  for (int n = 0; n < mesh.num_nodes(); ++n) {
    const Point2& p = mesh.nodes()[static_cast<size_t>(n)];
    const auto& c = coeffs.nodes[static_cast<size_t>(n)];
    os << n << ',' << Num{p.x} << ',' << Num{p.y} << ',' << Num{c.mu.x()} << ','
       << Num{c.mu.y()} << ',' << Num{c.sigma(0, 0)} << ',' << Num{c.sigma(0, 1)} << ','
       << Num{c.sigma(1, 1)} << ',' << Num{c.source()} << '\n';
  }
}

void write_raster(std::ostream& os, const ContinuousValue& v, int nx, int ny) {
  os << kRasterHeader << '\n';
  const auto& nodes = v.mesh().nodes();
  double x0 = nodes.front().x, x1 = x0, y0 = nodes.front().y, y1 = y0;
  for (const auto& p : nodes) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const Point2 p{x0 + (x1 - x0) * i / (nx - 1), y0 + (y1 - y0) * j / (ny - 1)};
      os << Num{p.x} << ',' << Num{p.y} << ',' << Num{v.evaluate(v.mesh().closest_point(p))}
         << '\n';
    }
  }
}

void write_trajectories(std::ostream& os, std::span<const Trajectory> trials) {
  os << kTrajectoryHeader << '\n';
  for (size_t k = 0; k < trials.size(); ++k) {
    for (const auto& s : trials[k].samples) {
      os << k << ',' << Num{s.t} << ',' << Num{s.p.x} << ',' << Num{s.p.y} << ','
         << Num{s.heading} << '\n';
    }
  }
}

void write_stats_header(std::ostream& os) { os << kStatsHeader << '\n'; }

void write_stats_row(std::ostream& os, const std::string& planner, double strength, double sigma,
                     const TrialStats& st) {
  os << planner << ',' << Num{strength} << ',' << Num{sigma} << ',' << Num{st.mean_time_h} << ','
     << Num{st.std_time_h} << ',' << Num{st.mean_length_km} << ',' << Num{st.std_length_km}
     << ',' << st.reached << '\n';
}

void write_mse_header(std::ostream& os) { os << kMseHeader << '\n'; }

void write_mse_row(std::ostream& os, int grid_n, int k, double mse, double max_abs_value) {
  os << grid_n << ',' << k << ',' << Num{mse} << ',' << Num{max_abs_value} << '\n';
}

void write_diagnostics_line(std::ostream& os, const std::string& solver,
                            const IterationDiagnostics& d) {
  nlohmann::ordered_json j;
  j["solver"] = solver;
  j["iteration"] = d.iteration;
  j["policy_changes"] = d.policy_changes;
  j["residual"] = d.residual;
  j["value_min"] = d.value_min;
  j["value_max"] = d.value_max;
  j["max_peclet"] = d.max_peclet;
  j["hessian_fallbacks"] = d.hessian_fallbacks;
  os << j.dump() << '\n';
}

void write_summary_line(std::ostream& os, const std::string& solver, int iterations,
                        bool converged, int cycle_length) {
  nlohmann::ordered_json j;
  j["solver"] = solver;
  j["summary"] = true;
  j["iterations"] = iterations;
  j["converged"] = converged;
  j["cycle_length"] = cycle_length;
  os << j.dump() << '\n';
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace flowplan::csv
