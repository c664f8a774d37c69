#include "flowplan/flowfield.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <sstream>
#include <string>

#include "flowplan/errors.hpp"

namespace flowplan {

namespace {

constexpr double kLatticeTol = 1e-6;

Velocity2 bilinear(const GridSamples& g, const Point2& p) {
  const double fx = (p.x - g.origin.x) / g.cell_km;
  const double fy = (p.y - g.origin.y) / g.cell_km;
  const int i = std::clamp(static_cast<int>(std::floor(fx)), 0, g.nx - 2);
  const int j = std::clamp(static_cast<int>(std::floor(fy)), 0, g.ny - 2);
  const double tx = std::clamp(fx - i, 0.0, 1.0);
  const double ty = std::clamp(fy - j, 0.0, 1.0);

  const Velocity2& v00 = g.at(i, j);
  const Velocity2& v10 = g.at(i + 1, j);
  const Velocity2& v01 = g.at(i, j + 1);
  const Velocity2& v11 = g.at(i + 1, j + 1);
  const double w00 = (1 - tx) * (1 - ty);
  const double w10 = tx * (1 - ty);
  const double w01 = (1 - tx) * ty;
  const double w11 = tx * ty;
  return {w00 * v00.vx + w10 * v10.vx + w01 * v01.vx + w11 * v11.vx,
          w00 * v00.vy + w10 * v10.vy + w01 * v01.vy + w11 * v11.vy};
}

// Sorted distinct coordinates, merging values closer than the lattice tolerance.
std::vector<double> distinct_axis(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  std::vector<double> out;
  for (double v : values) {
    if (out.empty() || v - out.back() > kLatticeTol) out.push_back(v);
  }
  return out;
}

}  // namespace

Velocity2 gyre_velocity(const Point2& p, const GyreParams& params) {
  constexpr double pi = std::numbers::pi;
  const double a = pi * params.strength;
  const double kx = pi * p.x / params.size_km;
  const double ky = pi * p.y / params.size_km;
  return {-a * std::sin(kx) * std::cos(ky), a * std::cos(kx) * std::sin(ky)};
}

FlowField::FlowField(std::variant<GyreParams, GridSamples> model, const NoiseParams& noise,
                     const Domain& domain)
    : model_(std::move(model)), noise_(noise), domain_(domain) {
  if (noise_.sigma_x < 0 || noise_.sigma_y < 0 || !std::isfinite(noise_.sigma_x) ||
      !std::isfinite(noise_.sigma_y)) {
    throw std::invalid_argument("noise standard deviations must be finite and non-negative");
  }
  if (!(domain_.width() > 0) || !(domain_.height() > 0)) {
    throw std::invalid_argument("field domain must have positive extent");
  }
}

FlowField FlowField::gyre(const GyreParams& params, const NoiseParams& noise,
                          const Domain& domain) {
  if (!(params.size_km > 0)) throw std::invalid_argument("gyre size must be positive");
  return FlowField(params, noise, domain);
}

FlowField FlowField::still(const NoiseParams& noise, const Domain& domain) {
  return gyre(GyreParams{0.0, 1.0}, noise, domain);
}

FlowField FlowField::grid(GridSamples samples, const NoiseParams& noise) {
  if (samples.nx < 2 || samples.ny < 2) {
    throw FormatError("grid field needs at least 2 samples per axis");
  }
  if (!(samples.cell_km > 0)) throw FormatError("grid cell size must be positive");
  if (samples.samples.size() != static_cast<size_t>(samples.nx) * samples.ny) {
    throw FormatError("grid sample count does not match nx * ny");
  }
  Domain domain{samples.origin,
                {samples.origin.x + (samples.nx - 1) * samples.cell_km,
                 samples.origin.y + (samples.ny - 1) * samples.cell_km}};
  return FlowField(std::move(samples), noise, domain);
}

FlowField FlowField::with_noise(const NoiseParams& noise) const {
  return FlowField(model_, noise, domain_);
}

Velocity2 FlowField::velocity(const Point2& p) const {
  if (!domain_.contains(p)) {
    std::ostringstream msg;
    msg << "point (" << p.x << ", " << p.y << ") outside field domain";
    throw DomainError(msg.str());
  }
  if (const auto* g = std::get_if<GyreParams>(&model_)) return gyre_velocity(p, *g);
  return bilinear(std::get<GridSamples>(model_), p);
}

FlowField load_grid_field(const std::vector<FieldRecord>& records, const NoiseParams& noise) {
  if (records.empty()) throw FormatError("no field records");
  std::vector<double> xs, ys;
  xs.reserve(records.size());
  ys.reserve(records.size());
  for (const auto& r : records) {
    xs.push_back(r.x_km);
    ys.push_back(r.y_km);
  }
  const auto ax = distinct_axis(xs);
  const auto ay = distinct_axis(ys);
  if (ax.size() < 2 || ay.size() < 2) throw FormatError("lattice needs >= 2 points per axis");

  const double cell = ax[1] - ax[0];
  auto uniform = [cell](const std::vector<double>& axis) {
    for (size_t k = 1; k < axis.size(); ++k) {
      if (std::abs(axis[k] - axis[0] - k * cell) > kLatticeTol) return false;
    }
    return true;
  };
  if (!uniform(ax) || !uniform(ay)) throw FormatError("lattice spacing is not uniform");

  GridSamples g;
  g.origin = {ax.front(), ay.front()};
  g.cell_km = cell;
  g.nx = static_cast<int>(ax.size());
  g.ny = static_cast<int>(ay.size());
  if (records.size() != static_cast<size_t>(g.nx) * g.ny) {
    std::ostringstream msg;
    msg << "expected " << g.nx * g.ny << " records for a " << g.nx << "x" << g.ny
        << " lattice, got " << records.size();
    throw FormatError(msg.str());
  }
  g.samples.assign(records.size(), Velocity2{});
  std::vector<bool> seen(records.size(), false);
  for (const auto& r : records) {
    const double fi = (r.x_km - g.origin.x) / cell;
    const double fj = (r.y_km - g.origin.y) / cell;
    const long i = std::lround(fi);
    const long j = std::lround(fj);
    if (std::abs(fi - i) * cell > kLatticeTol || std::abs(fj - j) * cell > kLatticeTol) {
      throw FormatError("record off the lattice");
    }
    const size_t idx = static_cast<size_t>(j) * g.nx + static_cast<size_t>(i);
    if (seen[idx]) {
      std::ostringstream msg;
      msg << "duplicate record at (" << r.x_km << ", " << r.y_km << ")";
      throw FormatError(msg.str());
    }
    seen[idx] = true;
    g.samples[idx] = {r.vx_kmh, r.vy_kmh};
  }
  // Count matched nx*ny and no duplicates, so every lattice point is present.
  return FlowField::grid(std::move(g), noise);
}

std::vector<FieldRecord> read_field_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty field CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "x_km,y_km,vx_kmh,vy_kmh") {
    throw FormatError("field CSV header must be 'x_km,y_km,vx_kmh,vy_kmh', got '" + line + "'");
  }
  std::vector<FieldRecord> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    double vals[4];
    int n = 0;
    while (std::getline(row, cell, ',')) {
      if (n >= 4) throw FormatError("line " + std::to_string(lineno) + ": too many columns");
      try {
        size_t used = 0;
        vals[n] = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw FormatError("line " + std::to_string(lineno) + ": not a number: '" + cell + "'");
      }
      ++n;
    }
    if (n != 4) throw FormatError("line " + std::to_string(lineno) + ": expected 4 columns");
    out.push_back({vals[0], vals[1], vals[2], vals[3]});
  }
  return out;
}

}  // namespace flowplan
