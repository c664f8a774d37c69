#pragma once

#include <iosfwd>
#include <random>
#include <variant>
#include <vector>

#include "flowplan/geometry.hpp"

namespace flowplan {

/// Wind-driven double-gyre parameters: strength A (km/h scale) and gyre size s (km).
struct GyreParams {
  double strength = 0.5;
  double size_km = 20.0;
};

/// Standard deviations (km/h) of the independent Gaussian disturbance components.
struct NoiseParams {
  double sigma_x = 0.0;
  double sigma_y = 0.0;

  static NoiseParams isotropic(double sigma) { return {sigma, sigma}; }
};

/// Velocity samples on a regular lattice, x-fastest storage.
struct GridSamples {
  Point2 origin;
  double cell_km = 1.0;
  int nx = 0;
  int ny = 0;
  std::vector<Velocity2> samples;

  const Velocity2& at(int i, int j) const { return samples[static_cast<size_t>(j) * nx + i]; }
};

/// One CSV record of a sampled field.
struct FieldRecord {
  double x_km = 0.0;
  double y_km = 0.0;
  double vx_kmh = 0.0;
  double vy_kmh = 0.0;
};

Velocity2 gyre_velocity(const Point2& p, const GyreParams& params);

/// Static disturbance field with additive white Gaussian uncertainty.
/// Immutable after construction; share freely across threads.
class FlowField {
 public:
  /// Analytic gyre over `domain` (default 40 x 40 km).
  static FlowField gyre(const GyreParams& params, const NoiseParams& noise,
                        const Domain& domain = Domain{});
  /// Sampled lattice; the domain is the lattice bounding box.
  static FlowField grid(GridSamples samples, const NoiseParams& noise);
  /// Zero velocity everywhere.
  static FlowField still(const NoiseParams& noise, const Domain& domain = Domain{});

  /// Noise-free velocity at p. Throws DomainError outside the domain.
  Velocity2 velocity(const Point2& p) const;

  /// velocity(p) plus an independent N(0, sigma^2) draw per component.
  template <class Rng>
  Velocity2 sample(const Point2& p, Rng& rng) const {
    Velocity2 v = velocity(p);
    Velocity2 w = noise_draw(rng);
    return {v.vx + w.vx, v.vy + w.vy};
  }

  /// A single draw of the noise term alone.
  template <class Rng>
  Velocity2 noise_draw(Rng& rng) const {
    std::normal_distribution<double> unit(0.0, 1.0);
    // Always consume two draws so streams stay aligned across noise settings.
    const double wx = unit(rng);
    const double wy = unit(rng);
    return {noise_.sigma_x * wx, noise_.sigma_y * wy};
  }

  const NoiseParams& noise() const { return noise_; }
  const Domain& domain() const { return domain_; }
  bool is_analytic() const { return std::holds_alternative<GyreParams>(model_); }
  const GyreParams* gyre_params() const { return std::get_if<GyreParams>(&model_); }
  const GridSamples* grid_samples() const { return std::get_if<GridSamples>(&model_); }

  /// Same velocity model with different noise.
  FlowField with_noise(const NoiseParams& noise) const;

 private:
  FlowField(std::variant<GyreParams, GridSamples> model, const NoiseParams& noise,
            const Domain& domain);

  std::variant<GyreParams, GridSamples> model_;
  NoiseParams noise_;
  Domain domain_;
};

/// Free-function form of FlowField::velocity.
inline Velocity2 field_velocity(const FlowField& field, const Point2& p) {
  return field.velocity(p);
}

template <class Rng>
Velocity2 sample_disturbance(const FlowField& field, const Point2& p, Rng& rng) {
  return field.sample(p, rng);
}

/// Builds a sampled field from lattice records in any order. Coordinates are
/// matched to the lattice with a 1e-6 km tolerance. Throws FormatError on
/// missing, duplicate or off-lattice records.
FlowField load_grid_field(const std::vector<FieldRecord>& records, const NoiseParams& noise);

/// Reads `x_km,y_km,vx_kmh,vy_kmh` CSV (header required).
std::vector<FieldRecord> read_field_csv(std::istream& in);

}  // namespace flowplan
