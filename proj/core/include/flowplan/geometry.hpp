#pragma once

#include <cmath>

namespace flowplan {

/// Planar position in kilometers.
struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

/// Planar velocity in km/h.
struct Velocity2 {
  double vx = 0.0;
  double vy = 0.0;

  friend bool operator==(const Velocity2&, const Velocity2&) = default;
};

inline double distance(const Point2& a, const Point2& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

inline double speed(const Velocity2& v) { return std::hypot(v.vx, v.vy); }

/// Axis-aligned planning region [min, max].
struct Domain {
  Point2 min{0.0, 0.0};
  Point2 max{40.0, 40.0};

  double width() const { return max.x - min.x; }
  double height() const { return max.y - min.y; }

  bool contains(const Point2& p, double tol = 1e-9) const {
    return p.x >= min.x - tol && p.x <= max.x + tol && p.y >= min.y - tol &&
           p.y <= max.y + tol;
  }

  Point2 clamp(const Point2& p) const {
    return {std::fmin(std::fmax(p.x, min.x), max.x), std::fmin(std::fmax(p.y, min.y), max.y)};
  }
};

}  // namespace flowplan
