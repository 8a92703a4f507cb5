#pragma once

#include <cmath>

namespace crlab {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double norm() const { return std::hypot(x, y); }
  bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

/// Scales v down so its 2-norm is at most max_norm; shorter vectors pass
/// through unchanged.
inline Vec2 clamp_norm(const Vec2& v, double max_norm) {
  const double n = v.norm();
  if (n <= max_norm || n == 0.0) return v;
  return v * (max_norm / n);
}

inline double clamp(double v, double lo, double hi) {
  return v < lo ? lo : (v > hi ? hi : v);
}

}  // namespace crlab
