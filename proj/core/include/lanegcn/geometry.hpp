#pragma once

#include <cmath>

namespace lanegcn {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  bool operator==(const Vec2& o) const { return x == o.x && y == o.y; }

  double norm() const { return std::hypot(x, y); }
};

inline double distance(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

// Orthonormal 2x2 rotation with determinant +1, stored as the cosine and
// sine of a heading angle. to_frame() maps that heading onto +x;
// to_world() is the inverse.
struct Rot2 {
  double c = 1.0;
  double s = 0.0;

  static Rot2 from_heading(const Vec2& h) {
    const double n = h.norm();
    if (n == 0.0) return {1.0, 0.0};
    return {h.x / n, h.y / n};
  }
  static Rot2 from_angle(double theta) {
    return {std::cos(theta), std::sin(theta)};
  }

  Vec2 to_frame(const Vec2& v) const {
    return {c * v.x + s * v.y, -s * v.x + c * v.y};
  }
  Vec2 to_world(const Vec2& v) const {
    return {c * v.x - s * v.y, s * v.x + c * v.y};
  }
};

}  // namespace lanegcn
