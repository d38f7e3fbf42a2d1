#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Core>

namespace h2h {

using Vec2 = Eigen::Vector2d;

inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Rotates a vector by +90 degrees (points to the left of a heading).
inline Vec2 left_perp(const Vec2& v) { return {-v.y(), v.x()}; }

inline Vec2 heading_vector(double angle) { return {std::cos(angle), std::sin(angle)}; }

/// Wraps an angle into (-pi, pi].
double wrap_angle(double angle);

/// Rotates a world-frame vector into a body frame with the given heading.
inline Vec2 to_body(const Vec2& world, double heading) {
  const double c = std::cos(heading);
  const double s = std::sin(heading);
  return {c * world.x() + s * world.y(), -s * world.x() + c * world.y()};
}

inline Vec2 to_world(const Vec2& body, double heading) {
  const double c = std::cos(heading);
  const double s = std::sin(heading);
  return {c * body.x() - s * body.y(), s * body.x() + c * body.y()};
}

/// Curvature of the circle through three points, signed positive for a left turn.
/// Returns 0 for degenerate (coincident) input.
double menger_curvature(const Vec2& a, const Vec2& b, const Vec2& c);

/// Closest distance between point p and segment [a, b].
double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b);

/// Proper intersection test for segments [a, b] and [c, d] (shared endpoints do not count).
bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d);

/// Distance along the ray origin + t * dir (|dir| = 1) to segment [a, b], or a negative
/// value when the ray misses.
double ray_segment_distance(const Vec2& origin, const Vec2& dir, const Vec2& a, const Vec2& b);

}  // namespace h2h
