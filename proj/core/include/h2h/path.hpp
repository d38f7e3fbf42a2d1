#pragma once

#include <cstddef>
#include <vector>

#include "h2h/geometry.hpp"

namespace h2h {

enum class Direction { CW, CCW };

/// Result of projecting a point onto a Path.
struct PathProjection {
  double s = 0.0;        // arc length of the foot point
  double e1 = 0.0;       // signed offset, positive to the left of the tangent
  double heading = 0.0;  // tangent angle at the foot point
  Vec2 foot{0.0, 0.0};
  std::size_t segment = 0;
};

/// Track-relative pose: arc length, signed lateral offset (left positive) and heading error.
struct FrenetPose {
  double s = 0.0;
  double e1 = 0.0;
  double e2 = 0.0;
};

struct Pose2 {
  Vec2 position{0.0, 0.0};
  double heading = 0.0;
};

/// Closed polyline with a continuous normal field.
///
/// Vertex normals bisect the adjacent segment directions and are linearly blended
/// along each segment, so (s, e1) <-> (x, y) is a bijection inside any tube narrower
/// than the local radius of curvature. The closing segment runs from the last vertex
/// back to the first; the first vertex is not repeated.
class Path {
 public:
  Path() = default;
  explicit Path(std::vector<Vec2> vertices);

  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<Vec2>& normals() const { return normals_; }
  /// Cumulative arc length at each vertex, starting at 0.
  const std::vector<double>& arclength() const { return arclength_; }
  std::size_t size() const { return vertices_.size(); }
  double length() const { return length_; }

  /// Wraps s into [0, length).
  double wrap_s(double s) const;
  /// Signed shortest arc-length difference b - a in (-length/2, length/2].
  double s_difference(double a, double b) const;

  Vec2 point_at(double s) const;
  Vec2 normal_at(double s) const;
  double heading_at(double s) const;
  Vec2 to_cartesian(double s, double e1) const;

  /// Nearest projection along the blended normal field. Never throws.
  PathProjection project(const Vec2& p) const;

  /// Signed Menger curvature at every vertex.
  std::vector<double> vertex_curvature() const;
  double max_abs_curvature() const;
  double signed_area() const;
  Direction direction() const { return signed_area() >= 0.0 ? Direction::CCW : Direction::CW; }
  /// True when no two non-adjacent segments cross.
  bool is_simple() const;

 private:
  struct Locator {
    std::size_t segment;
    double t;
  };
  Locator locate(double s) const;
  Vec2 blended_normal(std::size_t segment, double t) const;

  std::vector<Vec2> vertices_;
  std::vector<Vec2> normals_;
  std::vector<double> arclength_;
  std::vector<double> segment_length_;
  double length_ = 0.0;
};

/// Frenet pose relative to a reference path. Throws OffTrackError when the
/// projection distance exceeds max_offset.
FrenetPose frenet(const Vec2& position, double heading, const Path& reference, double max_offset);

Pose2 from_frenet(const FrenetPose& pose, const Path& reference);

}  // namespace h2h
