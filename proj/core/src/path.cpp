#include "h2h/path.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "h2h/errors.hpp"

namespace h2h {

Path::Path(std::vector<Vec2> vertices) : vertices_(std::move(vertices)) {
  if (vertices_.size() >= 2 && (vertices_.front() - vertices_.back()).norm() == 0.0) vertices_.pop_back();
  const std::size_t n = vertices_.size();
  if (n < 3) throw ConfigError("a closed path needs at least three distinct vertices");

  segment_length_.resize(n);
  arclength_.resize(n);
  std::vector<Vec2> tangents(n);
  length_ = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 d = vertices_[(i + 1) % n] - vertices_[i];
    segment_length_[i] = d.norm();
    if (!(segment_length_[i] > 0.0)) throw ConfigError("path contains repeated consecutive vertices");
    tangents[i] = d / segment_length_[i];
    arclength_[i] = length_;
    length_ += segment_length_[i];
  }
  normals_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 bisector = tangents[(i + n - 1) % n] + tangents[i];
    const double norm = bisector.norm();
    if (norm < 1e-9) throw ConfigError("path reverses direction at a vertex");
    normals_[i] = left_perp(bisector / norm);
  }
}

double Path::wrap_s(double s) const {
  double w = std::fmod(s, length_);
  if (w < 0.0) w += length_;
  if (w >= length_) w = 0.0;
  return w;
}

double Path::s_difference(double a, double b) const {
  double d = std::fmod(b - a, length_);
  if (d > 0.5 * length_) d -= length_;
  if (d <= -0.5 * length_) d += length_;
  return d;
}

Path::Locator Path::locate(double s) const {
  const double ws = wrap_s(s);
  auto it = std::upper_bound(arclength_.begin(), arclength_.end(), ws);
  const std::size_t seg = static_cast<std::size_t>(std::distance(arclength_.begin(), it)) - 1;
  const double t = std::clamp((ws - arclength_[seg]) / segment_length_[seg], 0.0, 1.0);
  return {seg, t};
}

Vec2 Path::blended_normal(std::size_t segment, double t) const {
  const Vec2 n = (1.0 - t) * normals_[segment] + t * normals_[(segment + 1) % size()];
  return n.normalized();
}

Vec2 Path::point_at(double s) const {
  const Locator loc = locate(s);
  const Vec2& a = vertices_[loc.segment];
  const Vec2& b = vertices_[(loc.segment + 1) % size()];
  return a + loc.t * (b - a);
}

Vec2 Path::normal_at(double s) const {
  const Locator loc = locate(s);
  return blended_normal(loc.segment, loc.t);
}

double Path::heading_at(double s) const {
  const Vec2 n = normal_at(s);
  return std::atan2(-n.x(), n.y());
}

Vec2 Path::to_cartesian(double s, double e1) const {
  const Locator loc = locate(s);
  const Vec2& a = vertices_[loc.segment];
  const Vec2& b = vertices_[(loc.segment + 1) % size()];
  return a + loc.t * (b - a) + e1 * blended_normal(loc.segment, loc.t);
}

namespace {

// Roots of a2 t^2 + a1 t + a0 in [0, 1] (with a small tolerance), at most two.
int unit_roots(double a2, double a1, double a0, double scale, double out[2]) {
  constexpr double kTol = 1e-9;
  int count = 0;
  const auto push = [&](double t) {
    if (t >= -kTol && t <= 1.0 + kTol) out[count++] = std::clamp(t, 0.0, 1.0);
  };
  if (std::abs(a2) <= 1e-12 * scale) {
    if (std::abs(a1) > 0.0) push(-a0 / a1);
    return count;
  }
  const double disc = a1 * a1 - 4.0 * a2 * a0;
  if (disc < 0.0) return 0;
  const double root = std::sqrt(disc);
  const double q = -0.5 * (a1 + std::copysign(root, a1));
  if (q != 0.0) {
    push(q / a2);
    push(a0 / q);
  } else {
    push(0.0);
  }
  return count;
}

}  // namespace

PathProjection Path::project(const Vec2& p) const {
  const std::size_t n = size();
  PathProjection best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = vertices_[i];
    const Vec2& b = vertices_[(i + 1) % n];
    const double seg_len = segment_length_[i];
    if ((p - a).norm() - seg_len > best_dist) continue;
    const Vec2 d = b - a;
    const Vec2 q = p - a;
    const Vec2& na = normals_[i];
    const Vec2 dn = normals_[(i + 1) % n] - na;
    // cross(q - t d, na + t dn) = 0
    const double a2 = -cross(d, dn);
    const double a1 = cross(q, dn) - cross(d, na);
    const double a0 = cross(q, na);
    double roots[2];
    const int count = unit_roots(a2, a1, a0, seg_len * (q.norm() + seg_len), roots);
    for (int r = 0; r < count; ++r) {
      const double t = roots[r];
      const Vec2 foot = a + t * d;
      const double dist = (p - foot).norm();
      if (dist < best_dist) {
        const Vec2 nrm = blended_normal(i, t);
        best_dist = dist;
        best.segment = i;
        best.s = arclength_[i] + t * seg_len;
        best.e1 = (p - foot).dot(nrm);
        best.heading = std::atan2(-nrm.x(), nrm.y());
        best.foot = foot;
      }
    }
  }
  if (!std::isfinite(best_dist)) {
    // Outside every normal fan: fall back to the nearest vertex.
    std::size_t nearest = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if ((p - vertices_[i]).squaredNorm() < (p - vertices_[nearest]).squaredNorm()) nearest = i;
    }
    const Vec2& nrm = normals_[nearest];
    best.segment = nearest;
    best.s = arclength_[nearest];
    best.e1 = (p - vertices_[nearest]).dot(nrm);
    best.heading = std::atan2(-nrm.x(), nrm.y());
    best.foot = vertices_[nearest];
  }
  if (best.s >= length_) best.s -= length_;
  return best;
}

std::vector<double> Path::vertex_curvature() const {
  const std::size_t n = size();
  std::vector<double> k(n);
  for (std::size_t i = 0; i < n; ++i) {
    k[i] = menger_curvature(vertices_[(i + n - 1) % n], vertices_[i], vertices_[(i + 1) % n]);
  }
  return k;
}

double Path::max_abs_curvature() const {
  double m = 0.0;
  for (double k : vertex_curvature()) m = std::max(m, std::abs(k));
  return m;
}

double Path::signed_area() const {
  double area = 0.0;
  const std::size_t n = size();
  for (std::size_t i = 0; i < n; ++i) area += cross(vertices_[i], vertices_[(i + 1) % n]);
  return 0.5 * area;
}

bool Path::is_simple() const {
  const std::size_t n = size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = vertices_[i];
    const Vec2& b = vertices_[(i + 1) % n];
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      if (segments_intersect(a, b, vertices_[j], vertices_[(j + 1) % n])) return false;
    }
  }
  return true;
}

FrenetPose frenet(const Vec2& position, double heading, const Path& reference, double max_offset) {
  const PathProjection proj = reference.project(position);
  if (std::abs(proj.e1) > max_offset) throw OffTrackError("position is too far from the reference path");
  return {proj.s, proj.e1, wrap_angle(heading - proj.heading)};
}

Pose2 from_frenet(const FrenetPose& pose, const Path& reference) {
  return {reference.to_cartesian(pose.s, pose.e1), wrap_angle(reference.heading_at(pose.s) + pose.e2)};
}

}  // namespace h2h
