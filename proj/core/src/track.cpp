#include "h2h/track.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "h2h/errors.hpp"

namespace h2h {

TrackModel::TrackModel(std::vector<Vec2> centerline, double half_width, int n_lanes, double checkpoint_spacing)
    : centerline_(std::move(centerline)),
      half_width_(half_width),
      n_lanes_(n_lanes),
      checkpoint_spacing_(checkpoint_spacing) {
  if (!(half_width_ > 0.0)) throw ConfigError("track half width must be positive");
  if (n_lanes_ < 1) throw ConfigError("track needs at least one lane");
  if (!(checkpoint_spacing_ > 0.0)) throw ConfigError("checkpoint spacing must be positive");
  if (!centerline_.is_simple()) throw ConfigError("track centerline intersects itself");
  if (half_width_ * centerline_.max_abs_curvature() >= 1.0) {
    throw ConfigError("track is too narrow-radiused for its width: boundaries would fold");
  }

  const double length = centerline_.length();
  const int count = std::max(3, static_cast<int>(std::lround(length / checkpoint_spacing_)));
  checkpoints_.resize(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) checkpoints_[static_cast<std::size_t>(k)] = k * length / count;

  const auto& v = centerline_.vertices();
  const auto& n = centerline_.normals();
  left_wall_.resize(v.size());
  right_wall_.resize(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    left_wall_[i] = v[i] + half_width_ * n[i];
    right_wall_[i] = v[i] - half_width_ * n[i];
  }

  const std::vector<double> curvature = centerline_.vertex_curvature();
  const auto& arc = centerline_.arclength();
  checkpoint_curvature_.assign(checkpoints_.size(), 0.0);
  std::vector<int> samples(checkpoints_.size(), 0);
  for (std::size_t i = 0; i < arc.size(); ++i) {
    const auto c = static_cast<std::size_t>(last_checkpoint(arc[i]));
    checkpoint_curvature_[c] += curvature[i];
    ++samples[c];
  }
  for (std::size_t c = 0; c < checkpoints_.size(); ++c) {
    if (samples[c] > 0) checkpoint_curvature_[c] /= samples[c];
  }
}

int TrackModel::last_checkpoint(double s) const {
  const double ws = centerline_.wrap_s(s);
  auto it = std::upper_bound(checkpoints_.begin(), checkpoints_.end(), ws);
  return static_cast<int>(std::distance(checkpoints_.begin(), it)) - 1;
}

std::optional<int> TrackModel::lane_of(double e1) const {
  if (!(std::abs(e1) <= half_width_)) return std::nullopt;
  const int lane = static_cast<int>(std::floor((half_width_ - e1) / lane_width()));
  return std::clamp(lane, 0, n_lanes_ - 1);
}

double TrackModel::lane_center_offset(int lane) const { return half_width_ - (lane + 0.5) * lane_width(); }

Vec2 TrackModel::lattice_point(int checkpoint, int lane) const {
  const int k = ((checkpoint % checkpoint_count()) + checkpoint_count()) % checkpoint_count();
  return centerline_.to_cartesian(checkpoints_[static_cast<std::size_t>(k)], lane_center_offset(lane));
}

FrenetPose TrackModel::frenet(const Vec2& position, double heading) const {
  return h2h::frenet(position, heading, centerline_, 2.0 * half_width_);
}

double TrackModel::checkpoint_curvature(int checkpoint) const {
  const int count = checkpoint_count();
  return checkpoint_curvature_[static_cast<std::size_t>(((checkpoint % count) + count) % count)];
}

TrackModel TrackModel::mirrored() const {
  std::vector<Vec2> pts = centerline_.vertices();
  for (Vec2& p : pts) p.y() = -p.y();
  TrackModel out(std::move(pts), half_width_, n_lanes_, checkpoint_spacing_);
  out.category = category;
  return out;
}

std::vector<Vec2> resample_closed(const std::vector<Vec2>& points, double spacing) {
  const std::size_t n = points.size();
  if (n < 3) throw ConfigError("cannot resample fewer than three points");
  std::vector<double> cum(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) cum[i + 1] = cum[i] + (points[(i + 1) % n] - points[i]).norm();
  const double total = cum[n];
  const auto count = static_cast<std::size_t>(std::max<long>(3, std::lround(total / spacing)));
  std::vector<Vec2> out;
  out.reserve(count);
  std::size_t seg = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const double s = total * static_cast<double>(k) / static_cast<double>(count);
    while (seg + 1 < n && cum[seg + 1] <= s) ++seg;
    const double len = cum[seg + 1] - cum[seg];
    const double t = len > 0.0 ? (s - cum[seg]) / len : 0.0;
    out.push_back(points[seg] + t * (points[(seg + 1) % n] - points[seg]));
  }
  return out;
}

TrackModel make_oval(double straight_length, double radius, double half_width, int n_lanes,
                     double checkpoint_spacing, double vertex_spacing) {
  constexpr double kPi = std::numbers::pi;
  const double half = 0.5 * straight_length;
  const double arc = kPi * radius;
  const double total = 2.0 * straight_length + 2.0 * arc;
  const auto count = static_cast<std::size_t>(std::max<long>(8, std::lround(total / vertex_spacing)));
  std::vector<Vec2> pts;
  pts.reserve(count);
  // Arc-length parametrisation starting mid lower straight, heading +x.
  for (std::size_t k = 0; k < count; ++k) {
    double s = total * static_cast<double>(k) / static_cast<double>(count);
    if (s < half) {
      pts.emplace_back(s, -radius);
      continue;
    }
    s -= half;
    if (s < arc) {
      const double a = -0.5 * kPi + s / radius;
      pts.emplace_back(half + radius * std::cos(a), radius * std::sin(a));
      continue;
    }
    s -= arc;
    if (s < straight_length) {
      pts.emplace_back(half - s, radius);
      continue;
    }
    s -= straight_length;
    if (s < arc) {
      const double a = 0.5 * kPi + s / radius;
      pts.emplace_back(-half + radius * std::cos(a), radius * std::sin(a));
      continue;
    }
    s -= arc;
    pts.emplace_back(-half + s, -radius);
  }
  return TrackModel(std::move(pts), half_width, n_lanes, checkpoint_spacing);
}

TrackModel make_ring(double radius, double half_width, int n_lanes, double checkpoint_spacing,
                     double vertex_spacing) {
  constexpr double kPi = std::numbers::pi;
  const auto count =
      static_cast<std::size_t>(std::max<long>(16, std::lround(2.0 * kPi * radius / vertex_spacing)));
  std::vector<Vec2> pts;
  pts.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double a = -0.5 * kPi + 2.0 * kPi * static_cast<double>(k) / static_cast<double>(count);
    pts.emplace_back(radius * std::cos(a), radius * std::sin(a));
  }
  return TrackModel(std::move(pts), half_width, n_lanes, checkpoint_spacing);
}

}  // namespace h2h
