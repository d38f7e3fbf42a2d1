#include "h2h/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace h2h {

double ray_angle(std::size_t ray, const LidarConfig& config) {
  return 0.5 * config.fan - config.fan * static_cast<double>(ray) / static_cast<double>(kLidarRays - 1);
}

std::array<Vec2, 4> CollisionBody::corners() const {
  const Vec2 f = heading_vector(heading);
  const Vec2 l = left_perp(f);
  const Vec2 hf = 0.5 * length * f;
  const Vec2 hl = 0.5 * width * l;
  return {center + hf + hl, center - hf + hl, center - hf - hl, center + hf - hl};
}

CollisionBody body_of(const VehicleState& state, const VehicleParams& params) {
  return {{state.x, state.y}, state.phi, params.length, params.width};
}

namespace {

void collect_near(const std::vector<Vec2>& wall, const Vec2& origin, double range,
                  std::vector<std::pair<Vec2, Vec2>>& out) {
  const std::size_t n = wall.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = wall[i];
    const Vec2& b = wall[(i + 1) % n];
    if (point_segment_distance(origin, a, b) <= range) out.emplace_back(a, b);
  }
}

}  // namespace

LidarScan cast_lidar(const Vec2& origin, double heading, const TrackModel& track, const CollisionBody* opponent,
                     const LidarConfig& config) {
  std::vector<std::pair<Vec2, Vec2>> walls;
  collect_near(track.left_wall(), origin, config.max_range, walls);
  collect_near(track.right_wall(), origin, config.max_range, walls);
  std::array<Vec2, 4> opp{};
  if (opponent != nullptr) opp = opponent->corners();

  constexpr double kMinDistance = 1e-9;
  LidarScan scan;
  for (std::size_t j = 0; j < kLidarRays; ++j) {
    const Vec2 dir = heading_vector(heading + ray_angle(j, config));
    LidarReading reading{config.max_range, HitClass::None};
    for (const auto& [a, b] : walls) {
      const double t = ray_segment_distance(origin, dir, a, b);
      if (t >= 0.0 && t < reading.distance) reading = {std::max(t, kMinDistance), HitClass::Wall};
    }
    if (opponent != nullptr) {
      for (std::size_t e = 0; e < 4; ++e) {
        const double t = ray_segment_distance(origin, dir, opp[e], opp[(e + 1) % 4]);
        if (t >= 0.0 && t < reading.distance) reading = {std::max(t, kMinDistance), HitClass::Opponent};
      }
    }
    scan.readings[j] = reading;
  }
  return scan;
}

namespace {

struct AxisOverlap {
  double overlap;
  Vec2 axis;
};

// Smallest projection overlap over the four face normals; negative means separated.
AxisOverlap least_overlap(const CollisionBody& a, const CollisionBody& b) {
  const auto ca = a.corners();
  const auto cb = b.corners();
  const std::array<Vec2, 4> axes{heading_vector(a.heading), left_perp(heading_vector(a.heading)),
                                 heading_vector(b.heading), left_perp(heading_vector(b.heading))};
  AxisOverlap best{std::numeric_limits<double>::infinity(), axes[0]};
  for (const Vec2& axis : axes) {
    double amin = std::numeric_limits<double>::infinity(), amax = -amin;
    double bmin = amin, bmax = -amin;
    for (const Vec2& p : ca) {
      amin = std::min(amin, p.dot(axis));
      amax = std::max(amax, p.dot(axis));
    }
    for (const Vec2& p : cb) {
      bmin = std::min(bmin, p.dot(axis));
      bmax = std::max(bmax, p.dot(axis));
    }
    const double overlap = std::min(amax, bmax) - std::max(amin, bmin);
    if (overlap < best.overlap) best = {overlap, axis};
  }
  return best;
}

}  // namespace

double body_separation(const CollisionBody& a, const CollisionBody& b) {
  const AxisOverlap sat = least_overlap(a, b);
  if (sat.overlap >= 0.0) return -sat.overlap;
  const auto ca = a.corners();
  const auto cb = b.corners();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t e = 0; e < 4; ++e) {
      best = std::min(best, point_segment_distance(ca[i], cb[e], cb[(e + 1) % 4]));
      best = std::min(best, point_segment_distance(cb[i], ca[e], ca[(e + 1) % 4]));
    }
  }
  return best;
}

Vec2 contact_normal(const CollisionBody& a, const CollisionBody& b) {
  Vec2 axis = least_overlap(a, b).axis;
  if (axis.dot(b.center - a.center) < 0.0) axis = -axis;
  return axis;
}

double wall_excess(const CollisionBody& body, const TrackModel& track) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const Vec2& c : body.corners()) {
    worst = std::max(worst, std::abs(track.centerline().project(c).e1) - track.half_width());
  }
  return worst;
}

bool wall_contact(const CollisionBody& body, const TrackModel& track) { return wall_excess(body, track) > 0.0; }

}  // namespace h2h
