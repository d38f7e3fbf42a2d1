#pragma once

#include <array>
#include <cstddef>
#include <numbers>

#include "h2h/geometry.hpp"
#include "h2h/track.hpp"
#include "h2h/vehicle_dynamics.hpp"

namespace h2h {

inline constexpr std::size_t kLidarRays = 32;

enum class HitClass { None, Wall, Opponent };

struct LidarReading {
  double distance = 0.0;
  HitClass hit = HitClass::None;
};

/// Readings ordered from the leftmost ray (index 0) to the rightmost (index 31).
struct LidarScan {
  std::array<LidarReading, kLidarRays> readings{};
};

struct LidarConfig {
  double fan = 1.5 * std::numbers::pi;  // 270 degrees, symmetric about the heading
  double max_range = 5.0;               // m, ten lengths of the reference car
};

/// Ray direction relative to the vehicle heading.
double ray_angle(std::size_t ray, const LidarConfig& config);

/// Oriented rectangle.
struct CollisionBody {
  Vec2 center{0.0, 0.0};
  double heading = 0.0;
  double length = 0.0;
  double width = 0.0;

  /// Corners in counter-clockwise order starting front-left.
  std::array<Vec2, 4> corners() const;
};

CollisionBody body_of(const VehicleState& state, const VehicleParams& params);

/// Casts the 32-ray fan from the body center against both walls and, when given,
/// the opponent rectangle. The nearest hit wins; misses report max_range.
LidarScan cast_lidar(const Vec2& origin, double heading, const TrackModel& track, const CollisionBody* opponent,
                     const LidarConfig& config = {});

/// Minimum distance between rectangle boundaries; negative penetration depth when the
/// bodies overlap (separating-axis test), so the result is <= 0 iff they overlap.
double body_separation(const CollisionBody& a, const CollisionBody& b);

/// Unit normal of the separating axis with the least overlap, pointing from a to b.
Vec2 contact_normal(const CollisionBody& a, const CollisionBody& b);

/// True iff some corner lies beyond the half width of the centerline frame.
bool wall_contact(const CollisionBody& body, const TrackModel& track);

/// Largest corner excursion |e1| - w (negative when all corners are inside).
double wall_excess(const CollisionBody& body, const TrackModel& track);

}  // namespace h2h
