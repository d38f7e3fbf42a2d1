#pragma once

#include <array>
#include <cstddef>

#include "h2h/planner.hpp"
#include "h2h/raceline.hpp"
#include "h2h/sensing.hpp"
#include "h2h/track.hpp"
#include "h2h/vehicle_dynamics.hpp"

namespace h2h {

inline constexpr std::size_t kObservationSize = 42;
using Observation = std::array<double, kObservationSize>;

/// Index map of the observation vector.
namespace obs {
inline constexpr std::size_t kVx = 0;
inline constexpr std::size_t kVy = 1;
inline constexpr std::size_t kOmega = 2;
inline constexpr std::size_t kRacelineE1 = 3;
inline constexpr std::size_t kRacelineE2 = 4;
inline constexpr std::size_t kOpponentX = 5;  // body frame, forward
inline constexpr std::size_t kOpponentY = 6;  // body frame, left
inline constexpr std::size_t kTargetLaneOffset = 7;
inline constexpr std::size_t kTargetSpeed = 8;
inline constexpr std::size_t kTargetDistance = 9;
inline constexpr std::size_t kLidar = 10;  // 32 entries, leftmost ray first
}  // namespace obs

/// High-level target as fed to the network.
struct TargetEncoding {
  double lane_offset = 0.0;  // target lane center minus current lane center, m
  double speed = 0.0;        // midpoint of the target speed window, m/s
  double distance = 0.0;     // forward arc length to the target checkpoint, m
};

TargetEncoding encode_target(const VehicleState& self, const TrackModel& track, const DiscreteState& target,
                             const SpeedBins& bins);

/// Assembles the observation. Without an opponent the relative position is zero.
Observation build_observation(const VehicleState& self, const VehicleState* opponent, const TrackModel& track,
                              const Raceline& raceline, const TargetEncoding& target, const LidarScan& scan);

}  // namespace h2h
