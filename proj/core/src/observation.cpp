#include "h2h/observation.hpp"

#include <algorithm>

#include "h2h/errors.hpp"

namespace h2h {

TargetEncoding encode_target(const VehicleState& self, const TrackModel& track, const DiscreteState& target,
                             const SpeedBins& bins) {
  const FrenetPose pose = track.frenet({self.x, self.y}, self.phi);
  const int lane = track.lane_of(std::clamp(pose.e1, -track.half_width(), track.half_width())).value_or(0);
  TargetEncoding out;
  out.lane_offset = track.lane_center_offset(target.lane) - track.lane_center_offset(lane);
  out.speed = bins.midpoint(target.speed_bin);
  const double s_target = track.checkpoints()[static_cast<std::size_t>(target.checkpoint)];
  out.distance = track.centerline().wrap_s(s_target - pose.s);
  return out;
}

Observation build_observation(const VehicleState& self, const VehicleState* opponent, const TrackModel& track,
                              const Raceline& raceline, const TargetEncoding& target, const LidarScan& scan) {
  Observation o{};
  o[obs::kVx] = self.vx;
  o[obs::kVy] = self.vy;
  o[obs::kOmega] = self.omega;
  const FrenetPose rl = frenet({self.x, self.y}, self.phi, raceline.path, 4.0 * track.half_width());
  o[obs::kRacelineE1] = rl.e1;
  o[obs::kRacelineE2] = rl.e2;
  if (opponent != nullptr) {
    const Vec2 rel = to_body(Vec2{opponent->x - self.x, opponent->y - self.y}, self.phi);
    o[obs::kOpponentX] = rel.x();
    o[obs::kOpponentY] = rel.y();
  }
  o[obs::kTargetLaneOffset] = target.lane_offset;
  o[obs::kTargetSpeed] = target.speed;
  o[obs::kTargetDistance] = target.distance;
  for (std::size_t j = 0; j < kLidarRays; ++j) o[obs::kLidar + j] = scan.readings[j].distance;
  return o;
}

}  // namespace h2h
