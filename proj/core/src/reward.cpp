#include "h2h/reward.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "h2h/errors.hpp"

namespace h2h {

void RewardConfig::validate() const {
  for (double k : {k_target, k_time, k_swerve, k_wall_hit, k_opp1, k_opp2, k_brake, k_slip, k_constraint}) {
    if (!(k >= 0.0)) throw ConfigError("reward weights must be non-negative");
  }
  if (!(proximity >= 0.0)) throw ConfigError("lidar proximity threshold must be non-negative");
  for (std::size_t j : monitored_rays) {
    if (j >= kLidarRays) throw ConfigError("monitored ray index out of range");
  }
  for (std::size_t j : front_rays) {
    if (j >= kLidarRays) throw ConfigError("front ray index out of range");
  }
}

RewardTerms compute_reward(const StepContext& ctx, const RewardConfig& c) {
  RewardTerms r;
  if (ctx.crossed_checkpoint) {
    r.target = c.k_target * std::exp(-ctx.target_distance) * (ctx.speed_in_target_window ? 2.0 : 1.0);
    r.time = -c.k_time * ctx.interval;
    if (ctx.straight_checkpoint && ctx.lane_changed) r.swerve = -c.k_swerve;
  }
  for (std::size_t j : c.monitored_rays) {
    const LidarReading& reading = ctx.scan.readings[j];
    if (reading.distance > c.proximity) continue;
    if (reading.hit == HitClass::Wall) r.wall -= c.k_wall_hit;
    if (reading.hit == HitClass::Opponent) {
      r.opponent -= c.k_opp1;
      if (std::find(c.front_rays.begin(), c.front_rays.end(), j) != c.front_rays.end()) r.opponent -= c.k_opp2;
    }
  }
  if (ctx.speed <= ctx.target_speed && ctx.throttle <= 0.0) r.brake_slip -= c.k_brake;
  r.brake_slip -= c.k_slip * (ctx.slip.front * ctx.slip.front + ctx.slip.rear * ctx.slip.rear);
  r.constraint = violation_penalty(ctx.residuals, c.k_constraint);
  return r;
}

double reward_bound(const RewardConfig& c, double max_interval, double max_residual, double delta_max) {
  const double rays = static_cast<double>(c.monitored_rays.size());
  const double alpha = std::numbers::pi / 2.0 + delta_max;
  return 2.0 * c.k_target + c.k_time * max_interval + c.k_swerve +
         rays * std::max(c.k_wall_hit, c.k_opp1 + c.k_opp2) + c.k_brake + 2.0 * c.k_slip * alpha * alpha +
         2.0 * c.k_constraint * max_residual * max_residual;
}

}  // namespace h2h
