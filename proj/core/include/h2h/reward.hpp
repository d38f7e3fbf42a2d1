#pragma once

#include <cstddef>
#include <vector>

#include "h2h/cbf_shield.hpp"
#include "h2h/sensing.hpp"
#include "h2h/vehicle_dynamics.hpp"

namespace h2h {

struct RewardConfig {
  double k_target = 1.0;
  double k_time = 0.1;
  double k_swerve = 0.2;
  double k_wall_hit = 0.1;
  double k_opp1 = 0.1;
  double k_opp2 = 0.2;
  double k_brake = 0.05;
  double k_slip = 0.05;
  double k_constraint = 1.0;
  /// Lidar proximity threshold h, m.
  double proximity = 0.3;
  /// Rays inspected by the wall and opponent terms.
  std::vector<std::size_t> monitored_rays{0, 4, 8, 12, 16, 19, 23, 27, 31};
  /// Forward-pointing rays carrying the extra opponent penalty.
  std::vector<std::size_t> front_rays{12, 16, 19};
  /// Checkpoints with |curvature| below this count as straights, 1/m.
  double straight_curvature = 0.02;

  void validate() const;
};

/// Everything the reward needs from one environment step.
struct StepContext {
  bool crossed_checkpoint = false;
  /// Distance from the car to the target lane point of the crossed checkpoint.
  double target_distance = 0.0;
  bool speed_in_target_window = false;
  /// Time since the previous checkpoint crossing.
  double interval = 0.0;
  bool straight_checkpoint = false;
  bool lane_changed = false;
  LidarScan scan;
  double speed = 0.0;
  /// Lower edge of the target speed window.
  double target_speed = 0.0;
  double throttle = 0.0;
  SlipAngles slip;
  BarrierResiduals residuals;
};

struct RewardTerms {
  double target = 0.0;
  double time = 0.0;
  double swerve = 0.0;
  double wall = 0.0;
  double opponent = 0.0;
  double brake_slip = 0.0;
  double constraint = 0.0;

  double total() const { return target + time + swerve + wall + opponent + brake_slip + constraint; }
};

RewardTerms compute_reward(const StepContext& ctx, const RewardConfig& config);

/// Largest |reward| a single step can produce when the checkpoint interval is at most
/// max_interval, each barrier residual at most max_residual and the steer at most
/// delta_max.
double reward_bound(const RewardConfig& config, double max_interval, double max_residual, double delta_max);

}  // namespace h2h
