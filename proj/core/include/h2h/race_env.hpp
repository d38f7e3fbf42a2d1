#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "h2h/cbf_shield.hpp"
#include "h2h/curriculum.hpp"
#include "h2h/planner.hpp"
#include "h2h/raceline.hpp"
#include "h2h/reward.hpp"
#include "h2h/sensing.hpp"
#include "h2h/track.hpp"
#include "h2h/vehicle_dynamics.hpp"

namespace h2h {

struct RaceConfig {
  double dt = kDefaultDt;
  int laps = 3;
  int max_steps = 30000;
  /// Shield applied to each agent's raw control.
  std::array<bool, 2> shield{false, false};
  CbfConfig cbf;
  RewardConfig reward;
  SpeedBins bins;
  /// Speed window used for targets that no planner has set.
  int default_speed_bin = 1;
  LidarConfig lidar;
  /// Contact stays latched until the car is this far back inside (m); a new wall
  /// collision is counted only on a fresh contact.
  double contact_release = 0.02;

  void validate() const;
};

/// Per-agent bookkeeping.
struct AgentState {
  VehicleState vehicle;
  /// Unwrapped centerline arc length travelled since the start line.
  double progress = 0.0;
  /// Unwrapped index of the next checkpoint to cross (checkpoint 0 of lap 0 is behind the start).
  int next_checkpoint = 1;
  /// Crossing time of every passed checkpoint, in order.
  std::vector<double> crossing_times;
  std::vector<double> lap_times;
  int laps = 0;
  double lap_start_time = 0.0;
  double last_cross_time = 0.0;
  int last_cross_lane = 0;
  DiscreteState target;
  bool finished = false;
  double finish_time = 0.0;
  bool dnf = false;
  int wall_collisions = 0;
  int from_behind_collisions = 0;
  int opponent_contacts = 0;
  bool in_wall_contact = false;
  bool in_opponent_contact = false;
  double raceline_distance_sum = 0.0;
  long raceline_samples = 0;
  LidarScan scan;

  /// Index of the last passed checkpoint in [0, K).
  int last_checkpoint(int checkpoint_count) const {
    return ((next_checkpoint - 1) % checkpoint_count + checkpoint_count) % checkpoint_count;
  }
};

struct AgentEvents {
  int checkpoints_crossed = 0;
  bool wall_contact = false;
  bool wall_onset = false;
  bool opponent_contact = false;
  bool opponent_onset = false;
  /// Set on a contact onset when this agent was the trailing car.
  bool from_behind = false;
  /// Barrier residuals of the raw control.
  BarrierResiduals residuals;
  Control raw;
  Control applied;
  RewardTerms reward;
  bool lap_completed = false;
  bool finished = false;
};

struct StepEvents {
  std::array<AgentEvents, 2> agent;
};

/// Head-to-head (or single-car) environment on one track.
class RaceEnv {
 public:
  RaceEnv(const TrackModel& track, const Raceline& raceline, VehicleParams params, RaceConfig config,
          int n_agents = 2);

  int n_agents() const { return n_agents_; }
  const TrackModel& track() const { return *track_; }
  const Raceline& raceline() const { return *raceline_; }
  const VehicleParams& params() const { return params_; }
  const RaceConfig& config() const { return config_; }
  const EnvPhysicsConfig& physics() const { return physics_; }
  void configure(const EnvPhysicsConfig& physics);

  /// Both cars on the start line, one on the left lane center and one on the right;
  /// agent 0 takes the left side with probability 1/2. Returns whether it did.
  bool reset(std::uint64_t seed);
  /// Deterministic placement; a single car starts on the lane given by agent0_left.
  void reset_sides(bool agent0_left);
  /// Arbitrary placement at rest (tests and tools).
  void reset_states(const std::vector<VehicleState>& states);

  StepEvents step(const std::array<Control, 2>& controls);

  double time() const { return time_; }
  int steps() const { return steps_; }
  bool done() const;
  const AgentState& agent(int i) const { return agents_[static_cast<std::size_t>(i)]; }
  const VehicleState* opponent_of(int i) const;

  void set_target(int i, const DiscreteState& target);
  /// Next checkpoint on the raceline lane at the default speed window.
  DiscreteState default_target(int i) const;
  /// Discrete state at the last passed checkpoint (lane and speed taken now).
  DiscreteState discrete_state(int i) const;
  /// Body-frame lidar of agent i from its current pose.
  const LidarScan& scan(int i) const { return agent(i).scan; }

 private:
  void place(int i, const VehicleState& state);
  void refresh_scans();
  double resolve_walls(VehicleState& state) const;
  void resolve_cars(std::array<VehicleState, 2>& states, bool& contact) const;
  double project_s(const VehicleState& state) const;

  const TrackModel* track_;
  const Raceline* raceline_;
  VehicleParams params_;
  RaceConfig config_;
  EnvPhysicsConfig physics_;
  int n_agents_;
  std::array<AgentState, 2> agents_;
  double time_ = 0.0;
  int steps_ = 0;
};

}  // namespace h2h
