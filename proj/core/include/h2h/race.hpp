#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "h2h/drivers.hpp"
#include "h2h/planner.hpp"
#include "h2h/ppo.hpp"
#include "h2h/race_env.hpp"

namespace h2h {

/// A track with its precomputed raceline.
struct RaceTrack {
  TrackModel track;
  Raceline raceline;
};

struct RaceSetup {
  VehicleParams params = VehicleParams::reference();
  RaceConfig race;
  PlannerConfig planner = default_race_planner();

  static PlannerConfig default_race_planner();
};

struct AgentRaceStats {
  std::string name;
  std::vector<double> lap_times;
  /// Mean of the completed lap times; NaN when no lap was completed.
  double avg_lap_time = 0.0;
  /// Mean absolute lateral distance from the raceline over the race, m.
  double avg_raceline_distance = 0.0;
  int wall_collisions = 0;
  int from_behind_collisions = 0;
  int opponent_contacts = 0;
  bool finished = false;
  bool dnf = false;
  double finish_time = 0.0;
};

struct RaceResult {
  std::uint64_t seed = 0;
  int track_index = 0;
  /// 0 or 1, or -1 when nobody won.
  int winner = -1;
  bool agent_a_left = true;
  int steps = 0;
  double duration = 0.0;
  std::array<AgentRaceStats, 2> agents;

  bool operator==(const RaceResult&) const;
};

/// One row of the per-step race trace.
struct TraceRecord {
  double t = 0.0;
  std::array<VehicleState, 2> state;
  std::array<AgentEvents, 2> events;
};

/// Plays one race. Hierarchical drivers are replanned at the start and after every
/// checkpoint crossing. The race ends when a car completes the configured laps or at
/// the step cap. A car whose state diverges is out (DNF) and its opponent wins.
RaceResult run_race(Driver& a, Driver& b, const RaceTrack& track, const RaceSetup& setup, std::uint64_t seed,
                    std::vector<TraceRecord>* trace = nullptr);

struct AgentAggregate {
  int wins = 0;
  /// Mean of the per-race average lap times (races without a completed lap skipped).
  double avg_lap_time = 0.0;
  double avg_raceline_distance = 0.0;
  int wall_collisions = 0;
  int from_behind_collisions = 0;
};

struct MatchResult {
  std::uint64_t seed = 0;
  std::array<std::string, 2> names;
  std::vector<RaceResult> races;
  std::array<AgentAggregate, 2> aggregate;
  int no_winner = 0;

  bool operator==(const MatchResult&) const;
};

/// Seed of race i of a match.
std::uint64_t race_seed(std::uint64_t match_seed, int race);

MatchResult aggregate_match(std::vector<RaceResult> races, std::array<std::string, 2> names, std::uint64_t seed);

/// n races cycling through the tracks, each with its own seed and random start sides.
MatchResult run_match(Driver& a, Driver& b, const std::vector<RaceTrack>& tracks, int n_races, const RaceSetup& setup,
                      std::uint64_t seed, std::vector<std::vector<TraceRecord>>* traces = nullptr);

/// Learner (agent 0) racing a scripted opponent across a set of tracks, exposed to the
/// trainer. Episodes cycle through the tracks.
class RaceTrainingEnv : public RlEnvironment {
 public:
  struct Options {
    int episode_steps = 1500;
    bool hierarchical = true;
    bool use_planner = false;
    ScriptedDriver::Options opponent;
  };

  RaceTrainingEnv(std::vector<RaceTrack> tracks, RaceSetup setup, Options options);

  int observation_size() const override { return static_cast<int>(kObservationSize); }
  double delta_max() const override { return setup_.params.delta_max; }
  void configure(const EnvPhysicsConfig& physics) override;
  std::vector<double> reset(std::uint64_t seed) override;
  EnvStep step(const Control& control) override;

 private:
  std::vector<double> observation() const;
  void replan(std::uint64_t seed);

  std::vector<RaceTrack> tracks_;
  RaceSetup setup_;
  Options options_;
  std::vector<std::unique_ptr<RaceEnv>> envs_;
  RaceEnv* env_ = nullptr;
  EnvPhysicsConfig physics_;
  ScriptedDriver opponent_;
  int episode_ = 0;
  int steps_ = 0;
  std::uint64_t seed_ = 0;
};

}  // namespace h2h
