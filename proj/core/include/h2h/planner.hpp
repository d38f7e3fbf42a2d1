#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "h2h/track.hpp"
#include "h2h/vehicle_dynamics.hpp"

namespace h2h {

/// Fixed-width velocity windows [v_min + b*width, v_min + (b+1)*width). Speeds outside
/// the covered range fall into the first or last window; a speed on a window edge
/// belongs to the upper window.
struct SpeedBins {
  double v_min = 0.5;
  double width = 1.5;
  int count = 3;

  double lower(int bin) const { return v_min + bin * width; }
  double upper(int bin) const { return v_min + (bin + 1) * width; }
  /// Representative speed of a window.
  double midpoint(int bin) const { return v_min + (bin + 0.5) * width; }
  int bin_of(double speed) const;
  void validate() const;
};

struct AccelLimits {
  double max_accel = 4.0;  // m/s^2
  double max_decel = 6.0;  // m/s^2, magnitude
  /// Optional cornering bound v^2 |kappa| <= max_lateral_accel at the arrival checkpoint.
  double max_lateral_accel = std::numeric_limits<double>::infinity();
};

struct DiscreteState {
  int checkpoint = 0;
  int lane = 0;
  int speed_bin = 0;
  int wear_bin = 0;  // carried, never changes
  double time = 0.0;  // s, arrival time at the checkpoint

  bool operator==(const DiscreteState&) const = default;
};

/// Last passed checkpoint, lateral band and speed window of a continuous state.
/// Empty when the car is outside the track boundaries.
std::optional<DiscreteState> discretize(const VehicleState& state, const TrackModel& track, const SpeedBins& bins,
                                        double time = 0.0);

/// Lane-center points and curvature at every checkpoint, cached for the game.
class CheckpointLattice {
 public:
  explicit CheckpointLattice(const TrackModel& track);

  int checkpoint_count() const { return count_; }
  int n_lanes() const { return lanes_; }
  const Vec2& point(int checkpoint, int lane) const;
  double curvature(int checkpoint) const;

 private:
  int count_ = 0;
  int lanes_ = 0;
  std::vector<Vec2> points_;
  std::vector<double> curvature_;
};

struct Transition {
  DiscreteState next;
  double arrival_time = 0.0;
};

/// One-checkpoint moves from a state. Segment length is the distance between the two
/// lane points (so lane changes lengthen it) and is traversed at the mean of the two
/// representative speeds. Ordered by descending speed bin, then ascending lane.
std::vector<Transition> feasible_transitions(const DiscreteState& state, const CheckpointLattice& lattice,
                                             const SpeedBins& bins, const AccelLimits& limits);
std::vector<Transition> feasible_transitions(const DiscreteState& state, const TrackModel& track,
                                             const SpeedBins& bins, const AccelLimits& limits);

/// Same checkpoint, same lane and arrival times closer than min_sep_time.
bool collision_excluded(const DiscreteState& a, const DiscreteState& b, double min_sep_time);

/// Sum of squared lane deviations from the optimal lane table.
double plan_cost(std::span<const DiscreteState> states, std::span<const int> optimal_lanes);

enum class CostMode { RacelineDistance, MinTime };

/// Root of the two-player game. Player 0 is "me"; the opponent is optional.
struct GameNode {
  DiscreteState me;
  std::optional<DiscreteState> opp;

  /// Player whose arrival time is smaller; ties go to player 0.
  int to_move() const { return (!opp || me.time <= opp->time) ? 0 : 1; }
};

struct PlannerConfig {
  SpeedBins bins;
  AccelLimits limits;
  /// Checkpoints beyond the most advanced player that both players must reach.
  int horizon = 6;
  /// MCTS iterations; the search stops early once the root value is proven.
  int budget = 2000;
  CostMode mode = CostMode::RacelineDistance;
  double min_sep_time = 0.5;  // s
  double exploration = 1.4142135623730951;
  /// Subtrees with at most this many remaining moves are solved exactly.
  int exact_tail_plies = 4;
  /// Charged to a player left without a legal move.
  double stuck_penalty = 1.0e6;

  void validate() const;
};

struct Plan {
  GameNode root;
  /// States reached by each player's moves, in order (the root states are excluded).
  std::vector<DiscreteState> me;
  std::vector<DiscreteState> opp;
  /// Game value from player 0's view (lower is better).
  double value = 0.0;
  bool solved = false;
  bool degraded = false;
  int iterations = 0;
};

/// Game value of a finished line of play: own minus opponent raceline cost, or own
/// minus opponent final arrival time.
double game_value(const Plan& plan, std::span<const int> optimal_lanes, CostMode mode);

/// Zero-sum alternating-move search with UCT and proven-value backup. Deterministic for
/// a given seed.
Plan plan(const GameNode& root, const TrackModel& track, std::span<const int> optimal_lanes,
          const PlannerConfig& config, std::uint64_t seed);

}  // namespace h2h
