#include "h2h/planner.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "h2h/errors.hpp"

namespace h2h {

int SpeedBins::bin_of(double speed) const {
  const int bin = static_cast<int>(std::floor((speed - v_min) / width));
  return std::clamp(bin, 0, count - 1);
}

void SpeedBins::validate() const {
  if (!(v_min >= 0.0) || !(width > 0.0) || count < 1) throw ConfigError("invalid speed bins");
}

std::optional<DiscreteState> discretize(const VehicleState& state, const TrackModel& track, const SpeedBins& bins,
                                        double time) {
  FrenetPose pose;
  try {
    pose = track.frenet({state.x, state.y}, state.phi);
  } catch (const OffTrackError&) {
    return std::nullopt;
  }
  const std::optional<int> lane = track.lane_of(pose.e1);
  if (!lane) return std::nullopt;
  DiscreteState out;
  out.checkpoint = track.last_checkpoint(pose.s);
  out.lane = *lane;
  out.speed_bin = bins.bin_of(std::hypot(state.vx, state.vy));
  out.time = time;
  return out;
}

CheckpointLattice::CheckpointLattice(const TrackModel& track)
    : count_(track.checkpoint_count()), lanes_(track.n_lanes()) {
  points_.reserve(static_cast<std::size_t>(count_ * lanes_));
  curvature_.reserve(static_cast<std::size_t>(count_));
  for (int k = 0; k < count_; ++k) {
    for (int l = 0; l < lanes_; ++l) points_.push_back(track.lattice_point(k, l));
    curvature_.push_back(track.checkpoint_curvature(k));
  }
}

const Vec2& CheckpointLattice::point(int checkpoint, int lane) const {
  const int k = ((checkpoint % count_) + count_) % count_;
  return points_[static_cast<std::size_t>(k * lanes_ + lane)];
}

double CheckpointLattice::curvature(int checkpoint) const {
  return curvature_[static_cast<std::size_t>(((checkpoint % count_) + count_) % count_)];
}

std::vector<Transition> feasible_transitions(const DiscreteState& state, const CheckpointLattice& lattice,
                                             const SpeedBins& bins, const AccelLimits& limits) {
  std::vector<Transition> out;
  const int next_cp = (state.checkpoint + 1) % lattice.checkpoint_count();
  const double v0 = bins.midpoint(state.speed_bin);
  const double kappa = std::abs(lattice.curvature(next_cp));
  const Vec2& from = lattice.point(state.checkpoint, state.lane);
  for (int bin = bins.count - 1; bin >= 0; --bin) {
    const double v1 = bins.midpoint(bin);
    if (v1 * v1 * kappa > limits.max_lateral_accel) continue;
    for (int lane = state.lane - 1; lane <= state.lane + 1; ++lane) {
      if (lane < 0 || lane >= lattice.n_lanes()) continue;
      const double length = (lattice.point(next_cp, lane) - from).norm();
      const double accel = (v1 * v1 - v0 * v0) / (2.0 * length);
      if (accel > limits.max_accel || -accel > limits.max_decel) continue;
      Transition t;
      t.next = {next_cp, lane, bin, state.wear_bin, state.time + length / (0.5 * (v0 + v1))};
      t.arrival_time = t.next.time;
      out.push_back(t);
    }
  }
  return out;
}

std::vector<Transition> feasible_transitions(const DiscreteState& state, const TrackModel& track,
                                             const SpeedBins& bins, const AccelLimits& limits) {
  return feasible_transitions(state, CheckpointLattice(track), bins, limits);
}

bool collision_excluded(const DiscreteState& a, const DiscreteState& b, double min_sep_time) {
  return a.checkpoint == b.checkpoint && a.lane == b.lane && std::abs(a.time - b.time) < min_sep_time;
}

double plan_cost(std::span<const DiscreteState> states, std::span<const int> optimal_lanes) {
  double cost = 0.0;
  for (const DiscreteState& s : states) {
    if (s.checkpoint < 0 || static_cast<std::size_t>(s.checkpoint) >= optimal_lanes.size()) {
      throw ConfigError("plan and lane table are not aligned");
    }
    const double d = optimal_lanes[static_cast<std::size_t>(s.checkpoint)] - s.lane;
    cost += d * d;
  }
  return cost;
}

void PlannerConfig::validate() const {
  bins.validate();
  if (!(limits.max_accel > 0.0 && limits.max_decel > 0.0 && limits.max_lateral_accel > 0.0)) {
    throw ConfigError("acceleration limits must be positive");
  }
  if (horizon < 1) throw ConfigError("planner horizon must be at least 1");
  if (budget < 1) throw ConfigError("planner budget must be at least 1");
  if (!(min_sep_time >= 0.0)) throw ConfigError("min_sep_time must be non-negative");
  if (!(exploration >= 0.0)) throw ConfigError("exploration constant must be non-negative");
  if (exact_tail_plies < 0) throw ConfigError("exact_tail_plies must be non-negative");
}

double game_value(const Plan& plan, std::span<const int> optimal_lanes, CostMode mode) {
  if (mode == CostMode::RacelineDistance) {
    return plan_cost(plan.me, optimal_lanes) - (plan.root.opp ? plan_cost(plan.opp, optimal_lanes) : 0.0);
  }
  const double t_me = plan.me.empty() ? plan.root.me.time : plan.me.back().time;
  if (!plan.root.opp) return t_me;
  return t_me - (plan.opp.empty() ? plan.root.opp->time : plan.opp.back().time);
}

namespace {

struct Line {
  int base = 0;  // unwrapped progress of states[0]
  std::vector<DiscreteState> states;
  double cost = 0.0;

  int progress() const { return base + static_cast<int>(states.size()) - 1; }
  const DiscreteState& current() const { return states.back(); }
  const DiscreteState* at(int p) const {
    const int i = p - base;
    if (i < 0 || i >= static_cast<int>(states.size())) return nullptr;
    return &states[static_cast<std::size_t>(i)];
  }
};

struct GameState {
  std::array<Line, 2> line;
  int stuck = -1;
};

class Game {
 public:
  Game(const CheckpointLattice& lattice, std::span<const int> lanes, const PlannerConfig& config, bool two_player,
       int target)
      : lattice_(lattice), lanes_(lanes), config_(config), two_player_(two_player), target_(target) {
    // Moves depend only on the lattice cell; the arrival time is added per query.
    const int cells = lattice.checkpoint_count() * lattice.n_lanes() * config.bins.count;
    table_.resize(static_cast<std::size_t>(cells));
    for (int k = 0; k < lattice.checkpoint_count(); ++k) {
      for (int l = 0; l < lattice.n_lanes(); ++l) {
        for (int b = 0; b < config.bins.count; ++b) {
          const DiscreteState from{k, l, b, 0, 0.0};
          for (const Transition& t : feasible_transitions(from, lattice, config.bins, config.limits)) {
            table_[cell(k, l, b)].push_back(t.next);
          }
        }
      }
    }
  }

  bool two_player() const { return two_player_; }

  bool finished(const GameState& s, int p) const { return s.line[p].progress() >= target_; }

  bool terminal(const GameState& s) const {
    return s.stuck >= 0 || (finished(s, 0) && (!two_player_ || finished(s, 1)));
  }

  int mover(const GameState& s) const {
    if (!two_player_ || finished(s, 1)) return 0;
    if (finished(s, 0)) return 1;
    return s.line[0].current().time <= s.line[1].current().time ? 0 : 1;
  }

  int remaining_plies(const GameState& s) const {
    int r = std::max(0, target_ - s.line[0].progress());
    if (two_player_) r += std::max(0, target_ - s.line[1].progress());
    return r;
  }

  std::vector<DiscreteState> moves(const GameState& s, int p) const {
    std::vector<DiscreteState> out;
    const Line& me = s.line[p];
    const DiscreteState* other = two_player_ ? s.line[1 - p].at(me.progress() + 1) : nullptr;
    const DiscreteState& cur = me.current();
    const std::vector<DiscreteState>& options = table_[cell(cur.checkpoint, cur.lane, cur.speed_bin)];
    out.reserve(options.size());
    for (DiscreteState next : options) {
      next.wear_bin = cur.wear_bin;
      next.time = cur.time + next.time;
      if (other != nullptr && collision_excluded(next, *other, config_.min_sep_time)) continue;
      out.push_back(next);
    }
    return out;
  }

  double lane_term(const DiscreteState& d) const {
    const double diff = lanes_[static_cast<std::size_t>(d.checkpoint)] - d.lane;
    return diff * diff;
  }

  void apply(GameState& s, int p, const DiscreteState& next) const {
    s.line[p].states.push_back(next);
    s.line[p].cost += lane_term(next);
  }

  void undo(GameState& s, int p) const {
    s.line[p].cost -= lane_term(s.line[p].states.back());
    s.line[p].states.pop_back();
  }

  double value(const GameState& s) const {
    double v = 0.0;
    if (config_.mode == CostMode::RacelineDistance) {
      v = s.line[0].cost - (two_player_ ? s.line[1].cost : 0.0);
    } else {
      v = s.line[0].current().time - (two_player_ ? s.line[1].current().time : 0.0);
    }
    if (s.stuck == 0) v += config_.stuck_penalty;
    if (s.stuck == 1) v -= config_.stuck_penalty;
    return v;
  }

  /// Exact minimax value by alpha-beta; player 0 minimizes.
  double solve(GameState& s, double alpha, double beta) const {
    if (terminal(s)) return value(s);
    if (!two_player_) {
      // Alone, cost and time only grow, so the partial value bounds the final one.
      const double bound = value(s);
      if (bound >= beta) return bound;
    }
    const int p = mover(s);
    const std::vector<DiscreteState> ms = moves(s, p);
    if (ms.empty()) {
      s.stuck = p;
      const double v = value(s);
      s.stuck = -1;
      return v;
    }
    double best = p == 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    for (const DiscreteState& m : ms) {
      apply(s, p, m);
      const double v = solve(s, alpha, beta);
      undo(s, p);
      if (p == 0) {
        best = std::min(best, v);
        beta = std::min(beta, v);
      } else {
        best = std::max(best, v);
        alpha = std::max(alpha, v);
      }
      if (alpha >= beta) break;
    }
    return best;
  }

  /// First move achieving the exact value of the position.
  std::optional<DiscreteState> best_move(GameState& s) const {
    const int p = mover(s);
    std::optional<DiscreteState> best;
    double best_v = 0.0;
    for (const DiscreteState& m : moves(s, p)) {
      apply(s, p, m);
      const double v = solve(s, -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity());
      undo(s, p);
      if (!best || (p == 0 ? v < best_v : v > best_v)) {
        best = m;
        best_v = v;
      }
    }
    return best;
  }

  /// Steers toward the optimal lane while holding speed.
  std::optional<DiscreteState> greedy_move(const GameState& s) const {
    const int p = mover(s);
    const DiscreteState& cur = s.line[p].current();
    std::optional<DiscreteState> best;
    std::pair<int, int> best_key{0, 0};
    for (const DiscreteState& m : moves(s, p)) {
      const std::pair<int, int> key{std::abs(lanes_[static_cast<std::size_t>(m.checkpoint)] - m.lane),
                                    std::abs(m.speed_bin - cur.speed_bin)};
      if (!best || key < best_key) {
        best = m;
        best_key = key;
      }
    }
    return best;
  }

  double rollout(GameState s) const {
    while (!terminal(s)) {
      const std::optional<DiscreteState> m = greedy_move(s);
      if (!m) {
        s.stuck = mover(s);
        break;
      }
      apply(s, mover(s), *m);
    }
    return value(s);
  }

 private:
  std::size_t cell(int checkpoint, int lane, int bin) const {
    return static_cast<std::size_t>((checkpoint * lattice_.n_lanes() + lane) * config_.bins.count + bin);
  }

  const CheckpointLattice& lattice_;
  std::span<const int> lanes_;
  const PlannerConfig& config_;
  bool two_player_;
  int target_;
  std::vector<std::vector<DiscreteState>> table_;
};

struct Node {
  int parent = -1;
  DiscreteState move;  // move that led here
  int mover = 0;       // player choosing at this node
  bool initialized = false;
  bool solved = false;
  bool tail = false;  // solved by the exact tail search, no children
  double exact = 0.0;
  int visits = 0;
  double total = 0.0;
  std::vector<DiscreteState> untried;
  std::vector<int> children;
};

class Search {
 public:
  Search(const Game& game, const PlannerConfig& config, std::uint64_t seed)
      : game_(game), config_(config), rng_(seed) {}

  std::vector<Node> nodes;

  void run(const GameState& root, int budget, int& iterations) {
    nodes.assign(1, Node{});
    GameState scratch = root;
    init(0, scratch);
    for (iterations = 0; iterations < budget && !nodes[0].solved; ++iterations) iterate(root);
  }

 private:
  void observe(double v) {
    lo_ = std::min(lo_, v);
    hi_ = std::max(hi_, v);
  }

  void init(int n, GameState& s) {
    Node& node = nodes[static_cast<std::size_t>(n)];
    node.initialized = true;
    if (game_.terminal(s)) {
      node.solved = true;
      node.exact = game_.value(s);
      return;
    }
    node.mover = game_.mover(s);
    if (game_.remaining_plies(s) <= config_.exact_tail_plies) {
      node.solved = true;
      node.tail = true;
      node.exact =
          game_.solve(s, -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity());
      return;
    }
    node.untried = game_.moves(s, node.mover);
    if (node.untried.empty()) {
      s.stuck = node.mover;
      node.solved = true;
      node.exact = game_.value(s);
      s.stuck = -1;
      return;
    }
    std::reverse(node.untried.begin(), node.untried.end());  // pop_back yields generation order
  }

  int select(int n) {
    const Node& node = nodes[static_cast<std::size_t>(n)];
    const double span = hi_ > lo_ ? hi_ - lo_ : 1.0;
    const double log_n = std::log(static_cast<double>(std::max(node.visits, 1)));
    int best = -1;
    double best_score = -std::numeric_limits<double>::infinity();
    int ties = 0;
    for (int c : node.children) {
      const Node& child = nodes[static_cast<std::size_t>(c)];
      if (child.solved) continue;
      const double q = (child.total / child.visits - lo_) / span;
      const double exploit = node.mover == 0 ? 1.0 - q : q;
      const double score = exploit + config_.exploration * std::sqrt(log_n / child.visits);
      if (score > best_score) {
        best_score = score;
        best = c;
        ties = 1;
      } else if (score == best_score) {
        // reservoir choice among equal scores
        ++ties;
        if (std::uniform_int_distribution<int>(1, ties)(rng_) == 1) best = c;
      }
    }
    return best;
  }

  void iterate(const GameState& root) {
    GameState s = root;
    int n = 0;
    while (true) {
      Node& node = nodes[static_cast<std::size_t>(n)];
      if (node.solved) break;
      if (!node.untried.empty()) {
        const DiscreteState m = node.untried.back();
        node.untried.pop_back();
        const int mover = node.mover;
        Node child;
        child.parent = n;
        child.move = m;
        const int c = static_cast<int>(nodes.size());
        nodes.push_back(std::move(child));
        nodes[static_cast<std::size_t>(n)].children.push_back(c);
        game_.apply(s, mover, m);
        init(c, s);
        n = c;
        break;
      }
      const int c = select(n);
      if (c < 0) break;  // every child solved; resolved during backup
      game_.apply(s, node.mover, nodes[static_cast<std::size_t>(c)].move);
      n = c;
    }

    Node& leaf = nodes[static_cast<std::size_t>(n)];
    const double v = leaf.solved ? leaf.exact : game_.rollout(s);
    observe(v);
    for (int k = n; k >= 0; k = nodes[static_cast<std::size_t>(k)].parent) {
      Node& node = nodes[static_cast<std::size_t>(k)];
      ++node.visits;
      node.total += v;
      if (!node.solved) try_solve(node);
    }
  }

  void try_solve(Node& node) {
    if (!node.untried.empty() || node.children.empty()) return;
    double best = node.mover == 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    for (int c : node.children) {
      const Node& child = nodes[static_cast<std::size_t>(c)];
      if (!child.solved) return;
      best = node.mover == 0 ? std::min(best, child.exact) : std::max(best, child.exact);
    }
    node.solved = true;
    node.exact = best;
  }

  const Game& game_;
  const PlannerConfig& config_;
  std::mt19937_64 rng_;
  double lo_ = std::numeric_limits<double>::infinity();
  double hi_ = -std::numeric_limits<double>::infinity();
};

}  // namespace

Plan plan(const GameNode& root, const TrackModel& track, std::span<const int> optimal_lanes,
          const PlannerConfig& config, std::uint64_t seed) {
  config.validate();
  const int k = track.checkpoint_count();
  if (optimal_lanes.size() != static_cast<std::size_t>(k)) throw ConfigError("lane table size mismatch");
  if (config.horizon > k) throw ConfigError("planner horizon exceeds the checkpoint count");
  const auto check = [&](const DiscreteState& d) {
    if (d.checkpoint < 0 || d.checkpoint >= k || d.lane < 0 || d.lane >= track.n_lanes() || d.speed_bin < 0 ||
        d.speed_bin >= config.bins.count) {
      throw ConfigError("discrete state out of range");
    }
  };
  check(root.me);
  if (root.opp) check(*root.opp);

  GameState start;
  start.line[0].states = {root.me};
  int opp_progress = 0;
  if (root.opp) {
    int d = ((root.opp->checkpoint - root.me.checkpoint) % k + k) % k;
    if (d > k / 2) d -= k;
    opp_progress = d;
    start.line[1].base = d;
    start.line[1].states = {*root.opp};
  }
  const int target = std::max(0, opp_progress) + config.horizon;

  const CheckpointLattice lattice(track);
  const Game game(lattice, optimal_lanes, config, root.opp.has_value(), target);
  Search search(game, config, seed);
  Plan result;
  result.root = root;
  search.run(start, config.budget, result.iterations);
  result.solved = search.nodes[0].solved;

  // Extract the line of play.
  GameState s = start;
  int n = 0;
  while (!game.terminal(s)) {
    const int p = game.mover(s);
    std::optional<DiscreteState> m;
    if (n >= 0 && !search.nodes[static_cast<std::size_t>(n)].children.empty()) {
      const Node& node = search.nodes[static_cast<std::size_t>(n)];
      int pick = -1;
      for (int c : node.children) {
        const Node& child = search.nodes[static_cast<std::size_t>(c)];
        if (node.solved) {
          if (child.solved && child.exact == node.exact) {
            pick = c;
            break;
          }
        } else if (pick < 0 || child.visits > search.nodes[static_cast<std::size_t>(pick)].visits) {
          pick = c;
        }
      }
      if (pick >= 0) {
        m = search.nodes[static_cast<std::size_t>(pick)].move;
        n = pick;
      } else {
        m = game.greedy_move(s);
        n = -1;
      }
    } else {
      if (n >= 0 && search.nodes[static_cast<std::size_t>(n)].tail) {
        m = game.best_move(s);
      } else {
        m = game.greedy_move(s);
      }
      n = (m && n >= 0 && search.nodes[static_cast<std::size_t>(n)].tail) ? n : -1;
    }
    if (!m) {
      s.stuck = p;
      break;
    }
    game.apply(s, p, *m);
  }

  result.me.assign(s.line[0].states.begin() + 1, s.line[0].states.end());
  if (root.opp) result.opp.assign(s.line[1].states.begin() + 1, s.line[1].states.end());
  result.value = game.value(s);

  if (s.stuck == 0) {
    // Stay-in-lane continuation at constant speed, ignoring limits and exclusions.
    result.degraded = true;
    DiscreteState cur = s.line[0].current();
    const double v = config.bins.midpoint(cur.speed_bin);
    for (int p = s.line[0].progress(); p < target; ++p) {
      DiscreteState next = cur;
      next.checkpoint = (cur.checkpoint + 1) % k;
      next.time = cur.time + (lattice.point(next.checkpoint, cur.lane) - lattice.point(cur.checkpoint, cur.lane)).norm() / v;
      result.me.push_back(next);
      cur = next;
    }
  }
  return result;
}

}  // namespace h2h
