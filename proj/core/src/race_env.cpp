#include "h2h/race_env.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "h2h/errors.hpp"

namespace h2h {

void RaceConfig::validate() const {
  if (!(dt > 0.0 && dt <= kMaxStepDt)) throw ConfigError("race dt must lie in (0, 0.05]");
  if (laps < 1) throw ConfigError("races need at least one lap");
  if (max_steps < 1) throw ConfigError("max_steps must be positive");
  cbf.validate();
  reward.validate();
  bins.validate();
  if (default_speed_bin < 0 || default_speed_bin >= bins.count) throw ConfigError("default speed bin out of range");
  if (!(contact_release >= 0.0)) throw ConfigError("contact_release must be non-negative");
}

RaceEnv::RaceEnv(const TrackModel& track, const Raceline& raceline, VehicleParams params, RaceConfig config,
                 int n_agents)
    : track_(&track), raceline_(&raceline), params_(params), config_(std::move(config)), n_agents_(n_agents) {
  params_.validate();
  config_.validate();
  if (n_agents_ != 1 && n_agents_ != 2) throw ConfigError("a race has one or two cars");
  if (raceline.optimal_lanes.size() != static_cast<std::size_t>(track.checkpoint_count())) {
    throw ConfigError("raceline does not belong to this track");
  }
  physics_.tires = params_.tires();
  physics_.lambda1 = config_.cbf.lambda1_0;
  physics_.lambda2 = config_.cbf.lambda2_0;
  reset_sides(true);
}

void RaceEnv::configure(const EnvPhysicsConfig& physics) { physics_ = physics; }

bool RaceEnv::reset(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const bool left = std::bernoulli_distribution(0.5)(rng);
  reset_sides(left);
  return left;
}

void RaceEnv::reset_sides(bool agent0_left) {
  const int left_lane = 0;
  const int right_lane = track_->n_lanes() - 1;
  std::vector<VehicleState> states;
  for (int i = 0; i < n_agents_; ++i) {
    const bool left = (i == 0) == agent0_left;
    const Vec2 p = track_->centerline().to_cartesian(0.0, track_->lane_center_offset(left ? left_lane : right_lane));
    VehicleState s;
    s.x = p.x();
    s.y = p.y();
    s.phi = track_->centerline().heading_at(0.0);
    states.push_back(s);
  }
  reset_states(states);
}

void RaceEnv::reset_states(const std::vector<VehicleState>& states) {
  if (states.size() != static_cast<std::size_t>(n_agents_)) throw ConfigError("one state per car expected");
  time_ = 0.0;
  steps_ = 0;
  for (int i = 0; i < n_agents_; ++i) place(i, states[static_cast<std::size_t>(i)]);
  refresh_scans();
}

void RaceEnv::place(int i, const VehicleState& state) {
  AgentState a;
  a.vehicle = state;
  const PathProjection proj = track_->centerline().project({state.x, state.y});
  // A car exactly on the start line can project to the far end of the loop.
  a.progress = track_->length() - proj.s < 1e-6 ? 0.0 : proj.s;
  const int cp = track_->last_checkpoint(a.progress);
  a.next_checkpoint = cp + 1;
  a.crossing_times = {0.0};
  a.last_cross_lane = track_->lane_of(std::clamp(proj.e1, -track_->half_width(), track_->half_width())).value_or(0);
  agents_[static_cast<std::size_t>(i)] = a;
  agents_[static_cast<std::size_t>(i)].target = default_target(i);
}

const VehicleState* RaceEnv::opponent_of(int i) const {
  if (n_agents_ < 2) return nullptr;
  return &agents_[static_cast<std::size_t>(1 - i)].vehicle;
}

void RaceEnv::set_target(int i, const DiscreteState& target) { agents_[static_cast<std::size_t>(i)].target = target; }

DiscreteState RaceEnv::default_target(int i) const {
  const AgentState& a = agents_[static_cast<std::size_t>(i)];
  const int k = track_->checkpoint_count();
  DiscreteState t;
  t.checkpoint = ((a.next_checkpoint % k) + k) % k;
  t.lane = raceline_->optimal_lanes[static_cast<std::size_t>(t.checkpoint)];
  t.speed_bin = config_.default_speed_bin;
  t.time = a.last_cross_time;
  return t;
}

DiscreteState RaceEnv::discrete_state(int i) const {
  const AgentState& a = agents_[static_cast<std::size_t>(i)];
  const double e1 = track_->centerline().project({a.vehicle.x, a.vehicle.y}).e1;
  DiscreteState d;
  d.checkpoint = a.last_checkpoint(track_->checkpoint_count());
  d.lane = track_->lane_of(std::clamp(e1, -track_->half_width(), track_->half_width())).value_or(0);
  d.speed_bin = config_.bins.bin_of(std::hypot(a.vehicle.vx, a.vehicle.vy));
  d.time = a.last_cross_time;
  return d;
}

bool RaceEnv::done() const {
  if (steps_ >= config_.max_steps) return true;
  bool all_out = true;
  for (int i = 0; i < n_agents_; ++i) {
    const AgentState& a = agents_[static_cast<std::size_t>(i)];
    if (a.finished) return true;
    all_out = all_out && a.dnf;
  }
  return all_out;
}

void RaceEnv::refresh_scans() {
  for (int i = 0; i < n_agents_; ++i) {
    AgentState& a = agents_[static_cast<std::size_t>(i)];
    std::optional<CollisionBody> other;
    if (n_agents_ == 2) other = body_of(agents_[static_cast<std::size_t>(1 - i)].vehicle, params_);
    a.scan = cast_lidar({a.vehicle.x, a.vehicle.y}, a.vehicle.phi, *track_, other ? &*other : nullptr, config_.lidar);
  }
}

double RaceEnv::project_s(const VehicleState& state) const { return track_->centerline().project({state.x, state.y}).s; }

double RaceEnv::resolve_walls(VehicleState& state) const {
  const double w = track_->half_width();
  double first_excess = -std::numeric_limits<double>::infinity();
  for (int pass = 0; pass < 8; ++pass) {
    double worst = 0.0;
    Vec2 outward{0.0, 0.0};
    for (const Vec2& c : body_of(state, params_).corners()) {
      const PathProjection p = track_->centerline().project(c);
      const double excess = std::abs(p.e1) - w;
      if (pass == 0) first_excess = std::max(first_excess, excess);
      if (excess > worst) {
        worst = excess;
        outward = (p.e1 > 0.0 ? 1.0 : -1.0) * track_->centerline().normal_at(p.s).normalized();
      }
    }
    if (worst <= 0.0) break;
    const double shift = worst + 1e-9;
    state.x -= shift * outward.x();
    state.y -= shift * outward.y();
    Vec2 v = to_world(Vec2{state.vx, state.vy}, state.phi);
    const double out_speed = v.dot(outward);
    if (out_speed > 0.0) v -= out_speed * outward;
    const Vec2 body = to_body(v, state.phi);
    state.vx = body.x();
    state.vy = body.y();
  }
  return first_excess;
}

void RaceEnv::resolve_cars(std::array<VehicleState, 2>& states, bool& contact) const {
  const CollisionBody a = body_of(states[0], params_);
  const CollisionBody b = body_of(states[1], params_);
  const double sep = body_separation(a, b);
  contact = sep <= 0.0;
  if (!contact) return;
  const Vec2 n = contact_normal(a, b);
  const double push = 0.5 * (-sep + 1e-9);
  states[0].x -= push * n.x();
  states[0].y -= push * n.y();
  states[1].x += push * n.x();
  states[1].y += push * n.y();
  Vec2 va = to_world(Vec2{states[0].vx, states[0].vy}, states[0].phi);
  Vec2 vb = to_world(Vec2{states[1].vx, states[1].vy}, states[1].phi);
  const double closing = (va - vb).dot(n);
  if (closing > 0.0) {
    // Equal masses: both cars leave the contact with the common normal velocity.
    va -= 0.5 * closing * n;
    vb += 0.5 * closing * n;
  }
  const Vec2 ba = to_body(va, states[0].phi);
  const Vec2 bb = to_body(vb, states[1].phi);
  states[0].vx = ba.x();
  states[0].vy = ba.y();
  states[1].vx = bb.x();
  states[1].vy = bb.y();
}

StepEvents RaceEnv::step(const std::array<Control, 2>& controls) {
  StepEvents ev;
  const double t0 = time_;
  const double dt = config_.dt;
  const int k = track_->checkpoint_count();
  const double length = track_->length();
  std::array<VehicleState, 2> next{};
  std::array<SlipAngles, 2> slip{};
  std::array<double, 2> s_before{};

  for (int i = 0; i < n_agents_; ++i) {
    AgentState& a = agents_[static_cast<std::size_t>(i)];
    AgentEvents& e = ev.agent[static_cast<std::size_t>(i)];
    s_before[static_cast<std::size_t>(i)] = a.progress;
    next[static_cast<std::size_t>(i)] = a.vehicle;
    if (a.finished || a.dnf) continue;
    e.raw = clamp_control(controls[static_cast<std::size_t>(i)], params_);
    const BarrierGeometry geom = barrier_geometry(a.vehicle, *track_);
    e.residuals = constraint_residual(barrier_eval(geom, a.vehicle, e.raw, params_, physics_.tires), physics_.lambda1,
                                      physics_.lambda2, config_.cbf.literal_sign);
    e.applied = e.raw;
    if (config_.shield[static_cast<std::size_t>(i)]) {
      e.applied = filter_control(e.raw, a.vehicle, *track_, {physics_.lambda1, physics_.lambda2}, config_.cbf,
                                 params_, physics_.tires)
                      .u_safe;
    }
    slip[static_cast<std::size_t>(i)] = slip_angles(a.vehicle, e.applied.steer, params_);
    try {
      next[static_cast<std::size_t>(i)] = h2h::step(a.vehicle, e.applied, params_, physics_.tires, dt);
    } catch (const DivergenceError&) {
      a.dnf = true;
    }
  }

  bool car_contact = false;
  if (n_agents_ == 2 && !agents_[0].dnf && !agents_[1].dnf) resolve_cars(next, car_contact);

  for (int i = 0; i < n_agents_; ++i) {
    AgentState& a = agents_[static_cast<std::size_t>(i)];
    AgentEvents& e = ev.agent[static_cast<std::size_t>(i)];
    if (a.finished || a.dnf) continue;
    VehicleState& s = next[static_cast<std::size_t>(i)];
    const double excess = resolve_walls(s);
    e.wall_contact = excess > 0.0;
    if (e.wall_contact && !a.in_wall_contact) {
      e.wall_onset = true;
      ++a.wall_collisions;
    }
    if (e.wall_contact) {
      a.in_wall_contact = true;
    } else if (excess < -config_.contact_release) {
      a.in_wall_contact = false;
    }
    a.vehicle = s;
    a.progress += track_->centerline().s_difference(track_->centerline().wrap_s(a.progress), project_s(s));
  }

  if (n_agents_ == 2 && car_contact) {
    for (int i = 0; i < 2; ++i) {
      AgentState& a = agents_[static_cast<std::size_t>(i)];
      AgentEvents& e = ev.agent[static_cast<std::size_t>(i)];
      e.opponent_contact = true;
      if (!a.in_opponent_contact) {
        e.opponent_onset = true;
        ++a.opponent_contacts;
        const AgentState& o = agents_[static_cast<std::size_t>(1 - i)];
        const double ahead = track_->centerline().s_difference(track_->centerline().wrap_s(a.progress),
                                                               track_->centerline().wrap_s(o.progress));
        if (ahead > 0.0) {
          e.from_behind = true;
          ++a.from_behind_collisions;
        }
      }
    }
  }
  for (int i = 0; i < n_agents_; ++i) agents_[static_cast<std::size_t>(i)].in_opponent_contact = car_contact;

  time_ = t0 + dt;
  ++steps_;
  refresh_scans();

  for (int i = 0; i < n_agents_; ++i) {
    AgentState& a = agents_[static_cast<std::size_t>(i)];
    AgentEvents& e = ev.agent[static_cast<std::size_t>(i)];
    if (a.finished || a.dnf) continue;
    const VehicleState& s = a.vehicle;
    const double p0 = s_before[static_cast<std::size_t>(i)];
    const double speed = std::hypot(s.vx, s.vy);

    StepContext ctx;
    ctx.scan = a.scan;
    ctx.speed = speed;
    ctx.target_speed = config_.bins.lower(a.target.speed_bin);
    ctx.throttle = e.applied.throttle;
    ctx.slip = slip[static_cast<std::size_t>(i)];
    ctx.residuals = e.residuals;

    while (true) {
      const int n = a.next_checkpoint;
      const int cp = ((n % k) + k) % k;
      const double station = std::floor(static_cast<double>(n) / k) * length + track_->checkpoints()[static_cast<std::size_t>(cp)];
      if (a.progress < station) break;
      const double frac = a.progress > p0 ? std::clamp((station - p0) / (a.progress - p0), 0.0, 1.0) : 1.0;
      const double t_cross = t0 + frac * dt;
      ++e.checkpoints_crossed;
      ++a.next_checkpoint;
      a.crossing_times.push_back(t_cross);

      const double e1 = track_->centerline().project({s.x, s.y}).e1;
      const int lane = track_->lane_of(std::clamp(e1, -track_->half_width(), track_->half_width())).value_or(0);
      ctx.crossed_checkpoint = true;
      ctx.target_distance = (Vec2{s.x, s.y} - track_->lattice_point(cp, a.target.lane)).norm();
      ctx.speed_in_target_window =
          speed >= config_.bins.lower(a.target.speed_bin) && speed < config_.bins.upper(a.target.speed_bin);
      ctx.interval = t_cross - a.last_cross_time;
      ctx.straight_checkpoint = std::abs(track_->checkpoint_curvature(cp)) < config_.reward.straight_curvature;
      ctx.lane_changed = lane != a.last_cross_lane;
      a.last_cross_time = t_cross;
      a.last_cross_lane = lane;

      if (cp == 0) {
        a.lap_times.push_back(t_cross - a.lap_start_time);
        a.lap_start_time = t_cross;
        ++a.laps;
        e.lap_completed = true;
        if (a.laps >= config_.laps) {
          a.finished = true;
          a.finish_time = t_cross;
          e.finished = true;
          break;
        }
      }
    }
    if (e.checkpoints_crossed > 0) {
      const int upcoming = ((a.next_checkpoint % k) + k) % k;
      if (a.target.checkpoint != upcoming) a.target = default_target(i);
    }
    e.reward = compute_reward(ctx, config_.reward);

    a.raceline_distance_sum += std::abs(raceline_->path.project({s.x, s.y}).e1);
    ++a.raceline_samples;
  }
  return ev;
}

}  // namespace h2h
