#include "h2h/drivers.hpp"

#include <cmath>

#include "h2h/errors.hpp"

namespace h2h {

void Driver::reset(const RaceEnv&, int, std::uint64_t) {}

Control FrozenDriver::act(const RaceEnv&, int) { return {}; }

ScriptedDriver::ScriptedDriver() : ScriptedDriver(Options{}) {}

ScriptedDriver::ScriptedDriver(Options options) : options_(options) {}

void ScriptedDriver::reset(const RaceEnv& env, int self, std::uint64_t seed) {
  rng_.seed(seed);
  const VehicleState& s = env.agent(self).vehicle;
  offset_ = options_.hold_start_lane ? env.track().centerline().project({s.x, s.y}).e1 : 0.0;
}

Control ScriptedDriver::act(const RaceEnv& env, int self) {
  const VehicleState& s = env.agent(self).vehicle;
  const VehicleParams& p = env.params();
  const Path& center = env.track().centerline();
  const double s_now = center.project({s.x, s.y}).s;
  const Vec2 goal = center.to_cartesian(s_now + options_.lookahead, offset_);
  const Vec2 rel = to_body(goal - Vec2{s.x, s.y}, s.phi);
  const double d2 = std::max(rel.squaredNorm(), 1e-6);
  double steer = std::atan(2.0 * (p.lf + p.lr) * rel.y() / d2);
  const double v = options_.target_speed;
  double throttle = (p.Croll + p.Cd * v * v) / (p.Cm1 - p.Cm2 * v) + options_.kp_speed * (v - s.vx);
  if (options_.steer_noise > 0.0) steer += std::normal_distribution<double>(0.0, options_.steer_noise)(rng_);
  if (options_.throttle_noise > 0.0) throttle += std::normal_distribution<double>(0.0, options_.throttle_noise)(rng_);
  return clamp_control(Control(throttle, steer, 1e9), p);
}

LqrDriver::LqrDriver(bool hierarchical, LqrConfig config) : hierarchical_(hierarchical), config_(config) {}

void LqrDriver::reset(const RaceEnv& env, int, std::uint64_t) {
  auto& slot = trackers_[&env.raceline()];
  if (!slot) slot = std::make_unique<LqrTracker>(env.raceline(), env.params(), env.physics().tires, config_);
  tracker_ = slot.get();
}

Control LqrDriver::act(const RaceEnv& env, int self) {
  if (tracker_ == nullptr) reset(env, self, 0);
  const VehicleState& s = env.agent(self).vehicle;
  if (!hierarchical_) return tracker_->control(s, config_.v_max, 0.0);
  const DiscreteState& target = env.agent(self).target;
  const TrackModel& track = env.track();
  const double s_target = track.checkpoints()[static_cast<std::size_t>(target.checkpoint)];
  const double offset = track.lane_center_offset(target.lane) - env.raceline().offset_at(s_target);
  const double lane_offset = target.lane == env.raceline().optimal_lanes[static_cast<std::size_t>(target.checkpoint)]
                                 ? 0.0
                                 : offset;
  return tracker_->control(s, env.config().bins.midpoint(target.speed_bin), lane_offset);
}

PolicyDriver::PolicyDriver(PolicyNet net, bool hierarchical) : net_(std::move(net)), hierarchical_(hierarchical) {
  if (net_.input_size() != static_cast<int>(kObservationSize)) {
    throw ConfigError("race policies must take the 42-entry observation");
  }
}

Observation observe(const RaceEnv& env, int self, bool hierarchical) {
  const AgentState& a = env.agent(self);
  const DiscreteState target = hierarchical ? a.target : env.default_target(self);
  const TargetEncoding enc = encode_target(a.vehicle, env.track(), target, env.config().bins);
  return build_observation(a.vehicle, env.opponent_of(self), env.track(), env.raceline(), enc, a.scan);
}

Control PolicyDriver::act(const RaceEnv& env, int self) {
  const Observation o = observe(env, self, hierarchical_);
  return net_.forward(o);
}

std::unique_ptr<Driver> make_driver(const std::string& spec) {
  if (spec == "lqr") return std::make_unique<LqrDriver>(true);
  if (spec == "lqr-raceline") return std::make_unique<LqrDriver>(false);
  if (spec == "scripted") return std::make_unique<ScriptedDriver>();
  if (spec == "frozen") return std::make_unique<FrozenDriver>();
  const auto colon = spec.find(':');
  if (colon != std::string::npos) {
    const std::string kind = spec.substr(0, colon);
    const std::string path = spec.substr(colon + 1);
    if (kind == "policy") return std::make_unique<PolicyDriver>(load_policy(path), true);
    if (kind == "e2e") return std::make_unique<PolicyDriver>(load_policy(path), false);
  }
  throw ConfigError("unknown agent spec: " + spec);
}

}  // namespace h2h
