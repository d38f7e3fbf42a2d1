#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "h2h/errors.hpp"
#include "h2h/lqr.hpp"
#include "h2h/observation.hpp"
#include "h2h/policy_net.hpp"
#include "h2h/ppo.hpp"
#include "h2h/raceline.hpp"
#include "h2h/reward.hpp"

namespace h2h {
namespace {

const TrackModel& oval() {
  static const TrackModel t = make_oval(12.0, 5.0, 1.0);
  return t;
}

const Raceline& oval_raceline() {
  static const Raceline r = compute_raceline(oval());
  return r;
}

// ---------------------------------------------------------------- observation

TEST(Observation, AtRestOnRacelineWithCoincidentOpponent) {
  const Raceline& rl = oval_raceline();
  const std::size_t i = 40;
  const Vec2 p = rl.path.vertices()[i];
  const double heading = rl.path.heading_at(rl.path.arclength()[i]);
  const VehicleState self{p.x(), p.y(), heading, 0.0, 0.0, 0.0};
  const Observation o = build_observation(self, &self, oval(), rl, {}, LidarScan{});
  for (std::size_t k = 0; k < 7; ++k) EXPECT_NEAR(o[k], 0.0, 1e-9) << k;
}

TEST(Observation, TargetOneCheckpointAheadInSameLane) {
  const SpeedBins bins;
  const VehicleState self{0.0, -5.0, 0.0, 1.0, 0.0, 0.0};
  const DiscreteState target{1, 1, 2, 0, 0.0};
  const TargetEncoding t = encode_target(self, oval(), target, bins);
  EXPECT_NEAR(t.lane_offset, 0.0, 1e-12);
  EXPECT_EQ(t.speed, bins.midpoint(2));
  EXPECT_NEAR(t.distance, oval().checkpoints()[1], 1e-9);
  const DiscreteState left{1, 0, 0, 0, 0.0};
  EXPECT_NEAR(encode_target(self, oval(), left, bins).lane_offset, oval().lane_width(), 1e-12);
}

TEST(Observation, FieldByFieldRecomputation) {
  const Raceline& rl = oval_raceline();
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> s(0.0, oval().length()), e(-0.9, 0.9), h(-0.5, 0.5), v(0, 5);
  for (int i = 0; i < 200; ++i) {
    const Pose2 a = from_frenet({s(rng), e(rng), h(rng)}, oval().centerline());
    const Pose2 b = from_frenet({s(rng), e(rng), h(rng)}, oval().centerline());
    const VehicleState self{a.position.x(), a.position.y(), a.heading, v(rng), 0.1, -0.2};
    const VehicleState opp{b.position.x(), b.position.y(), b.heading, 0, 0, 0};
    const LidarScan scan = cast_lidar(a.position, a.heading, oval(), nullptr);
    const TargetEncoding t{0.3, 2.0, 5.0};
    const Observation o = build_observation(self, &opp, oval(), rl, t, scan);
    const FrenetPose f = frenet(a.position, a.heading, rl.path, 4.0);
    const double dx = opp.x - self.x, dy = opp.y - self.y;
    EXPECT_EQ(o[obs::kVx], self.vx);
    EXPECT_EQ(o[obs::kVy], self.vy);
    EXPECT_EQ(o[obs::kOmega], self.omega);
    EXPECT_NEAR(o[obs::kRacelineE1], f.e1, 1e-12);
    EXPECT_NEAR(o[obs::kRacelineE2], f.e2, 1e-12);
    EXPECT_NEAR(o[obs::kOpponentX], std::cos(self.phi) * dx + std::sin(self.phi) * dy, 1e-12);
    EXPECT_NEAR(o[obs::kOpponentY], -std::sin(self.phi) * dx + std::cos(self.phi) * dy, 1e-12);
    EXPECT_EQ(o[obs::kTargetLaneOffset], 0.3);
    EXPECT_EQ(o[obs::kTargetSpeed], 2.0);
    EXPECT_EQ(o[obs::kTargetDistance], 5.0);
    for (std::size_t j = 0; j < kLidarRays; ++j) {
      EXPECT_EQ(o[obs::kLidar + j], scan.readings[j].distance);
      EXPECT_GT(o[obs::kLidar + j], 0.0);
      EXPECT_LE(o[obs::kLidar + j], LidarConfig{}.max_range);
    }
    for (double x : o) EXPECT_TRUE(std::isfinite(x));
  }
}

TEST(Observation, NoOpponentZeroesRelativeBlock) {
  const VehicleState self{0.0, -5.0, 0.0, 1.0, 0.0, 0.0};
  const Observation o = build_observation(self, nullptr, oval(), oval_raceline(), {}, LidarScan{});
  EXPECT_EQ(o[obs::kOpponentX], 0.0);
  EXPECT_EQ(o[obs::kOpponentY], 0.0);
  EXPECT_EQ(o.size(), 42u);
  EXPECT_EQ(obs::kLidar + kLidarRays, kObservationSize);
}

// --------------------------------------------------------------------- reward

StepContext quiet() {
  StepContext c;
  for (auto& r : c.scan.readings) r = {5.0, HitClass::None};
  c.speed = 3.0;
  c.target_speed = 2.0;
  c.throttle = 0.5;
  return c;
}

TEST(Reward, CrossingThroughTargetAtSpeed) {
  const RewardConfig cfg;
  StepContext c = quiet();
  c.crossed_checkpoint = true;
  c.target_distance = 0.0;
  c.speed_in_target_window = true;
  c.interval = 0.8;
  EXPECT_NEAR(compute_reward(c, cfg).total(), 2.0 * cfg.k_target - cfg.k_time * 0.8, 1e-12);
  c.speed_in_target_window = false;
  c.target_distance = 0.5;
  EXPECT_NEAR(compute_reward(c, cfg).total(), cfg.k_target * std::exp(-0.5) - cfg.k_time * 0.8, 1e-12);
}

TEST(Reward, QuietMidSegmentStepIsZero) {
  EXPECT_EQ(compute_reward(quiet(), RewardConfig{}).total(), 0.0);
}

TEST(Reward, WallRaysCountWithConjunction) {
  const RewardConfig cfg;
  for (int n = 0; n <= 9; ++n) {
    StepContext c = quiet();
    for (int i = 0; i < n; ++i) c.scan.readings[cfg.monitored_rays[static_cast<std::size_t>(i)]] = {0.2, HitClass::Wall};
    // Close but unclassified, classified but far, and unmonitored rays never count.
    c.scan.readings[1] = {0.1, HitClass::Wall};
    if (n < 9) c.scan.readings[cfg.monitored_rays[8]] = {0.9, HitClass::Wall};
    EXPECT_NEAR(compute_reward(c, cfg).wall, -n * cfg.k_wall_hit, 1e-12) << n;
  }
  StepContext c = quiet();
  c.scan.readings[0] = {0.1, HitClass::None};
  EXPECT_EQ(compute_reward(c, cfg).wall, 0.0);
}

TEST(Reward, OpponentFrontRaysCarryExtraPenalty) {
  const RewardConfig cfg;
  StepContext c = quiet();
  c.scan.readings[16] = {0.25, HitClass::Opponent};
  c.scan.readings[4] = {0.25, HitClass::Opponent};
  EXPECT_NEAR(compute_reward(c, cfg).opponent, -2 * cfg.k_opp1 - cfg.k_opp2, 1e-12);
}

TEST(Reward, SwerveOnlyOnStraightLaneChange) {
  const RewardConfig cfg;
  StepContext c = quiet();
  c.crossed_checkpoint = true;
  c.lane_changed = true;
  EXPECT_EQ(compute_reward(c, cfg).swerve, 0.0);
  c.straight_checkpoint = true;
  EXPECT_EQ(compute_reward(c, cfg).swerve, -cfg.k_swerve);
}

TEST(Reward, BrakeAndSlip) {
  const RewardConfig cfg;
  StepContext c = quiet();
  c.speed = 1.0;
  c.throttle = 0.0;
  c.slip = {0.1, -0.2};
  EXPECT_NEAR(compute_reward(c, cfg).brake_slip, -cfg.k_brake - cfg.k_slip * 0.05, 1e-12);
  c.throttle = 0.1;
  EXPECT_NEAR(compute_reward(c, cfg).brake_slip, -cfg.k_slip * 0.05, 1e-12);
}

TEST(Reward, ConstraintTermUsesPenalty) {
  StepContext c = quiet();
  c.residuals = {0.0, 0.3};
  EXPECT_NEAR(compute_reward(c, RewardConfig{}).constraint, -0.09, 1e-12);
}

TEST(Reward, BoundedPerStep) {
  const RewardConfig cfg;
  const double bound = reward_bound(cfg, 5.0, 2.0, 0.4);
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0, 1);
  std::bernoulli_distribution coin(0.5);
  for (int i = 0; i < 20000; ++i) {
    StepContext c;
    c.crossed_checkpoint = coin(rng);
    c.target_distance = 3.0 * u(rng);
    c.speed_in_target_window = coin(rng);
    c.interval = 5.0 * u(rng);
    c.straight_checkpoint = coin(rng);
    c.lane_changed = coin(rng);
    for (auto& r : c.scan.readings) r = {0.5 * u(rng), coin(rng) ? HitClass::Wall : HitClass::Opponent};
    c.speed = 4 * u(rng);
    c.target_speed = 4 * u(rng);
    c.throttle = 2 * u(rng) - 1;
    c.slip = {(std::numbers::pi / 2 + 0.4) * (2 * u(rng) - 1), (std::numbers::pi / 2) * (2 * u(rng) - 1)};
    c.residuals = {2 * u(rng), 2 * u(rng)};
    EXPECT_LE(std::abs(compute_reward(c, cfg).total()), bound);
  }
}

TEST(Reward, ConfigValidation) {
  RewardConfig c;
  c.k_slip = -1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = RewardConfig{};
  c.front_rays = {40};
  EXPECT_THROW(c.validate(), ConfigError);
}

// ----------------------------------------------------------------- policy net

TEST(PolicyNet, ZeroParametersGiveZeroControl) {
  const PolicyNet net(5, {4, 3});
  const std::vector<double> x{1, -2, 3, 0.5, 0.1};
  const Control u = net.forward(x);
  EXPECT_EQ(u.throttle, 0.0);
  EXPECT_EQ(u.steer, 0.0);
}

TEST(PolicyNet, OutputsInsideBoxForWildParameters) {
  PolicyNet net(5, {6, 6}, 0.35);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> big(0.0, 50.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> p(net.parameter_count());
    for (double& v : p) v = big(rng);
    net.set_params(p);
    std::vector<double> x(5);
    for (double& v : x) v = big(rng);
    const Control u = net.forward(x);
    EXPECT_LE(std::abs(u.throttle), 1.0);
    EXPECT_LE(std::abs(u.steer), 0.35);
    EXPECT_EQ(net.forward(x), u);
  }
}

TEST(PolicyNet, ParameterCountIsLayerFunction) {
  EXPECT_EQ(PolicyNet::parameter_count(5, {4, 3}), (4u * 6) + (3u * 5) + 3u * 4);
  const PolicyNet std_net = PolicyNet::standard();
  EXPECT_EQ(std_net.input_size(), 42);
  EXPECT_EQ(std_net.hidden(), std::vector<int>(8, 128));
  EXPECT_EQ(std_net.parameter_count(), 128u * 43 + 7u * 128 * 129 + 3u * 129);
}

TEST(PolicyNet, LengthMismatchesThrow) {
  PolicyNet net(5, {4});
  EXPECT_THROW(net.set_params(std::vector<double>(3)), ConfigError);
  EXPECT_THROW(net.forward(std::vector<double>(4)), ConfigError);
}

TEST(PolicyNet, GradientsMatchFiniteDifferences) {
  PolicyNet net(4, {5, 3});
  net.initialize(7);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 0.5);
  for (double& p : net.params()) p += n(rng);
  const std::vector<double> x{0.3, -0.7, 1.1, 0.2};
  const double gt = 0.7, gs = -1.3, gv = 0.4;
  std::vector<double> grad(net.parameter_count(), 0.0);
  net.backward(x, gt, gs, gv, grad);
  const auto f = [&](const PolicyNet& m) {
    const PolicyOutput o = m.evaluate(x);
    return gt * o.throttle + gs * o.steer + gv * o.value;
  };
  for (std::size_t i = 0; i < grad.size(); ++i) {
    PolicyNet up = net, down = net;
    const double h = 1e-6;
    up.params()[i] += h;
    down.params()[i] -= h;
    const double fd = (f(up) - f(down)) / (2 * h);
    EXPECT_NEAR(grad[i], fd, 1e-4 * std::max(std::abs(fd), 1e-3)) << i;
  }
}

TEST(PolicyNet, CheckpointRoundTrip) {
  PolicyNet net(6, {5, 4}, 0.3);
  net.initialize(11);
  const auto path = std::filesystem::temp_directory_path() / "h2h_policy_roundtrip.bin";
  save_policy(net, path.string());
  const PolicyNet back = load_policy(path.string());
  EXPECT_EQ(back.input_size(), 6);
  EXPECT_EQ(back.hidden(), net.hidden());
  EXPECT_EQ(back.delta_max(), 0.3);
  ASSERT_EQ(back.parameter_count(), net.parameter_count());
  for (std::size_t i = 0; i < net.parameter_count(); ++i) EXPECT_EQ(back.params()[i], net.params()[i]);
  {
    std::ofstream bad(path, std::ios::binary);
    bad << "NOTAPOLICY";
  }
  EXPECT_THROW(load_policy(path.string()), ConfigError);
  std::filesystem::remove(path);
}

// ------------------------------------------------------------------------ ppo

TEST(Ppo, ClippedSurrogateGradient) {
  // Ratio above the band with positive advantage: no push further out.
  EXPECT_EQ(clipped_surrogate(1.5, 2.0, 0.2).d_ratio, 0.0);
  EXPECT_DOUBLE_EQ(clipped_surrogate(1.5, 2.0, 0.2).objective, 1.2 * 2.0);
  // Ratio below the band with negative advantage: likewise.
  EXPECT_EQ(clipped_surrogate(0.5, -1.0, 0.2).d_ratio, 0.0);
  // Inside the band the gradient is the advantage.
  EXPECT_EQ(clipped_surrogate(1.1, 2.0, 0.2).d_ratio, 2.0);
  // Outside the band on the recovering side the gradient remains.
  EXPECT_EQ(clipped_surrogate(1.5, -1.0, 0.2).d_ratio, -1.0);
  EXPECT_EQ(clipped_surrogate(0.5, 3.0, 0.2).d_ratio, 3.0);
}

TEST(Ppo, GaeMatchesRecursion) {
  const std::vector<double> r{1.0, 0.5, -0.2, 0.3, 0.8};
  const std::vector<double> v{0.2, 0.1, 0.4, -0.1, 0.3};
  const std::vector<std::uint8_t> d{0, 0, 1, 0, 0};
  const double boot = 0.6, g = 0.9, l = 0.8;
  std::vector<double> adv, ret;
  compute_gae(r, v, d, boot, g, l, adv, ret);
  std::vector<double> want(5);
  double next_adv = 0.0;
  for (int t = 4; t >= 0; --t) {
    const auto i = static_cast<std::size_t>(t);
    const double next_v = t == 4 ? boot : v[i + 1];
    const double nonterminal = d[i] ? 0.0 : 1.0;
    const double delta = r[i] + g * next_v * nonterminal - v[i];
    next_adv = delta + g * l * nonterminal * next_adv;
    want[i] = next_adv;
  }
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_NEAR(adv[i], want[i], 1e-12);
    EXPECT_NEAR(ret[i], want[i] + v[i], 1e-12);
  }
}

TEST(Ppo, AdamFirstStepHasLearningRateMagnitude) {
  Adam adam(3, 0.01);
  std::vector<double> p{1.0, 2.0, 3.0};
  const std::vector<double> g{0.5, -4.0, 1e-3};
  adam.step(p, g);
  EXPECT_NEAR(p[0], 1.0 - 0.01, 1e-6);
  EXPECT_NEAR(p[1], 2.0 + 0.01, 1e-6);
  EXPECT_NEAR(p[2], 3.0 - 0.01, 1e-4);
}

TEST(Ppo, AblationFlagsShapePhysics) {
  const CurriculumSchedule sched;
  PpoConfig cfg;
  const EnvPhysicsConfig full = rollout_physics(0.0, sched, cfg);
  EXPECT_EQ(full.lambda1, sched.lambda1_0);
  EXPECT_NE(full.tires, sched.base_tires);
  cfg.curriculum = false;
  cfg.cbf = false;
  const EnvPhysicsConfig off = rollout_physics(0.0, sched, cfg);
  EXPECT_EQ(off.tires, sched.base_tires);
  EXPECT_EQ(off.lambda1, 0.0);
  EXPECT_EQ(off.lambda2, 0.0);
}

PpoConfig tiny_ppo(int iterations) {
  PpoConfig cfg;
  cfg.iterations = iterations;
  cfg.steps_per_iteration = 64;
  cfg.minibatch = 32;
  cfg.epochs = 2;
  return cfg;
}

TEST(Ppo, ZeroLearningRateKeepsParameters) {
  CorridorEnv env;
  PolicyNet net(env.observation_size(), {8}, env.delta_max());
  net.initialize(3);
  PpoConfig cfg = tiny_ppo(3);
  cfg.learning_rate = 0.0;
  const TrainResult r = train(env, net, CurriculumSchedule{}, cfg, 5);
  ASSERT_EQ(r.net.parameter_count(), net.parameter_count());
  for (std::size_t i = 0; i < net.parameter_count(); ++i) EXPECT_EQ(r.net.params()[i], net.params()[i]);
  EXPECT_EQ(r.trace.size(), 3u);
  EXPECT_EQ(r.total_steps, 3 * 64);
}

TEST(Ppo, SameSeedSameTrace) {
  const auto run = [] {
    CorridorEnv env;
    PolicyNet net(env.observation_size(), {8}, env.delta_max());
    net.initialize(3);
    return train(env, net, CurriculumSchedule{}, tiny_ppo(4), 21);
  };
  const TrainResult a = run();
  const TrainResult b = run();
  ASSERT_EQ(a.trace.size(), b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    EXPECT_EQ(a.trace[i].mean_reward, b.trace[i].mean_reward);
    EXPECT_EQ(a.trace[i].wall_contacts, b.trace[i].wall_contacts);
  }
  for (std::size_t i = 0; i < a.net.parameter_count(); ++i) EXPECT_EQ(a.net.params()[i], b.net.params()[i]);
}

TEST(Ppo, TraceCarriesScheduleColumns) {
  CorridorEnv env;
  PolicyNet net(env.observation_size(), {4}, env.delta_max());
  CurriculumSchedule sched;
  sched.t_start = 0.0;
  sched.t_end = 256.0;
  PpoConfig cfg = tiny_ppo(5);
  const TrainResult r = train(env, net, sched, cfg, 1);
  EXPECT_EQ(r.trace.front().t_s, 0.0);
  EXPECT_EQ(r.trace.back().t_s, 1.0);
  EXPECT_EQ(r.trace.back().lambda1, 0.0);
  cfg.cbf = false;
  for (const TraceRow& row : train(env, net, sched, cfg, 1).trace) {
    EXPECT_EQ(row.lambda1, 0.0);
    EXPECT_EQ(row.lambda2, 0.0);
  }
}

// ------------------------------------------------------------------------ lqr

TEST(Lqr, RiccatiFixedPoint) {
  const VehicleParams p = VehicleParams::reference();
  const LqrConfig cfg;
  for (double v : {0.5, 2.0, 6.0}) {
    const LateralModel d = discretize_bilinear(lateral_error_model(v, p, p.tires()), cfg.dt);
    const DareSolution a = solve_dare(d, cfg.q, cfg.r, cfg.max_iterations, cfg.tolerance);
    ASSERT_TRUE(a.converged);
    const DareSolution b = solve_dare(d, cfg.q, cfg.r, 10 * a.iterations, 0.0);
    EXPECT_LT((a.K - b.K).cwiseAbs().maxCoeff(), 1e-8 * std::max(1.0, b.K.cwiseAbs().maxCoeff()));
    // Closed loop is stable.
    const Matrix4 closed = d.A - d.B * a.K;
    EXPECT_LT(closed.eigenvalues().cwiseAbs().maxCoeff(), 1.0);
  }
}

TEST(Lqr, OnRacelineIsFeedforwardOnly) {
  const Raceline& rl = oval_raceline();
  const LqrTracker tracker(rl, VehicleParams::reference());
  for (std::size_t i : {10u, 60u, 120u}) {
    const double s = rl.path.arclength()[i];
    const Vec2 p = rl.path.vertices()[i];
    const TrackingError probe = tracking_error({p.x(), p.y(), rl.path.heading_at(s), 2.0, 0.0, 0.0}, rl);
    const VehicleState st{p.x(), p.y(), rl.path.heading_at(s), 2.0, 0.0, probe.curvature * 2.0};
    const TrackingError err = tracking_error(st, rl);
    EXPECT_LT(err.x.cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_NEAR(tracker.control(st, 2.0).steer, tracker.feedforward(2.0, err.curvature), 1e-9);
  }
}

TEST(Lqr, LateralOffsetIsOpposed) {
  const TrackModel straight = make_oval(200.0, 10.0, 1.0);
  RacelineOptions opt;
  opt.iterations = 0;
  const Raceline rl = compute_raceline(straight, opt);
  const LqrTracker tracker(rl, VehicleParams::reference());
  EXPECT_LT(tracker.control({0.0, -10.0 + 0.3, 0.0, 2.0, 0.0, 0.0}, 2.0).steer, 0.0);
  EXPECT_GT(tracker.control({0.0, -10.0 - 0.3, 0.0, 2.0, 0.0, 0.0}, 2.0).steer, 0.0);
  // Shifting the reference by the same offset removes the correction.
  EXPECT_NEAR(tracker.control({0.0, -10.0 + 0.3, 0.0, 2.0, 0.0, 0.0}, 2.0, 0.3).steer, 0.0, 1e-9);
}

TEST(Lqr, SpeedProfileRespectsLateralLimit) {
  const Raceline& rl = oval_raceline();
  LqrConfig cfg;
  const LqrTracker tracker(rl, VehicleParams::reference(), cfg);
  for (std::size_t i = 0; i < rl.path.size(); i += 7) {
    const double v = tracker.profile_speed(rl.path.arclength()[i]);
    EXPECT_LE(v * v * std::abs(rl.curvature[i]), cfg.max_lateral_accel * (1 + 1e-9));
  }
}

}  // namespace
}  // namespace h2h
