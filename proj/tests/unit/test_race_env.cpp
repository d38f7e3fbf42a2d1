#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "h2h/errors.hpp"
#include "h2h/race.hpp"

namespace h2h {
namespace {

const RaceTrack& oval_track() {
  static const RaceTrack t = [] {
    RaceTrack r{make_oval(12.0, 5.0, 1.0), {}};
    r.raceline = compute_raceline(r.track);
    return r;
  }();
  return t;
}

RaceConfig one_lap() {
  RaceConfig c;
  c.laps = 1;
  c.max_steps = 4000;
  return c;
}

TEST(RaceEnv, ResetIsSeededAndFair) {
  const RaceTrack& t = oval_track();
  RaceEnv env(t.track, t.raceline, VehicleParams::reference(), RaceConfig{});
  EXPECT_EQ(env.reset(7), env.reset(7));
  int left = 0;
  for (std::uint64_t seed = 0; seed < 10000; ++seed) left += env.reset(seed) ? 1 : 0;
  EXPECT_GE(left, 4800);
  EXPECT_LE(left, 5200);
}

TEST(RaceEnv, StartPlacesCarsOnOuterLanes) {
  const RaceTrack& t = oval_track();
  RaceEnv env(t.track, t.raceline, VehicleParams::reference(), RaceConfig{});
  env.reset_sides(true);
  EXPECT_EQ(env.discrete_state(0).lane, 0);
  EXPECT_EQ(env.discrete_state(1).lane, t.track.n_lanes() - 1);
  env.reset_sides(false);
  EXPECT_EQ(env.discrete_state(0).lane, t.track.n_lanes() - 1);
  EXPECT_EQ(env.agent(0).next_checkpoint, 1);
  EXPECT_EQ(env.agent(0).progress, 0.0);
}

TEST(RaceEnv, IdleCarsProduceNoEvents) {
  const RaceTrack& t = oval_track();
  RaceEnv env(t.track, t.raceline, VehicleParams::reference(), RaceConfig{});
  env.reset_sides(true);
  for (int i = 0; i < 200; ++i) {
    const StepEvents ev = env.step({Control{}, Control{}});
    for (const AgentEvents& e : ev.agent) {
      EXPECT_EQ(e.checkpoints_crossed, 0);
      EXPECT_FALSE(e.wall_contact);
      EXPECT_FALSE(e.opponent_contact);
    }
  }
  EXPECT_EQ(env.agent(0).wall_collisions, 0);
  EXPECT_NEAR(env.time(), 200 * kDefaultDt, 1e-9);
}

TEST(RaceEnv, CheckpointCrossedAtPredictedStep) {
  const TrackModel straight = make_oval(200.0, 10.0, 1.0);
  const Raceline rl = compute_raceline(straight);
  const VehicleParams p = VehicleParams::reference();
  RaceEnv env(straight, rl, p, RaceConfig{}, 1);
  const VehicleState start{0.0, -10.0, 0.0, 2.0, 0.0, 0.0};
  env.reset_states({start});
  const Control u(0.3, 0.0);
  // Independent prediction on the straight: the car moves along +x.
  VehicleState s = start;
  int predicted = 0;
  while (s.x < straight.checkpoints()[1]) {
    s = step(s, u, p, p.tires(), kDefaultDt);
    ++predicted;
  }
  int observed = 0;
  for (int i = 1; i <= predicted + 5; ++i) {
    if (env.step({u, Control{}}).agent[0].checkpoints_crossed > 0) {
      observed = i;
      break;
    }
  }
  EXPECT_NEAR(observed, predicted, 1);
  EXPECT_EQ(env.agent(0).crossing_times.size(), 2u);
}

TEST(RaceEnv, RearEndContactBlamesTrailingCar) {
  const TrackModel straight = make_oval(200.0, 10.0, 1.0);
  const Raceline rl = compute_raceline(straight);
  const VehicleParams p = VehicleParams::reference();
  RaceEnv env(straight, rl, p, RaceConfig{});
  env.reset_states({{0.0, -10.0, 0.0, 2.0, 0.0, 0.0}, {0.8 * p.length, -10.0, 0.0, 0.5, 0.0, 0.0}});
  const StepEvents ev = env.step({Control{}, Control{}});
  EXPECT_TRUE(ev.agent[0].opponent_onset);
  EXPECT_TRUE(ev.agent[1].opponent_onset);
  EXPECT_TRUE(ev.agent[0].from_behind);
  EXPECT_FALSE(ev.agent[1].from_behind);
  EXPECT_EQ(env.agent(0).from_behind_collisions, 1);
  EXPECT_EQ(env.agent(1).from_behind_collisions, 0);
  // The cars are pushed apart.
  EXPECT_GT(body_separation(body_of(env.agent(0).vehicle, p), body_of(env.agent(1).vehicle, p)), 0.0);
}

TEST(RaceEnv, WallContactCountsOnceUntilReleased) {
  const TrackModel straight = make_oval(200.0, 10.0, 1.0);
  const Raceline rl = compute_raceline(straight);
  RaceEnv env(straight, rl, VehicleParams::reference(), RaceConfig{}, 1);
  env.reset_states({{0.0, -10.0 + 0.95, 0.0, 1.0, 0.0, 0.0}});
  int onsets = 0;
  for (int i = 0; i < 20; ++i) onsets += env.step({Control(0.2, 0.3), Control{}}).agent[0].wall_onset ? 1 : 0;
  EXPECT_EQ(onsets, 1);
  EXPECT_EQ(env.agent(0).wall_collisions, 1);
}

TEST(RaceEnv, ControlsAreClampedToTheBox) {
  const RaceTrack& t = oval_track();
  RaceEnv env(t.track, t.raceline, VehicleParams::reference(), RaceConfig{});
  const StepEvents ev = env.step({Control(5.0, 2.0, 1e9), Control(-5.0, -2.0, 1e9)});
  EXPECT_EQ(ev.agent[0].raw.throttle, 1.0);
  EXPECT_EQ(ev.agent[0].raw.steer, 0.4);
  EXPECT_EQ(ev.agent[1].raw.throttle, -1.0);
  EXPECT_EQ(ev.agent[1].raw.steer, -0.4);
}

TEST(RaceEnv, MirroredTrackMirrorsTrajectory) {
  const TrackModel a = make_oval(12.0, 5.0, 1.0);
  const TrackModel b = a.mirrored();
  const Raceline ra = compute_raceline(a);
  const Raceline rb = compute_raceline(b);
  const VehicleParams p = VehicleParams::reference();
  RaceEnv ea(a, ra, p, RaceConfig{}, 1);
  RaceEnv eb(b, rb, p, RaceConfig{}, 1);
  const VehicleState s0{0.0, -5.0 + 0.3, 0.05, 1.0, 0.0, 0.0};
  ea.reset_states({s0});
  eb.reset_states({{s0.x, -s0.y, -s0.phi, s0.vx, -s0.vy, -s0.omega}});
  for (int i = 0; i < 300; ++i) {
    const Control u(0.4, 0.05 * std::sin(0.05 * i));
    const StepEvents xa = ea.step({u, Control{}});
    const StepEvents xb = eb.step({Control(u.throttle, -u.steer), Control{}});
    const VehicleState& va = ea.agent(0).vehicle;
    const VehicleState& vb = eb.agent(0).vehicle;
    ASSERT_NEAR(va.x, vb.x, 1e-9);
    ASSERT_NEAR(va.y, -vb.y, 1e-9);
    ASSERT_NEAR(va.phi, -vb.phi, 1e-9);
    ASSERT_NEAR(va.vy, -vb.vy, 1e-9);
    EXPECT_EQ(xa.agent[0].checkpoints_crossed, xb.agent[0].checkpoints_crossed);
    EXPECT_EQ(xa.agent[0].wall_contact, xb.agent[0].wall_contact);
  }
  EXPECT_GT(ea.agent(0).progress, 3.0);
}

TEST(RaceEnv, ConfigValidation) {
  const RaceTrack& t = oval_track();
  RaceConfig c;
  c.dt = 0.2;
  EXPECT_THROW(RaceEnv(t.track, t.raceline, VehicleParams::reference(), c), ConfigError);
  c = RaceConfig{};
  c.laps = 0;
  EXPECT_THROW(RaceEnv(t.track, t.raceline, VehicleParams::reference(), c), ConfigError);
  EXPECT_THROW(RaceEnv(t.track, t.raceline, VehicleParams::reference(), RaceConfig{}, 3), ConfigError);
  const TrackModel other = make_oval(30.0, 5.0, 1.0);
  EXPECT_THROW(RaceEnv(other, t.raceline, VehicleParams::reference(), RaceConfig{}), ConfigError);
}

TEST(Race, FrozenOpponentLoses) {
  RaceSetup setup;
  setup.race = one_lap();
  LqrDriver lqr(false);
  FrozenDriver frozen;
  const RaceResult r = run_race(lqr, frozen, oval_track(), setup, 3);
  EXPECT_EQ(r.winner, 0);
  EXPECT_TRUE(r.agents[0].finished);
  EXPECT_FALSE(r.agents[1].finished);
  EXPECT_EQ(r.agents[0].lap_times.size(), 1u);
  EXPECT_TRUE(std::isnan(r.agents[1].avg_lap_time));
  const RaceResult swapped = run_race(frozen, lqr, oval_track(), setup, 3);
  EXPECT_EQ(swapped.winner, 1);
}

TEST(Race, RacelineTrackerLapsWithoutWallContact) {
  const RaceTrack& t = oval_track();
  RaceConfig c;
  c.laps = 3;
  RaceEnv env(t.track, t.raceline, VehicleParams::reference(), c, 1);
  env.reset_sides(true);
  LqrDriver lqr(false);
  lqr.reset(env, 0, 0);
  while (!env.done()) env.step({lqr.act(env, 0), Control{}});
  EXPECT_TRUE(env.agent(0).finished);
  EXPECT_EQ(env.agent(0).laps, 3);
  EXPECT_EQ(env.agent(0).wall_collisions, 0);
}

TEST(Race, ReplayIsBitIdentical) {
  RaceSetup setup;
  setup.race = one_lap();
  auto a1 = make_driver("lqr");
  auto b1 = make_driver("scripted");
  auto a2 = make_driver("lqr");
  auto b2 = make_driver("scripted");
  std::vector<std::vector<TraceRecord>> t1, t2;
  const MatchResult m1 = run_match(*a1, *b1, {oval_track()}, 2, setup, 99, &t1);
  const MatchResult m2 = run_match(*a2, *b2, {oval_track()}, 2, setup, 99, &t2);
  EXPECT_TRUE(m1 == m2);
  ASSERT_EQ(t1.size(), t2.size());
  for (std::size_t r = 0; r < t1.size(); ++r) {
    ASSERT_EQ(t1[r].size(), t2[r].size());
    for (std::size_t i = 0; i < t1[r].size(); ++i) {
      for (int k = 0; k < 2; ++k) {
        const auto& x = t1[r][i].state[static_cast<std::size_t>(k)];
        const auto& y = t2[r][i].state[static_cast<std::size_t>(k)];
        ASSERT_EQ(x.x, y.x);
        ASSERT_EQ(x.y, y.y);
        ASSERT_EQ(x.vx, y.vx);
        ASSERT_EQ(t1[r][i].events[static_cast<std::size_t>(k)].reward.total(),
                  t2[r][i].events[static_cast<std::size_t>(k)].reward.total());
      }
    }
  }
}

TEST(Race, MatchAggregates) {
  RaceSetup setup;
  setup.race = one_lap();
  ScriptedDriver::Options slow;
  slow.target_speed = 2.0;
  ScriptedDriver a;
  ScriptedDriver b(slow);
  const MatchResult m = run_match(a, b, {oval_track()}, 20, setup, 5);
  ASSERT_EQ(m.races.size(), 20u);
  EXPECT_EQ(m.aggregate[0].wins + m.aggregate[1].wins + m.no_winner, 20);
  EXPECT_GT(m.aggregate[0].wins, m.aggregate[1].wins);
  double lap_sum = 0.0;
  int walls = 0;
  for (const RaceResult& r : m.races) {
    lap_sum += r.agents[0].avg_lap_time;
    walls += r.agents[0].wall_collisions;
  }
  EXPECT_NEAR(m.aggregate[0].avg_lap_time, lap_sum / 20.0, 1e-12);
  EXPECT_EQ(m.aggregate[0].wall_collisions, walls);
  // Seeds differ per race and sides are randomized.
  int left = 0;
  for (const RaceResult& r : m.races) left += r.agent_a_left ? 1 : 0;
  EXPECT_GT(left, 0);
  EXPECT_LT(left, 20);
  EXPECT_NE(m.races[0].seed, m.races[1].seed);
}

TEST(Race, MatchRejectsEmptyInputs) {
  ScriptedDriver a, b;
  EXPECT_THROW(run_match(a, b, {}, 2, RaceSetup{}, 1), ConfigError);
  EXPECT_THROW(run_match(a, b, {oval_track()}, 0, RaceSetup{}, 1), ConfigError);
  EXPECT_THROW(make_driver("nobody"), ConfigError);
}

TEST(RaceTraining, EpisodeStepsAndDeterminism) {
  RaceTrainingEnv::Options opt;
  opt.episode_steps = 50;
  RaceTrainingEnv env({oval_track()}, RaceSetup{}, opt);
  const std::vector<double> o1 = env.reset(4);
  EXPECT_EQ(o1.size(), kObservationSize);
  std::vector<double> rewards;
  int steps = 0;
  EnvStep s;
  do {
    s = env.step(Control(0.5, 0.0));
    rewards.push_back(s.reward);
    ++steps;
  } while (!s.done);
  EXPECT_EQ(steps, 50);
  EXPECT_EQ(env.reset(4), o1);
  for (double r : rewards) EXPECT_EQ(env.step(Control(0.5, 0.0)).reward, r);
}

}  // namespace
}  // namespace h2h
