#include "h2h/race.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

#include "h2h/errors.hpp"

namespace h2h {

PlannerConfig RaceSetup::default_race_planner() {
  PlannerConfig c;
  c.horizon = 4;
  c.budget = 150;
  c.limits.max_lateral_accel = 6.0;
  return c;
}

namespace {

bool same(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }

bool same_stats(const AgentRaceStats& a, const AgentRaceStats& b) {
  if (a.name != b.name || a.lap_times.size() != b.lap_times.size()) return false;
  for (std::size_t i = 0; i < a.lap_times.size(); ++i) {
    if (!same(a.lap_times[i], b.lap_times[i])) return false;
  }
  return same(a.avg_lap_time, b.avg_lap_time) && same(a.avg_raceline_distance, b.avg_raceline_distance) &&
         a.wall_collisions == b.wall_collisions && a.from_behind_collisions == b.from_behind_collisions &&
         a.opponent_contacts == b.opponent_contacts && a.finished == b.finished && a.dnf == b.dnf &&
         same(a.finish_time, b.finish_time);
}

bool same_aggregate(const AgentAggregate& a, const AgentAggregate& b) {
  return a.wins == b.wins && same(a.avg_lap_time, b.avg_lap_time) &&
         same(a.avg_raceline_distance, b.avg_raceline_distance) && a.wall_collisions == b.wall_collisions &&
         a.from_behind_collisions == b.from_behind_collisions;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

void replan_agent(RaceEnv& env, int i, const PlannerConfig& config, std::uint64_t seed) {
  GameNode root;
  root.me = env.discrete_state(i);
  if (env.n_agents() == 2) root.opp = env.discrete_state(1 - i);
  PlannerConfig c = config;
  c.horizon = std::min(c.horizon, env.track().checkpoint_count());
  const Plan p = plan(root, env.track(), env.raceline().optimal_lanes, c, seed);
  if (!p.me.empty()) env.set_target(i, p.me.front());
}

}  // namespace

bool RaceResult::operator==(const RaceResult& o) const {
  return seed == o.seed && track_index == o.track_index && winner == o.winner && agent_a_left == o.agent_a_left &&
         steps == o.steps && same(duration, o.duration) && same_stats(agents[0], o.agents[0]) &&
         same_stats(agents[1], o.agents[1]);
}

bool MatchResult::operator==(const MatchResult& o) const {
  return seed == o.seed && names == o.names && races == o.races && same_aggregate(aggregate[0], o.aggregate[0]) &&
         same_aggregate(aggregate[1], o.aggregate[1]) && no_winner == o.no_winner;
}

std::uint64_t race_seed(std::uint64_t match_seed, int race) {
  return splitmix64(match_seed ^ splitmix64(static_cast<std::uint64_t>(race) + 1));
}

RaceResult run_race(Driver& a, Driver& b, const RaceTrack& rt, const RaceSetup& setup, std::uint64_t seed,
                    std::vector<TraceRecord>* trace) {
  RaceEnv env(rt.track, rt.raceline, setup.params, setup.race, 2);
  std::mt19937_64 rng(seed);
  RaceResult result;
  result.seed = seed;
  result.agent_a_left = env.reset(rng());
  std::array<Driver*, 2> drivers{&a, &b};
  for (int i = 0; i < 2; ++i) drivers[static_cast<std::size_t>(i)]->reset(env, i, rng());
  const std::uint64_t plan_seed = rng();
  for (int i = 0; i < 2; ++i) {
    if (drivers[static_cast<std::size_t>(i)]->uses_planner()) replan_agent(env, i, setup.planner, plan_seed + i);
  }

  while (!env.done()) {
    const std::array<Control, 2> u{drivers[0]->act(env, 0), drivers[1]->act(env, 1)};
    const StepEvents ev = env.step(u);
    if (trace != nullptr) trace->push_back({env.time(), {env.agent(0).vehicle, env.agent(1).vehicle}, ev.agent});
    for (int i = 0; i < 2; ++i) {
      const AgentEvents& e = ev.agent[static_cast<std::size_t>(i)];
      if (e.checkpoints_crossed > 0 && !env.agent(i).finished && drivers[static_cast<std::size_t>(i)]->uses_planner()) {
        replan_agent(env, i, setup.planner, plan_seed + static_cast<std::uint64_t>(env.steps()) * 2 + i);
      }
    }
  }

  result.steps = env.steps();
  result.duration = env.time();
  for (int i = 0; i < 2; ++i) {
    const AgentState& s = env.agent(i);
    AgentRaceStats& st = result.agents[static_cast<std::size_t>(i)];
    st.name = drivers[static_cast<std::size_t>(i)]->name();
    st.lap_times = s.lap_times;
    st.avg_lap_time = s.lap_times.empty()
                          ? std::numeric_limits<double>::quiet_NaN()
                          : std::accumulate(s.lap_times.begin(), s.lap_times.end(), 0.0) / s.lap_times.size();
    st.avg_raceline_distance = s.raceline_samples > 0 ? s.raceline_distance_sum / s.raceline_samples : 0.0;
    st.wall_collisions = s.wall_collisions;
    st.from_behind_collisions = s.from_behind_collisions;
    st.opponent_contacts = s.opponent_contacts;
    st.finished = s.finished;
    st.dnf = s.dnf;
    st.finish_time = s.finish_time;
  }
  const AgentState& s0 = env.agent(0);
  const AgentState& s1 = env.agent(1);
  if (s0.finished && s1.finished) {
    result.winner = s1.finish_time < s0.finish_time ? 1 : 0;
  } else if (s0.finished) {
    result.winner = 0;
  } else if (s1.finished) {
    result.winner = 1;
  } else if (s0.dnf != s1.dnf) {
    result.winner = s0.dnf ? 1 : 0;
  }
  return result;
}

MatchResult aggregate_match(std::vector<RaceResult> races, std::array<std::string, 2> names, std::uint64_t seed) {
  MatchResult m;
  m.seed = seed;
  m.names = std::move(names);
  m.races = std::move(races);
  for (int i = 0; i < 2; ++i) {
    AgentAggregate& agg = m.aggregate[static_cast<std::size_t>(i)];
    double lap_sum = 0.0;
    int lap_races = 0;
    double dist_sum = 0.0;
    for (const RaceResult& r : m.races) {
      const AgentRaceStats& st = r.agents[static_cast<std::size_t>(i)];
      if (r.winner == i) ++agg.wins;
      if (std::isfinite(st.avg_lap_time)) {
        lap_sum += st.avg_lap_time;
        ++lap_races;
      }
      dist_sum += st.avg_raceline_distance;
      agg.wall_collisions += st.wall_collisions;
      agg.from_behind_collisions += st.from_behind_collisions;
    }
    agg.avg_lap_time = lap_races > 0 ? lap_sum / lap_races : std::numeric_limits<double>::quiet_NaN();
    agg.avg_raceline_distance = m.races.empty() ? 0.0 : dist_sum / static_cast<double>(m.races.size());
  }
  for (const RaceResult& r : m.races) {
    if (r.winner < 0) ++m.no_winner;
  }
  return m;
}

MatchResult run_match(Driver& a, Driver& b, const std::vector<RaceTrack>& tracks, int n_races, const RaceSetup& setup,
                      std::uint64_t seed, std::vector<std::vector<TraceRecord>>* traces) {
  if (n_races < 1) throw ConfigError("a match needs at least one race");
  if (tracks.empty()) throw ConfigError("a match needs at least one track");
  std::vector<RaceResult> races;
  for (int r = 0; r < n_races; ++r) {
    const int t = r % static_cast<int>(tracks.size());
    std::vector<TraceRecord>* trace = nullptr;
    if (traces != nullptr) trace = &traces->emplace_back();
    RaceResult result = run_race(a, b, tracks[static_cast<std::size_t>(t)], setup, race_seed(seed, r), trace);
    result.track_index = t;
    races.push_back(std::move(result));
  }
  return aggregate_match(std::move(races), {a.name(), b.name()}, seed);
}

RaceTrainingEnv::RaceTrainingEnv(std::vector<RaceTrack> tracks, RaceSetup setup, Options options)
    : tracks_(std::move(tracks)), setup_(std::move(setup)), options_(options), opponent_(options.opponent) {
  if (tracks_.empty()) throw ConfigError("training needs at least one track");
  setup_.race.shield[0] = true;
  for (const RaceTrack& t : tracks_) {
    envs_.push_back(std::make_unique<RaceEnv>(t.track, t.raceline, setup_.params, setup_.race, 2));
  }
  physics_ = envs_.front()->physics();
  env_ = envs_.front().get();
}

void RaceTrainingEnv::configure(const EnvPhysicsConfig& physics) {
  physics_ = physics;
  for (auto& e : envs_) e->configure(physics);
}

std::vector<double> RaceTrainingEnv::observation() const {
  const Observation o = observe(*env_, 0, options_.hierarchical);
  return {o.begin(), o.end()};
}

void RaceTrainingEnv::replan(std::uint64_t seed) {
  if (options_.use_planner && options_.hierarchical) replan_agent(*env_, 0, setup_.planner, seed);
}

std::vector<double> RaceTrainingEnv::reset(std::uint64_t seed) {
  env_ = envs_[static_cast<std::size_t>(episode_) % envs_.size()].get();
  ++episode_;
  seed_ = seed;
  std::mt19937_64 rng(seed);
  env_->reset(rng());
  opponent_.reset(*env_, 1, rng());
  steps_ = 0;
  replan(seed_);
  return observation();
}

EnvStep RaceTrainingEnv::step(const Control& control) {
  const Control other = opponent_.act(*env_, 1);
  const StepEvents ev = env_->step({control, other});
  ++steps_;
  const AgentEvents& e = ev.agent[0];
  EnvStep out;
  out.reward = e.reward.total();
  out.wall_contacts = e.wall_onset ? 1 : 0;
  out.done = env_->done() || env_->agent(0).dnf || steps_ >= options_.episode_steps;
  if (e.checkpoints_crossed > 0 && !out.done) replan(seed_ + static_cast<std::uint64_t>(steps_));
  out.observation = observation();
  return out;
}

}  // namespace h2h
