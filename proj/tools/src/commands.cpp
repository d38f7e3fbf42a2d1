#include "h2h_tools/commands.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "h2h/errors.hpp"
#include "h2h/serialization.hpp"

namespace h2h::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed config " + path + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be an object: " + path);
  return j;
}

/// Rejects keys outside the allowed set so typos surface as config errors.
void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  std::set<std::string> ok(allowed.begin(), allowed.end());
  ok.insert("schema_version");
  for (const auto& [key, value] : j.items()) {
    if (!ok.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

json section(const json& j, const char* key) {
  if (!j.contains(key)) return json::object();
  if (!j.at(key).is_object()) throw ConfigError(std::string("'") + key + "' must be an object");
  return j.at(key);
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create output directory " + dir);
}

RacelineOptions raceline_options(const json& j) {
  check_keys(j, {"iterations", "step", "margin", "stations_per_checkpoint", "tolerance"}, "raceline config");
  RacelineOptions o;
  read(j, "iterations", o.iterations);
  read(j, "step", o.step);
  read(j, "margin", o.margin);
  read(j, "stations_per_checkpoint", o.stations_per_checkpoint);
  read(j, "tolerance", o.tolerance);
  return o;
}

VehicleParams vehicle_from(const json& j) {
  if (j.is_string()) return load_vehicle_params(j.get<std::string>());
  if (j.is_object()) {
    json doc = j;
    doc["schema_version"] = kSchemaVersion;
    doc["kind"] = "vehicle";
    return vehicle_params_from_json(doc.dump());
  }
  throw ConfigError("'vehicle' must be a file path or an object");
}

PlannerConfig planner_from(const json& j, PlannerConfig c) {
  check_keys(j,
             {"horizon", "budget", "min_sep_time", "exploration", "exact_tail_plies", "v_min", "bin_width", "bins",
              "max_accel", "max_decel", "max_lateral_accel"},
             "planner config");
  read(j, "horizon", c.horizon);
  read(j, "budget", c.budget);
  read(j, "min_sep_time", c.min_sep_time);
  read(j, "exploration", c.exploration);
  read(j, "exact_tail_plies", c.exact_tail_plies);
  read(j, "v_min", c.bins.v_min);
  read(j, "bin_width", c.bins.width);
  read(j, "bins", c.bins.count);
  read(j, "max_accel", c.limits.max_accel);
  read(j, "max_decel", c.limits.max_decel);
  read(j, "max_lateral_accel", c.limits.max_lateral_accel);
  c.validate();
  return c;
}

RaceSetup race_setup_from(const json& j) {
  check_keys(j, {"laps", "dt", "max_steps", "shield_a", "shield_b", "planner", "vehicle", "lambda1", "lambda2"},
             "race config");
  RaceSetup setup;
  if (j.contains("vehicle")) setup.params = vehicle_from(j.at("vehicle"));
  read(j, "laps", setup.race.laps);
  read(j, "dt", setup.race.dt);
  read(j, "max_steps", setup.race.max_steps);
  read(j, "shield_a", setup.race.shield[0]);
  read(j, "shield_b", setup.race.shield[1]);
  read(j, "lambda1", setup.race.cbf.lambda1_0);
  read(j, "lambda2", setup.race.cbf.lambda2_0);
  setup.planner = planner_from(section(j, "planner"), setup.planner);
  setup.race.bins = setup.planner.bins;
  setup.race.default_speed_bin = std::min(setup.race.default_speed_bin, setup.race.bins.count - 1);
  setup.race.validate();
  return setup;
}

RaceTrack make_race_track(TrackModel track, const RacelineOptions& options) {
  Raceline rl = compute_raceline(track, options);
  return {std::move(track), std::move(rl)};
}

std::string fmt(double v) {
  if (!std::isfinite(v)) return "";
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

}  // namespace

std::vector<std::string> cmd_generate_tracks(const GenerateTracksOptions& options) {
  const json cfg = load_config(options.config);
  check_keys(cfg, {"half_width", "n_lanes", "checkpoint_spacing", "vertex_spacing", "steep_min", "moderate_max"},
             "track generation config");
  TrackGenOptions gen;
  read(cfg, "half_width", gen.half_width);
  read(cfg, "n_lanes", gen.n_lanes);
  read(cfg, "checkpoint_spacing", gen.checkpoint_spacing);
  read(cfg, "vertex_spacing", gen.vertex_spacing);
  read(cfg, "steep_min", gen.steep_min);
  read(cfg, "moderate_max", gen.moderate_max);
  ensure_dir(options.out);
  std::vector<std::string> paths;
  const std::vector<GeneratedTrack> tracks = generate_training_tracks(options.seed, gen);
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    std::ostringstream name;
    name << "track_" << std::setw(2) << std::setfill('0') << i << ".json";
    const std::string path = (fs::path(options.out) / name.str()).string();
    save_track(tracks[i].track, path);
    paths.push_back(path);
  }
  return paths;
}

Raceline cmd_compute_raceline(const ComputeRacelineOptions& options) {
  if (options.track.empty()) throw ConfigError("compute-raceline needs --track");
  const TrackModel track = load_track(options.track);
  const RacelineOptions ro = raceline_options(load_config(options.config));
  Raceline rl = compute_raceline(track, ro);
  save_raceline(rl, track.half_width() - ro.margin, options.out);
  return rl;
}

TrainSummary cmd_train(const TrainOptions& options) {
  const json cfg = load_config(options.config);
  check_keys(cfg, {"task", "hidden", "vehicle", "ppo", "curriculum", "race"}, "training config");
  std::string task = "corridor";
  read(cfg, "task", task);
  std::vector<int> hidden{16, 16};
  read(cfg, "hidden", hidden);

  const json pj = section(cfg, "ppo");
  check_keys(pj,
             {"iterations", "steps_per_iteration", "epochs", "minibatch", "learning_rate", "gamma", "gae_lambda", "clip",
              "sigma_start", "sigma_end", "value_coef", "max_grad_norm"},
             "ppo config");
  PpoConfig ppo;
  read(pj, "iterations", ppo.iterations);
  read(pj, "steps_per_iteration", ppo.steps_per_iteration);
  read(pj, "epochs", ppo.epochs);
  read(pj, "minibatch", ppo.minibatch);
  read(pj, "learning_rate", ppo.learning_rate);
  read(pj, "gamma", ppo.gamma);
  read(pj, "gae_lambda", ppo.gae_lambda);
  read(pj, "clip", ppo.clip);
  read(pj, "sigma_start", ppo.sigma_start);
  read(pj, "sigma_end", ppo.sigma_end);
  read(pj, "value_coef", ppo.value_coef);
  read(pj, "max_grad_norm", ppo.max_grad_norm);
  ppo.curriculum = !options.no_curriculum;
  ppo.cbf = !options.no_cbf;
  ppo.validate();

  const json cj = section(cfg, "curriculum");
  check_keys(cj, {"t_start", "t_end", "lambda1_0", "lambda2_0"}, "curriculum config");
  CurriculumSchedule schedule;
  read(cj, "t_start", schedule.t_start);
  read(cj, "t_end", schedule.t_end);
  read(cj, "lambda1_0", schedule.lambda1_0);
  read(cj, "lambda2_0", schedule.lambda2_0);
  schedule.validate();

  std::unique_ptr<RlEnvironment> env;
  if (task == "corridor") {
    VehicleParams vp = VehicleParams::reference();
    if (cfg.contains("vehicle")) vp = vehicle_from(cfg.at("vehicle"));
    schedule.base_tires = vp.tires();
    env = std::make_unique<CorridorEnv>(CorridorEnv::Options{}, vp);
  } else if (task == "race") {
    const json rj = section(cfg, "race");
    check_keys(rj, {"track_seed", "tracks", "episode_steps", "use_planner", "hierarchical", "setup"}, "race task config");
    std::vector<RaceTrack> tracks;
    if (rj.contains("tracks")) {
      for (const auto& p : rj.at("tracks")) tracks.push_back(make_race_track(load_track(p.get<std::string>()), {}));
    } else {
      std::uint64_t track_seed = 0;
      read(rj, "track_seed", track_seed);
      for (GeneratedTrack& g : generate_training_tracks(track_seed)) tracks.push_back(make_race_track(g.track, {}));
    }
    RaceTrainingEnv::Options eo;
    read(rj, "episode_steps", eo.episode_steps);
    read(rj, "use_planner", eo.use_planner);
    read(rj, "hierarchical", eo.hierarchical);
    RaceSetup setup = race_setup_from(section(rj, "setup"));
    schedule.base_tires = setup.params.tires();
    env = std::make_unique<RaceTrainingEnv>(std::move(tracks), setup, eo);
  } else {
    throw ConfigError("unknown training task: " + task);
  }

  PolicyNet net(env->observation_size(), hidden, env->delta_max());
  net.initialize(options.seed);
  TrainResult result = train(*env, std::move(net), schedule, ppo, options.seed);

  ensure_dir(options.out);
  TrainSummary summary;
  summary.checkpoint = (fs::path(options.out) / "policy.bin").string();
  summary.trace = (fs::path(options.out) / "reward_trace.csv").string();
  save_policy(result.net, summary.checkpoint);
  write_text_file(summary.trace, training_trace_csv(result.trace));
  json resolved = cfg;
  resolved["schema_version"] = kSchemaVersion;
  resolved["seed"] = options.seed;
  resolved["curriculum_enabled"] = ppo.curriculum;
  resolved["cbf_enabled"] = ppo.cbf;
  write_text_file((fs::path(options.out) / "train_config.json").string(), resolved.dump(1));
  summary.rows = std::move(result.trace);
  return summary;
}

MatchResult cmd_race(const RaceOptions& options) {
  if (options.races < 1) throw ConfigError("--races must be at least 1");
  const json cfg = load_config(options.config);
  const RaceSetup setup = race_setup_from(cfg);
  std::unique_ptr<Driver> a = make_driver(options.agent_a);
  std::unique_ptr<Driver> b = make_driver(options.agent_b);

  std::vector<RaceTrack> tracks;
  for (const std::string& p : options.tracks) tracks.push_back(make_race_track(load_track(p), {}));
  if (tracks.empty()) tracks.push_back(make_race_track(make_oval(12.0, 5.0, 1.0), {}));

  std::vector<std::vector<TraceRecord>> traces;
  MatchResult match = run_match(*a, *b, tracks, options.races, setup, options.seed,
                                options.write_traces ? &traces : nullptr);
  ensure_dir(options.out);
  write_text_file((fs::path(options.out) / "match.json").string(), match_result_to_json(match));
  for (std::size_t r = 0; r < traces.size(); ++r) {
    std::ostringstream name;
    name << "race_" << std::setw(2) << std::setfill('0') << r << "_trace.csv";
    write_text_file((fs::path(options.out) / name.str()).string(), race_trace_csv(traces[r]));
  }
  return match;
}

std::string cmd_evaluate(const EvaluateOptions& options) {
  if (options.reports.empty()) throw ConfigError("evaluate needs at least one match report (empty summary)");
  std::map<std::pair<std::string, std::string>, std::vector<RaceResult>> pooled;
  std::vector<std::pair<std::string, std::string>> order;
  for (const std::string& path : options.reports) {
    MatchResult m = match_result_from_json(read_text_file(path));
    const auto key = std::make_pair(m.names[0], m.names[1]);
    if (!pooled.count(key)) order.push_back(key);
    auto& races = pooled[key];
    races.insert(races.end(), m.races.begin(), m.races.end());
  }
  std::ostringstream os;
  os << "# schema_version: " << kSchemaVersion << "\n";
  os << "agent_a,agent_b,races,wins_a,wins_b,no_winner,avg_lap_time_a,avg_lap_time_b,"
        "avg_raceline_distance_a,avg_raceline_distance_b,wall_collisions_a,wall_collisions_b,"
        "from_behind_collisions_a,from_behind_collisions_b\n";
  for (const auto& key : order) {
    const MatchResult m = aggregate_match(pooled[key], {key.first, key.second}, 0);
    const AgentAggregate& a = m.aggregate[0];
    const AgentAggregate& b = m.aggregate[1];
    os << key.first << ',' << key.second << ',' << m.races.size() << ',' << a.wins << ',' << b.wins << ','
       << m.no_winner << ',' << fmt(a.avg_lap_time) << ',' << fmt(b.avg_lap_time) << ','
       << fmt(a.avg_raceline_distance) << ',' << fmt(b.avg_raceline_distance) << ',' << a.wall_collisions << ','
       << b.wall_collisions << ',' << a.from_behind_collisions << ',' << b.from_behind_collisions << '\n';
  }
  const std::string text = os.str();
  if (!options.out.empty()) write_text_file(options.out, text);
  return text;
}

int run(int argc, const char* const* argv) {
  CLI::App app{"Head-to-head autonomous racing: tracks, racelines, training and races"};
  app.require_subcommand(1);

  GenerateTracksOptions gen;
  auto* c_gen = app.add_subcommand("generate-tracks", "Write the sixteen training tracks");
  c_gen->add_option("--seed", gen.seed, "Random seed");
  c_gen->add_option("--out", gen.out, "Output directory");
  c_gen->add_option("--config", gen.config, "Track generation config (JSON)");

  ComputeRacelineOptions rl;
  auto* c_rl = app.add_subcommand("compute-raceline", "Optimize the raceline of a track");
  c_rl->add_option("--track", rl.track, "Track file")->required();
  c_rl->add_option("--out", rl.out, "Output raceline file");
  c_rl->add_option("--config", rl.config, "Raceline optimizer config (JSON)");

  TrainOptions tr;
  auto* c_tr = app.add_subcommand("train", "Train a policy");
  c_tr->add_option("--config", tr.config, "Training config (JSON)");
  c_tr->add_option("--seed", tr.seed, "Random seed");
  c_tr->add_option("--out", tr.out, "Output directory");
  c_tr->add_flag("--no-curriculum", tr.no_curriculum, "Train on the base tires throughout");
  c_tr->add_flag("--no-cbf", tr.no_cbf, "Disable the safety shield (lambda = 0)");

  RaceOptions race;
  auto* c_race = app.add_subcommand("race", "Run a match between two agents");
  c_race->add_option("--agent-a", race.agent_a, "Agent spec: lqr, lqr-raceline, scripted, frozen, policy:PATH, e2e:PATH");
  c_race->add_option("--agent-b", race.agent_b, "Agent spec");
  c_race->add_option("--races", race.races, "Number of races");
  c_race->add_option("--seed", race.seed, "Random seed");
  c_race->add_option("--out", race.out, "Output directory");
  c_race->add_option("--track", race.tracks, "Track file (repeatable); default oval when absent");
  c_race->add_option("--config", race.config, "Race config (JSON)");
  bool no_traces = false;
  c_race->add_flag("--no-traces", no_traces, "Skip the per-race trace CSVs");

  EvaluateOptions ev;
  auto* c_ev = app.add_subcommand("evaluate", "Summarize match reports");
  c_ev->add_option("reports", ev.reports, "Match report files");
  c_ev->add_option("--out", ev.out, "Summary CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (c_gen->parsed()) {
      for (const std::string& p : cmd_generate_tracks(gen)) std::cout << p << '\n';
    } else if (c_rl->parsed()) {
      const Raceline r = cmd_compute_raceline(rl);
      std::cout << "max |curvature| " << r.max_abs_curvature() << " after " << r.iterations << " iterations\n";
    } else if (c_tr->parsed()) {
      const TrainSummary s = cmd_train(tr);
      std::cout << s.checkpoint << '\n' << s.trace << '\n';
    } else if (c_race->parsed()) {
      race.write_traces = !no_traces;
      const MatchResult m = cmd_race(race);
      std::cout << m.names[0] << " " << m.aggregate[0].wins << " - " << m.aggregate[1].wins << " " << m.names[1]
                << " (" << m.no_winner << " without winner)\n";
    } else if (c_ev->parsed()) {
      std::cout << cmd_evaluate(ev);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DivergenceError& e) {
    std::cerr << "numeric divergence: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace h2h::cli
