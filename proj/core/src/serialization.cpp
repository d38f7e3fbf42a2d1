#include "h2h/serialization.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <nlohmann/json.hpp>
#include <sstream>

#include "h2h/errors.hpp"

namespace h2h {

using nlohmann::json;

namespace {

json parse(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed ") + what + ": " + e.what());
  }
}

void expect_kind(const json& j, const char* kind) {
  if (!j.is_object() || j.value("kind", "") != kind) throw ConfigError(std::string("not a ") + kind + " document");
  if (j.value("schema_version", 0) != kSchemaVersion) throw ConfigError(std::string("unsupported ") + kind + " schema");
}

template <typename T>
T field(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad or missing field '") + key + "': " + e.what());
  }
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_or_nan(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

json states_json(const std::vector<DiscreteState>& states) {
  json arr = json::array();
  for (const DiscreteState& s : states) {
    arr.push_back({{"checkpoint", s.checkpoint}, {"lane", s.lane}, {"speed_bin", s.speed_bin}, {"time", s.time}});
  }
  return arr;
}

json stats_json(const AgentRaceStats& s) {
  return {{"name", s.name},
          {"lap_times", s.lap_times},
          {"avg_lap_time", number_or_null(s.avg_lap_time)},
          {"avg_raceline_distance", s.avg_raceline_distance},
          {"wall_collisions", s.wall_collisions},
          {"from_behind_collisions", s.from_behind_collisions},
          {"opponent_contacts", s.opponent_contacts},
          {"finished", s.finished},
          {"dnf", s.dnf},
          {"finish_time", s.finish_time}};
}

AgentRaceStats stats_from(const json& j) {
  AgentRaceStats s;
  s.name = field<std::string>(j, "name");
  s.lap_times = field<std::vector<double>>(j, "lap_times");
  s.avg_lap_time = number_or_nan(j.at("avg_lap_time"));
  s.avg_raceline_distance = field<double>(j, "avg_raceline_distance");
  s.wall_collisions = field<int>(j, "wall_collisions");
  s.from_behind_collisions = field<int>(j, "from_behind_collisions");
  s.opponent_contacts = field<int>(j, "opponent_contacts");
  s.finished = field<bool>(j, "finished");
  s.dnf = field<bool>(j, "dnf");
  s.finish_time = field<double>(j, "finish_time");
  return s;
}

json race_json(const RaceResult& r) {
  return {{"seed", r.seed},
          {"track_index", r.track_index},
          {"winner", r.winner},
          {"agent_a_left", r.agent_a_left},
          {"steps", r.steps},
          {"duration", r.duration},
          {"agents", {stats_json(r.agents[0]), stats_json(r.agents[1])}}};
}

RaceResult race_from(const json& j) {
  RaceResult r;
  r.seed = field<std::uint64_t>(j, "seed");
  r.track_index = field<int>(j, "track_index");
  r.winner = field<int>(j, "winner");
  r.agent_a_left = field<bool>(j, "agent_a_left");
  r.steps = field<int>(j, "steps");
  r.duration = field<double>(j, "duration");
  const json& agents = j.at("agents");
  if (!agents.is_array() || agents.size() != 2) throw ConfigError("race result needs two agents");
  r.agents = {stats_from(agents[0]), stats_from(agents[1])};
  return r;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

std::string track_to_json(const TrackModel& track) {
  json pts = json::array();
  for (const Vec2& p : track.centerline().vertices()) pts.push_back({p.x(), p.y()});
  const json j = {{"schema_version", kSchemaVersion},
                  {"kind", "track"},
                  {"category", track.category},
                  {"direction", track.direction() == Direction::CCW ? "CCW" : "CW"},
                  {"half_width", track.half_width()},
                  {"n_lanes", track.n_lanes()},
                  {"checkpoint_spacing", track.checkpoint_spacing()},
                  {"length", track.length()},
                  {"checkpoint_count", track.checkpoint_count()},
                  {"centerline", pts}};
  return j.dump(1);
}

TrackModel track_from_json(const std::string& text) {
  const json j = parse(text, "track file");
  expect_kind(j, "track");
  std::vector<Vec2> pts;
  for (const auto& p : j.at("centerline")) {
    if (!p.is_array() || p.size() != 2) throw ConfigError("centerline points must be [x, y] pairs");
    pts.emplace_back(p[0].get<double>(), p[1].get<double>());
  }
  TrackModel t(std::move(pts), field<double>(j, "half_width"), field<int>(j, "n_lanes"),
               field<double>(j, "checkpoint_spacing"));
  t.category = j.value("category", "");
  return t;
}

void save_track(const TrackModel& track, const std::string& path) { write_text_file(path, track_to_json(track)); }
TrackModel load_track(const std::string& path) { return track_from_json(read_text_file(path)); }

std::string raceline_to_json(const Raceline& r, double max_offset) {
  json pts = json::array();
  for (const Vec2& p : r.path.vertices()) pts.push_back({p.x(), p.y()});
  const json j = {{"schema_version", kSchemaVersion},
                  {"kind", "raceline"},
                  {"max_offset", max_offset},
                  {"station_s", r.station_s},
                  {"station_offset", r.station_offset},
                  {"optimal_lanes", r.optimal_lanes},
                  {"max_abs_curvature", r.max_abs_curvature()},
                  {"iterations", r.iterations},
                  {"converged", r.converged},
                  {"points", pts}};
  return j.dump(1);
}

Raceline raceline_from_json(const std::string& text, const TrackModel& track) {
  const json j = parse(text, "raceline file");
  expect_kind(j, "raceline");
  Raceline r = raceline_from_offsets(track, field<std::vector<double>>(j, "station_s"),
                                     field<std::vector<double>>(j, "station_offset"), field<double>(j, "max_offset"));
  r.iterations = j.value("iterations", 0);
  r.converged = j.value("converged", false);
  return r;
}

void save_raceline(const Raceline& raceline, double max_offset, const std::string& path) {
  write_text_file(path, raceline_to_json(raceline, max_offset));
}

Raceline load_raceline(const std::string& path, const TrackModel& track) {
  return raceline_from_json(read_text_file(path), track);
}

std::string vehicle_params_to_json(const VehicleParams& p) {
  const json j = {{"schema_version", kSchemaVersion},
                  {"kind", "vehicle"},
                  {"m", p.m},
                  {"Iz", p.Iz},
                  {"lf", p.lf},
                  {"lr", p.lr},
                  {"B_front", p.B_front},
                  {"C_front", p.C_front},
                  {"D_front", p.D_front},
                  {"B_rear", p.B_rear},
                  {"C_rear", p.C_rear},
                  {"D_rear", p.D_rear},
                  {"Cm1", p.Cm1},
                  {"Cm2", p.Cm2},
                  {"Croll", p.Croll},
                  {"Cd", p.Cd},
                  {"delta_max", p.delta_max},
                  {"length", p.length},
                  {"width", p.width}};
  return j.dump(1);
}

VehicleParams vehicle_params_from_json(const std::string& text) {
  const json j = parse(text, "vehicle file");
  expect_kind(j, "vehicle");
  VehicleParams p = VehicleParams::reference();
  const std::initializer_list<std::pair<const char*, double*>> fields{
      {"m", &p.m},           {"Iz", &p.Iz},          {"lf", &p.lf},         {"lr", &p.lr},
      {"B_front", &p.B_front}, {"C_front", &p.C_front}, {"D_front", &p.D_front}, {"B_rear", &p.B_rear},
      {"C_rear", &p.C_rear}, {"D_rear", &p.D_rear},   {"Cm1", &p.Cm1},       {"Cm2", &p.Cm2},
      {"Croll", &p.Croll},   {"Cd", &p.Cd},          {"delta_max", &p.delta_max}, {"length", &p.length},
      {"width", &p.width}};
  for (const auto& item : j.items()) {
    if (item.key() == "schema_version" || item.key() == "kind") continue;
    bool known = false;
    for (const auto& f : fields) known = known || item.key() == f.first;
    if (!known) throw ConfigError("unknown key in vehicle file: " + item.key());
  }
  for (const auto& [key, ptr] : fields) {
    if (j.contains(key)) *ptr = field<double>(j, key);
  }
  p.validate();
  return p;
}

VehicleParams load_vehicle_params(const std::string& path) { return vehicle_params_from_json(read_text_file(path)); }

void save_vehicle_params(const VehicleParams& params, const std::string& path) {
  write_text_file(path, vehicle_params_to_json(params));
}

std::string plan_to_json(const Plan& plan) {
  json j = {{"schema_version", kSchemaVersion},
            {"kind", "plan"},
            {"value", plan.value},
            {"solved", plan.solved},
            {"degraded", plan.degraded},
            {"iterations", plan.iterations},
            {"me", states_json(plan.me)},
            {"opp", states_json(plan.opp)}};
  return j.dump(1);
}

std::string race_result_to_json(const RaceResult& result) {
  json j = race_json(result);
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "race_result";
  return j.dump(1);
}

std::string match_result_to_json(const MatchResult& m) {
  json races = json::array();
  for (const RaceResult& r : m.races) races.push_back(race_json(r));
  json agg = json::array();
  for (int i = 0; i < 2; ++i) {
    const AgentAggregate& a = m.aggregate[static_cast<std::size_t>(i)];
    agg.push_back({{"name", m.names[static_cast<std::size_t>(i)]},
                   {"wins", a.wins},
                   {"avg_lap_time", number_or_null(a.avg_lap_time)},
                   {"avg_raceline_distance", a.avg_raceline_distance},
                   {"wall_collisions", a.wall_collisions},
                   {"from_behind_collisions", a.from_behind_collisions}});
  }
  const json j = {{"schema_version", kSchemaVersion},
                  {"kind", "match"},
                  {"seed", m.seed},
                  {"n_races", m.races.size()},
                  {"no_winner", m.no_winner},
                  {"aggregate", agg},
                  {"races", races}};
  return j.dump(1);
}

MatchResult match_result_from_json(const std::string& text) {
  const json j = parse(text, "match report");
  expect_kind(j, "match");
  std::vector<RaceResult> races;
  for (const auto& r : j.at("races")) races.push_back(race_from(r));
  const json& agg = j.at("aggregate");
  if (!agg.is_array() || agg.size() != 2) throw ConfigError("match report needs two aggregate entries");
  return aggregate_match(std::move(races), {field<std::string>(agg[0], "name"), field<std::string>(agg[1], "name")},
                         field<std::uint64_t>(j, "seed"));
}

std::string training_trace_csv(const std::vector<TraceRow>& rows) {
  std::ostringstream os;
  os << "# schema_version: " << kSchemaVersion << "\n";
  os << "iteration,mean_reward,t_s,lambda1,lambda2,wall_contacts\n";
  for (const TraceRow& r : rows) {
    os << r.iteration << ',' << fmt(r.mean_reward) << ',' << fmt(r.t_s) << ',' << fmt(r.lambda1) << ','
       << fmt(r.lambda2) << ',' << r.wall_contacts << '\n';
  }
  return os.str();
}

std::string race_trace_csv(const std::vector<TraceRecord>& records) {
  std::ostringstream os;
  os << "# schema_version: " << kSchemaVersion << "\n";
  os << "t";
  for (const char* a : {"a", "b"}) {
    for (const char* f : {"x", "y", "phi", "vx", "vy", "omega", "raw_throttle", "raw_steer", "throttle", "steer",
                          "checkpoints", "wall_contact", "wall_onset", "opponent_contact", "from_behind"}) {
      os << ',' << a << '_' << f;
    }
  }
  os << '\n';
  for (const TraceRecord& r : records) {
    os << fmt(r.t);
    for (int i = 0; i < 2; ++i) {
      const VehicleState& s = r.state[static_cast<std::size_t>(i)];
      const AgentEvents& e = r.events[static_cast<std::size_t>(i)];
      os << ',' << fmt(s.x) << ',' << fmt(s.y) << ',' << fmt(s.phi) << ',' << fmt(s.vx) << ',' << fmt(s.vy) << ','
         << fmt(s.omega) << ',' << fmt(e.raw.throttle) << ',' << fmt(e.raw.steer) << ',' << fmt(e.applied.throttle)
         << ',' << fmt(e.applied.steer) << ',' << e.checkpoints_crossed << ',' << e.wall_contact << ','
         << e.wall_onset << ',' << e.opponent_contact << ',' << e.from_behind;
    }
    os << '\n';
  }
  return os.str();
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << text;
  if (!out) throw ConfigError("failed writing " + path);
}

}  // namespace h2h
