#pragma once

#include <string>
#include <vector>

#include "h2h/planner.hpp"
#include "h2h/ppo.hpp"
#include "h2h/race.hpp"
#include "h2h/raceline.hpp"
#include "h2h/track.hpp"
#include "h2h/vehicle_dynamics.hpp"

namespace h2h {

/// Version stamped into every emitted JSON document and CSV header comment.
inline constexpr int kSchemaVersion = 1;

std::string track_to_json(const TrackModel& track);
TrackModel track_from_json(const std::string& text);
void save_track(const TrackModel& track, const std::string& path);
TrackModel load_track(const std::string& path);

std::string raceline_to_json(const Raceline& raceline, double max_offset);
/// Rebuilds the raceline on its track from the stored station offsets.
Raceline raceline_from_json(const std::string& text, const TrackModel& track);
void save_raceline(const Raceline& raceline, double max_offset, const std::string& path);
Raceline load_raceline(const std::string& path, const TrackModel& track);

std::string vehicle_params_to_json(const VehicleParams& params);
VehicleParams vehicle_params_from_json(const std::string& text);

std::string plan_to_json(const Plan& plan);

std::string race_result_to_json(const RaceResult& result);
std::string match_result_to_json(const MatchResult& match);
MatchResult match_result_from_json(const std::string& text);

std::string training_trace_csv(const std::vector<TraceRow>& rows);
std::string race_trace_csv(const std::vector<TraceRecord>& records);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace h2h
