#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "h2h/race.hpp"

namespace h2h::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDivergence = 3;

struct GenerateTracksOptions {
  std::uint64_t seed = 0;
  std::string out = "tracks";
  std::string config;
};

/// Writes the sixteen training tracks; returns the written paths.
std::vector<std::string> cmd_generate_tracks(const GenerateTracksOptions& options);

struct ComputeRacelineOptions {
  std::string track;
  std::string out = "raceline.json";
  std::string config;
};

Raceline cmd_compute_raceline(const ComputeRacelineOptions& options);

struct TrainOptions {
  std::string config;
  std::uint64_t seed = 0;
  std::string out = "train";
  bool no_curriculum = false;
  bool no_cbf = false;
};

struct TrainSummary {
  std::string checkpoint;
  std::string trace;
  std::vector<TraceRow> rows;
};

TrainSummary cmd_train(const TrainOptions& options);

struct RaceOptions {
  std::string agent_a = "lqr";
  std::string agent_b = "scripted";
  int races = 20;
  std::uint64_t seed = 0;
  std::string out = "race";
  std::vector<std::string> tracks;
  std::string config;
  bool write_traces = true;
};

MatchResult cmd_race(const RaceOptions& options);

struct EvaluateOptions {
  std::vector<std::string> reports;
  std::string out = "summary.csv";
};

/// Pools match reports per (agent A, agent B) pair into one summary CSV row each.
std::string cmd_evaluate(const EvaluateOptions& options);

/// Full command-line entry point; returns the process exit code.
int run(int argc, const char* const* argv);

}  // namespace h2h::cli
