#pragma once

#include <span>
#include <vector>

#include "h2h/path.hpp"
#include "h2h/track.hpp"

namespace h2h {

struct RacelineOptions {
  int iterations = 4000;
  /// Initial trial step of the projected-gradient update (m of offset per unit gradient).
  double step = 0.05;
  /// Clearance kept from each boundary.
  double margin = 0.3;
  /// Optimization stations per checkpoint interval.
  int stations_per_checkpoint = 4;
  /// Relative objective decrease below which the optimizer declares convergence.
  double tolerance = 1e-10;
};

struct Raceline {
  Path path;
  /// Signed curvature at every path vertex.
  std::vector<double> curvature;
  /// Lateral offset from the centerline at every centerline vertex (vertex_s).
  std::vector<double> vertex_s;
  std::vector<double> vertex_offset;
  double center_length = 0.0;
  std::vector<double> station_s;
  std::vector<double> station_offset;
  /// Lane crossed at every checkpoint.
  std::vector<int> optimal_lanes;
  /// Objective before the first and after every completed iteration.
  std::vector<double> objective_history;
  int iterations = 0;
  bool converged = false;

  double max_abs_curvature() const;
  /// Centerline offset of the raceline at centerline arc length s (linear between vertices).
  double offset_at(double s) const;
};

/// Sum of squared discrete (three-point) curvatures at the optimization stations.
double raceline_objective(const TrackModel& track, std::span<const double> station_s,
                          std::span<const double> offsets);

/// Minimum-curvature raceline via projected gradient descent with backtracking over
/// per-station lateral offsets clamped to +-(w - margin).
Raceline compute_raceline(const TrackModel& track, const RacelineOptions& options = {});

/// Builds the dense raceline path through the given station offsets (periodic
/// Catmull-Rom interpolation evaluated at every centerline vertex).
Raceline raceline_from_offsets(const TrackModel& track, std::vector<double> station_s,
                               std::vector<double> offsets, double max_offset);

/// Lane id whose band contains the raceline crossing at each checkpoint.
std::vector<int> optimal_lane_table(const Path& raceline, const TrackModel& track);

}  // namespace h2h
