#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "h2h/path.hpp"

namespace h2h {

/// Closed constant-width track with a uniform checkpoint/lane lattice.
///
/// Lanes are equal-width bands numbered from the left boundary: lane 0 is the
/// leftmost band (largest e1). A point exactly on a band boundary belongs to the
/// higher-index lane. Checkpoint 0 sits at s = 0 and is the start/finish line.
class TrackModel {
 public:
  TrackModel() = default;
  TrackModel(std::vector<Vec2> centerline, double half_width, int n_lanes = 3, double checkpoint_spacing = 2.0);

  const Path& centerline() const { return centerline_; }
  double half_width() const { return half_width_; }
  int n_lanes() const { return n_lanes_; }
  double lane_width() const { return 2.0 * half_width_ / n_lanes_; }
  double checkpoint_spacing() const { return checkpoint_spacing_; }
  double length() const { return centerline_.length(); }
  Direction direction() const { return centerline_.direction(); }

  /// Arc-length stations of the checkpoints, strictly increasing from 0.
  const std::vector<double>& checkpoints() const { return checkpoints_; }
  int checkpoint_count() const { return static_cast<int>(checkpoints_.size()); }
  /// Index of the last checkpoint at or behind arc length s.
  int last_checkpoint(double s) const;

  /// Wall polylines at e1 = +w (left) and e1 = -w (right).
  const std::vector<Vec2>& left_wall() const { return left_wall_; }
  const std::vector<Vec2>& right_wall() const { return right_wall_; }

  std::optional<int> lane_of(double e1) const;
  double lane_center_offset(int lane) const;
  Vec2 lattice_point(int checkpoint, int lane) const;

  /// Centerline Frenet pose; throws OffTrackError beyond 2w.
  FrenetPose frenet(const Vec2& position, double heading) const;

  /// Local centerline curvature at a checkpoint (mean of the nearby vertex curvatures).
  double checkpoint_curvature(int checkpoint) const;

  /// Reflection through the x axis; swaps CW and CCW.
  TrackModel mirrored() const;

  /// Free-form label carried through files (e.g. "steep" or "moderate").
  std::string category;

 private:
  Path centerline_;
  double half_width_ = 0.0;
  int n_lanes_ = 3;
  double checkpoint_spacing_ = 2.0;
  std::vector<double> checkpoints_;
  std::vector<Vec2> left_wall_;
  std::vector<Vec2> right_wall_;
  std::vector<double> checkpoint_curvature_;
};

/// Oval made of two straights joined by semicircles; the start line is at the middle
/// of the lower straight and driving is counter-clockwise.
TrackModel make_oval(double straight_length, double radius, double half_width, int n_lanes = 3,
                     double checkpoint_spacing = 2.0, double vertex_spacing = 0.25);

/// Circle of the given radius, counter-clockwise.
TrackModel make_ring(double radius, double half_width, int n_lanes = 3, double checkpoint_spacing = 2.0,
                     double vertex_spacing = 0.25);

/// Resamples a closed polyline to (nearly) uniform arc-length spacing.
std::vector<Vec2> resample_closed(const std::vector<Vec2>& points, double spacing);

struct TrackGenOptions {
  double half_width = 1.0;
  int n_lanes = 3;
  double checkpoint_spacing = 2.0;
  double vertex_spacing = 0.25;
  /// Steep tracks exceed this max |curvature| (1/m); moderate tracks stay below moderate_max.
  double steep_min = 0.30;
  double moderate_max = 0.20;
  int max_retries = 500;
};

struct GeneratedTrack {
  TrackModel track;
  bool steep = false;
};

/// Sixteen training tracks: eight counter-clockwise then eight clockwise, each group
/// holding four steep followed by four moderate layouts. Deterministic per seed.
std::vector<GeneratedTrack> generate_training_tracks(std::uint64_t seed, const TrackGenOptions& options = {});

}  // namespace h2h
