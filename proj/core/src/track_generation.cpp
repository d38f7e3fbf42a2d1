#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "h2h/errors.hpp"
#include "h2h/track.hpp"

namespace h2h {

namespace {

struct ShapeParams {
  double base_radius;
  double stretch;
  std::array<double, 3> amplitude;  // harmonics 2, 3, 4
  std::array<double, 3> phase;
};

std::vector<Vec2> radial_shape(const ShapeParams& p) {
  constexpr int kSamples = 2400;
  std::vector<Vec2> pts;
  pts.reserve(kSamples);
  for (int i = 0; i < kSamples; ++i) {
    const double theta = 2.0 * std::numbers::pi * i / kSamples;
    double r = 1.0;
    for (int h = 0; h < 3; ++h) r += p.amplitude[h] * std::cos((h + 2) * theta + p.phase[h]);
    r *= p.base_radius;
    pts.emplace_back(p.stretch * r * std::cos(theta), r * std::sin(theta));
  }
  return pts;
}

ShapeParams sample_shape(std::mt19937_64& rng, bool steep) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto in = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  ShapeParams p{};
  if (steep) {
    p.base_radius = in(7.0, 10.0);
    p.stretch = in(1.0, 1.6);
    p.amplitude = {in(-0.18, 0.18), in(-0.14, 0.14), in(-0.07, 0.07)};
  } else {
    p.base_radius = in(10.0, 14.0);
    p.stretch = in(1.0, 1.4);
    p.amplitude = {in(-0.07, 0.07), in(-0.04, 0.04), in(-0.02, 0.02)};
  }
  for (double& ph : p.phase) ph = in(0.0, 2.0 * std::numbers::pi);
  return p;
}

TrackModel generate_one(std::mt19937_64& rng, bool steep, const TrackGenOptions& opt) {
  // Steep layouts are capped so the outer lane stays drivable and the walls never fold.
  const double steep_max = 0.6 / opt.half_width;
  for (int attempt = 0; attempt < opt.max_retries; ++attempt) {
    const ShapeParams shape = sample_shape(rng, steep);
    std::vector<Vec2> pts = resample_closed(radial_shape(shape), opt.vertex_spacing);
    const Path probe(pts);
    const double kmax = probe.max_abs_curvature();
    const bool accepted = steep ? (kmax > opt.steep_min && kmax < steep_max) : (kmax < opt.moderate_max);
    if (!accepted || !probe.is_simple()) continue;
    TrackModel track(std::move(pts), opt.half_width, opt.n_lanes, opt.checkpoint_spacing);
    track.category = steep ? "steep" : "moderate";
    return track;
  }
  throw GenerationError("track generation exceeded its retry budget");
}

}  // namespace

std::vector<GeneratedTrack> generate_training_tracks(std::uint64_t seed, const TrackGenOptions& options) {
  std::mt19937_64 rng(seed);
  std::vector<GeneratedTrack> out;
  out.reserve(16);
  for (int orientation = 0; orientation < 2; ++orientation) {
    for (int i = 0; i < 8; ++i) {
      const bool steep = i < 4;
      TrackModel track = generate_one(rng, steep, options);
      if (orientation == 1) track = track.mirrored();
      out.push_back({std::move(track), steep});
    }
  }
  return out;
}

}  // namespace h2h
