#include "h2h/raceline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "h2h/errors.hpp"

namespace h2h {

double Raceline::max_abs_curvature() const {
  double m = 0.0;
  for (double k : curvature) m = std::max(m, std::abs(k));
  return m;
}

double Raceline::offset_at(double s) const {
  if (vertex_s.empty()) return 0.0;
  const double ws = s - center_length * std::floor(s / center_length);
  auto it = std::upper_bound(vertex_s.begin(), vertex_s.end(), ws);
  const std::size_t i = static_cast<std::size_t>(std::distance(vertex_s.begin(), it)) - 1;
  const std::size_t j = (i + 1) % vertex_s.size();
  const double s1 = j == 0 ? center_length : vertex_s[j];
  const double t = std::clamp((ws - vertex_s[i]) / (s1 - vertex_s[i]), 0.0, 1.0);
  return (1.0 - t) * vertex_offset[i] + t * vertex_offset[j];
}

namespace {

struct Stations {
  std::vector<Vec2> base;
  std::vector<Vec2> normal;

  Vec2 point(std::size_t k, double offset) const { return base[k] + offset * normal[k]; }
};

Stations make_stations(const TrackModel& track, std::span<const double> station_s) {
  Stations st;
  st.base.reserve(station_s.size());
  st.normal.reserve(station_s.size());
  for (double s : station_s) {
    st.base.push_back(track.centerline().point_at(s));
    st.normal.push_back(track.centerline().normal_at(s));
  }
  return st;
}

double station_curvature(const Stations& st, std::span<const double> o, std::size_t k) {
  const std::size_t n = o.size();
  const std::size_t prev = (k + n - 1) % n;
  const std::size_t next = (k + 1) % n;
  return menger_curvature(st.point(prev, o[prev]), st.point(k, o[k]), st.point(next, o[next]));
}

double objective(const Stations& st, std::span<const double> o) {
  double sum = 0.0;
  for (std::size_t k = 0; k < o.size(); ++k) {
    const double c = station_curvature(st, o, k);
    sum += c * c;
  }
  return sum;
}

// Objective terms touched by offset j.
double local_objective(const Stations& st, std::span<const double> o, std::size_t j) {
  const std::size_t n = o.size();
  double sum = 0.0;
  for (std::size_t k : {(j + n - 1) % n, j, (j + 1) % n}) {
    const double c = station_curvature(st, o, k);
    sum += c * c;
  }
  return sum;
}

std::vector<double> gradient(const Stations& st, std::vector<double>& o) {
  constexpr double kH = 1e-6;
  std::vector<double> g(o.size());
  for (std::size_t j = 0; j < o.size(); ++j) {
    const double saved = o[j];
    o[j] = saved + kH;
    const double up = local_objective(st, o, j);
    o[j] = saved - kH;
    const double down = local_objective(st, o, j);
    o[j] = saved;
    g[j] = (up - down) / (2.0 * kH);
  }
  return g;
}

// Second derivatives (per station index squared) of the periodic cubic spline through the
// offsets. The system is strictly diagonally dominant, so Gauss-Seidel converges quickly.
std::vector<double> spline_moments(std::span<const double> o) {
  const std::size_t n = o.size();
  std::vector<double> rhs(n), m(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) rhs[k] = 6.0 * (o[(k + 1) % n] - 2.0 * o[k] + o[(k + n - 1) % n]);
  for (int sweep = 0; sweep < 200; ++sweep) {
    double change = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double v = (rhs[k] - m[(k + n - 1) % n] - m[(k + 1) % n]) / 4.0;
      change = std::max(change, std::abs(v - m[k]));
      m[k] = v;
    }
    if (change < 1e-15) break;
  }
  return m;
}

}  // namespace

double raceline_objective(const TrackModel& track, std::span<const double> station_s,
                          std::span<const double> offsets) {
  if (station_s.size() != offsets.size()) throw ConfigError("station and offset counts differ");
  return objective(make_stations(track, station_s), offsets);
}

Raceline raceline_from_offsets(const TrackModel& track, std::vector<double> station_s, std::vector<double> offsets,
                               double max_offset) {
  const std::size_t n = station_s.size();
  if (n < 3 || offsets.size() != n) throw ConfigError("raceline needs at least three matching stations");
  const Path& center = track.centerline();
  const double length = center.length();
  const double spacing = length / static_cast<double>(n);

  const std::vector<double> m = spline_moments(offsets);
  std::vector<Vec2> pts;
  std::vector<double> vertex_offset;
  pts.reserve(center.size());
  vertex_offset.reserve(center.size());
  for (std::size_t i = 0; i < center.size(); ++i) {
    const double s = center.arclength()[i];
    const auto k = std::min(static_cast<std::size_t>(s / spacing), n - 1);
    const double u = (s - station_s[k]) / spacing;
    const double v = 1.0 - u;
    double o = v * offsets[k] + u * offsets[(k + 1) % n] + ((v * v * v - v) * m[k] + (u * u * u - u) * m[(k + 1) % n]) / 6.0;
    o = std::clamp(o, -max_offset, max_offset);
    vertex_offset.push_back(o);
    pts.push_back(center.vertices()[i] + o * center.normals()[i]);
  }

  Raceline out;
  out.path = Path(std::move(pts));
  out.curvature = out.path.vertex_curvature();
  out.vertex_s = center.arclength();
  out.center_length = length;
  out.vertex_offset = std::move(vertex_offset);
  out.station_s = std::move(station_s);
  out.station_offset = std::move(offsets);
  out.optimal_lanes = optimal_lane_table(out.path, track);
  return out;
}

Raceline compute_raceline(const TrackModel& track, const RacelineOptions& options) {
  const double bound = track.half_width() - options.margin;
  if (!(bound > 0.0)) throw ConfigError("raceline margin leaves no room inside the track");
  // Stations stay a little inside the bound so spline overshoot between them is not clamped
  // into a kink.
  const double inner = bound - 0.1 * std::min(options.margin, bound);
  if (options.stations_per_checkpoint < 1) throw ConfigError("need at least one station per checkpoint");

  const std::size_t n = static_cast<std::size_t>(track.checkpoint_count() * options.stations_per_checkpoint);
  std::vector<double> station_s(n);
  for (std::size_t k = 0; k < n; ++k) station_s[k] = track.length() * static_cast<double>(k) / static_cast<double>(n);
  const Stations st = make_stations(track, station_s);

  // Accelerated projected gradient with backtracking. Momentum is dropped whenever the
  // extrapolated step fails to improve, which keeps the history monotone.
  std::vector<double> o(n, 0.0), o_prev(n, 0.0), y(n), trial(n);
  double current = objective(st, o);
  std::vector<double> history{current};
  double step = options.step;
  double t = 1.0;
  bool converged = false;
  int it = 0;
  for (; it < options.iterations; ++it) {
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double beta = (t - 1.0) / t_next;
    for (std::size_t j = 0; j < n; ++j) y[j] = std::clamp(o[j] + beta * (o[j] - o_prev[j]), -inner, inner);
    const double fy = beta == 0.0 ? current : objective(st, y);
    const std::vector<double> g = gradient(st, y);
    double value = std::numeric_limits<double>::infinity();
    bool moved = false;
    for (int attempt = 0; attempt < 40; ++attempt) {
      double linear = 0.0, sq = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        trial[j] = std::clamp(y[j] - step * g[j], -inner, inner);
        const double d = trial[j] - y[j];
        linear += g[j] * d;
        sq += d * d;
      }
      if (sq == 0.0) break;  // projected gradient vanished
      moved = true;
      value = objective(st, trial);
      if (value <= fy + linear + sq / (2.0 * step)) break;
      step *= 0.5;
    }
    if (moved && value < current) {
      const double relative = (current - value) / std::max(current, std::numeric_limits<double>::min());
      o_prev.swap(o);
      o.swap(trial);
      current = value;
      t = t_next;
      step *= 1.2;
      history.push_back(current);
      if (relative < options.tolerance) {
        converged = true;
        ++it;
        break;
      }
      continue;
    }
    history.push_back(current);
    if (beta == 0.0) {
      converged = true;
      ++it;
      break;
    }
    t = 1.0;
    o_prev = o;
  }

  Raceline out = raceline_from_offsets(track, std::move(station_s), std::move(o), bound);
  out.objective_history = std::move(history);
  out.iterations = it;
  out.converged = converged;
  return out;
}

std::vector<int> optimal_lane_table(const Path& raceline, const TrackModel& track) {
  const Path& center = track.centerline();
  const double reach = 2.0 * track.half_width();
  const auto& rv = raceline.vertices();
  const std::size_t m = rv.size();
  std::vector<int> lanes;
  lanes.reserve(track.checkpoints().size());
  for (double s : track.checkpoints()) {
    const Vec2 origin = center.point_at(s);
    const Vec2 nrm = center.normal_at(s);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      const Vec2& a = rv[i];
      const Vec2 e = rv[(i + 1) % m] - a;
      const double denom = cross(nrm, e);
      if (std::abs(denom) < 1e-15) continue;
      const Vec2 ao = a - origin;
      const double t = cross(ao, e) / denom;
      const double u = cross(ao, nrm) / denom;
      if (u < 0.0 || u > 1.0 || std::abs(t) > reach) continue;
      if (std::abs(t) < std::abs(best)) best = t;
    }
    if (!std::isfinite(best)) best = 0.0;
    const double clamped = std::clamp(best, -track.half_width(), track.half_width());
    lanes.push_back(*track.lane_of(clamped));
  }
  return lanes;
}

}  // namespace h2h
