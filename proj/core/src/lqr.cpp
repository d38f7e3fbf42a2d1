#include "h2h/lqr.hpp"

#include <algorithm>
#include <cmath>

#include "h2h/errors.hpp"

namespace h2h {

LateralModel lateral_error_model(double vx, const VehicleParams& p, const TireSet& tires) {
  const double cf = tires.front.B * tires.front.C * tires.front.D;
  const double cr = tires.rear.B * tires.rear.C * tires.rear.D;
  const double v = std::max(vx, kMinSlipSpeed);
  LateralModel m;
  m.A.setZero();
  m.A(0, 1) = 1.0;
  m.A(1, 1) = -(cf + cr) / (p.m * v);
  m.A(1, 2) = (cf + cr) / p.m;
  m.A(1, 3) = (-cf * p.lf + cr * p.lr) / (p.m * v);
  m.A(2, 3) = 1.0;
  m.A(3, 1) = -(cf * p.lf - cr * p.lr) / (p.Iz * v);
  m.A(3, 2) = (cf * p.lf - cr * p.lr) / p.Iz;
  m.A(3, 3) = -(cf * p.lf * p.lf + cr * p.lr * p.lr) / (p.Iz * v);
  m.B << 0.0, cf / p.m, 0.0, cf * p.lf / p.Iz;
  return m;
}

LateralModel discretize_bilinear(const LateralModel& model, double dt) {
  const Matrix4 I = Matrix4::Identity();
  const Matrix4 inv = (I - 0.5 * dt * model.A).inverse();
  return {inv * (I + 0.5 * dt * model.A), inv * model.B * dt};
}

DareSolution solve_dare(const LateralModel& d, const Vector4& q, double r, int max_iterations, double tolerance) {
  const Matrix4 Q = q.asDiagonal();
  DareSolution out;
  out.P = Q;
  for (out.iterations = 0; out.iterations < max_iterations; ++out.iterations) {
    const double denom = r + d.B.dot(out.P * d.B);
    const RowVector4 bpa = d.B.transpose() * out.P * d.A;
    const Matrix4 next = Q + d.A.transpose() * out.P * d.A - bpa.transpose() * bpa / denom;
    const double change = (next - out.P).cwiseAbs().maxCoeff();
    out.P = next;
    if (change <= tolerance * std::max(1.0, out.P.cwiseAbs().maxCoeff())) {
      out.converged = true;
      ++out.iterations;
      break;
    }
  }
  if (!out.P.allFinite()) throw DivergenceError("Riccati iteration diverged");
  out.K = (d.B.transpose() * out.P * d.A) / (r + d.B.dot(out.P * d.B));
  return out;
}

namespace {

double curvature_at(const Raceline& rl, double s) {
  const auto& arc = rl.path.arclength();
  const double ws = rl.path.wrap_s(s);
  auto it = std::upper_bound(arc.begin(), arc.end(), ws);
  const std::size_t i = static_cast<std::size_t>(std::distance(arc.begin(), it)) - 1;
  const std::size_t j = (i + 1) % arc.size();
  const double s1 = j == 0 ? rl.path.length() : arc[j];
  const double t = std::clamp((ws - arc[i]) / (s1 - arc[i]), 0.0, 1.0);
  return (1.0 - t) * rl.curvature[i] + t * rl.curvature[j];
}

}  // namespace

TrackingError tracking_error(const VehicleState& state, const Raceline& raceline, double lateral_offset) {
  const PathProjection proj = raceline.path.project({state.x, state.y});
  TrackingError out;
  out.s = proj.s;
  out.curvature = curvature_at(raceline, proj.s);
  const double e1 = proj.e1 - lateral_offset;
  const double e2 = wrap_angle(state.phi - proj.heading);
  const double s_dot = (state.vx * std::cos(e2) - state.vy * std::sin(e2)) / std::max(0.1, 1.0 - out.curvature * proj.e1);
  out.x << e1, state.vx * std::sin(e2) + state.vy * std::cos(e2), e2, state.omega - out.curvature * s_dot;
  return out;
}

LqrTracker::LqrTracker(const Raceline& raceline, VehicleParams params, LqrConfig config)
    : LqrTracker(raceline, params, params.tires(), config) {}

LqrTracker::LqrTracker(const Raceline& raceline, VehicleParams params, TireSet tires, LqrConfig config)
    : raceline_(raceline), params_(params), tires_(tires), config_(config) {
  params_.validate();
  if (!(config_.v_step > 0.0 && config_.v_max >= config_.v_min && config_.v_min > 0.0)) {
    throw ConfigError("invalid LQR gain table speeds");
  }
  if (!(config_.r > 0.0) || !(config_.dt > 0.0)) throw ConfigError("invalid LQR weights");
  const int n = static_cast<int>(std::floor((config_.v_max - config_.v_min) / config_.v_step)) + 1;
  for (int i = 0; i < n; ++i) {
    const double v = config_.v_min + i * config_.v_step;
    const LateralModel d = discretize_bilinear(lateral_error_model(v, params_, tires_), config_.dt);
    gains_.push_back(solve_dare(d, config_.q, config_.r, config_.max_iterations, config_.tolerance).K);
  }

  const auto& arc = raceline_.path.arclength();
  const std::size_t m = arc.size();
  profile_.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double k = std::abs(raceline_.curvature[i]);
    profile_[i] = k > 1e-9 ? std::min(config_.v_max, std::sqrt(config_.max_lateral_accel / k)) : config_.v_max;
  }
  for (int sweep = 0; sweep < 2; ++sweep) {
    for (std::size_t k = m; k-- > 0;) {
      const std::size_t next = (k + 1) % m;
      const double ds = next == 0 ? raceline_.path.length() - arc[k] : arc[next] - arc[k];
      profile_[k] = std::min(profile_[k], std::sqrt(profile_[next] * profile_[next] + 2.0 * config_.max_brake * ds));
    }
  }
}

const RowVector4& LqrTracker::gain(double vx) const {
  const double idx = std::round((vx - config_.v_min) / config_.v_step);
  const auto i = static_cast<std::size_t>(std::clamp(idx, 0.0, static_cast<double>(gains_.size() - 1)));
  return gains_[i];
}

double LqrTracker::feedforward(double vx, double curvature) const {
  const double cf = tires_.front.B * tires_.front.C * tires_.front.D;
  const double cr = tires_.rear.B * tires_.rear.C * tires_.rear.D;
  const double wheelbase = params_.lf + params_.lr;
  const double kv = params_.lr * params_.m / (cf * wheelbase) - params_.lf * params_.m / (cr * wheelbase);
  return curvature * (wheelbase + kv * vx * vx);
}

double LqrTracker::profile_speed(double s) const {
  const auto& arc = raceline_.path.arclength();
  const double ws = raceline_.path.wrap_s(s);
  auto it = std::upper_bound(arc.begin(), arc.end(), ws);
  const std::size_t i = static_cast<std::size_t>(std::distance(arc.begin(), it)) - 1;
  return std::min(profile_[i], profile_[(i + 1) % profile_.size()]);
}

Control LqrTracker::control(const VehicleState& state, double target_speed, double lateral_offset) const {
  const TrackingError err = tracking_error(state, raceline_, lateral_offset);
  const double steer = -gain(state.vx).dot(err.x) + feedforward(state.vx, err.curvature);
  const double v_ref = std::min(target_speed, profile_speed(err.s));
  const double resist = params_.Croll + params_.Cd * v_ref * v_ref;
  const double drive = std::max(1e-6, params_.Cm1 - params_.Cm2 * v_ref);
  const double throttle = resist / drive + config_.kp_speed * (v_ref - state.vx);
  return clamp_control(Control(throttle, steer, 1e9), params_);
}

}  // namespace h2h
