#include "h2h/cbf_shield.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "h2h/errors.hpp"

namespace h2h {

void CbfConfig::validate() const {
  if (!(lambda1_0 >= 0.0 && lambda2_0 >= 0.0)) throw ConfigError("barrier gains must be non-negative");
  if (!(K_viol > 0.0)) throw ConfigError("K_viol must be positive");
  if (grid < 2 || refine_steps < 0) throw ConfigError("invalid shield solver settings");
}

BarrierGeometry barrier_geometry(const VehicleState& state, const TrackModel& track) {
  const PathProjection proj = track.centerline().project({state.x, state.y});
  return {proj.e1, wrap_angle(state.phi - proj.heading), track.half_width()};
}

BarrierEval barrier_eval(const BarrierGeometry& g, const VehicleState& s, const Control& u, const VehicleParams& params,
                         const TireSet& tires) {
  const StateDerivative d = derivatives(s, u, params, tires);
  const double sn = std::sin(g.heading_error);
  const double cs = std::cos(g.heading_error);
  const double lateral_rate = s.vx * sn + s.vy * cs;
  const double lateral_accel = d[3] * sn + d[4] * cs + s.omega * (s.vx * cs - s.vy * sn);
  BarrierEval out;
  out.h_left = g.half_width - g.e1;
  out.h_right = g.half_width + g.e1;
  out.hdot_left = -lateral_rate;
  out.hdot_right = lateral_rate;
  out.hddot_left = -lateral_accel;
  out.hddot_right = lateral_accel;
  return out;
}

BarrierEval barrier_eval(const VehicleState& state, const TrackModel& track, const Control& control,
                         const VehicleParams& params, const TireSet& tires) {
  return barrier_eval(barrier_geometry(state, track), state, control, params, tires);
}

BarrierResiduals constraint_residual(const BarrierEval& e, double lambda1, double lambda2, bool literal_sign) {
  const double sign = literal_sign ? 1.0 : -1.0;
  const double prod = lambda1 * lambda2;
  const double sum = lambda1 + lambda2;
  return {std::max(0.0, sign * (prod * e.hddot_left + sum * e.hdot_left + e.h_left)),
          std::max(0.0, sign * (prod * e.hddot_right + sum * e.hdot_right + e.h_right))};
}

double shield_objective(const Control& u, const Control& u_ref, const BarrierResiduals& r, double K_viol) {
  const double dt = u.throttle - u_ref.throttle;
  const double ds = u.steer - u_ref.steer;
  return K_viol * (r.left * r.left + r.right * r.right) + dt * dt + ds * ds;
}

ShieldResult filter_control(const Control& u_ref_in, const VehicleState& state, const TrackModel& track,
                            const CbfGains& gains, const CbfConfig& config, const VehicleParams& params,
                            const TireSet& tires) {
  const Control u_ref = clamp_control(u_ref_in, params);
  const BarrierGeometry geom = barrier_geometry(state, track);
  const auto residuals_at = [&](const Control& u) {
    return constraint_residual(barrier_eval(geom, state, u, params, tires), gains.lambda1, gains.lambda2,
                               config.literal_sign);
  };
  const auto cost_at = [&](const Control& u, BarrierResiduals* r) {
    const BarrierResiduals res = residuals_at(u);
    if (r != nullptr) *r = res;
    return shield_objective(u, u_ref, res, config.K_viol);
  };

  ShieldResult result;
  result.u_safe = u_ref;
  result.objective_ref = cost_at(u_ref, &result.residuals);
  result.objective_safe = result.objective_ref;
  if (result.residuals.left == 0.0 && result.residuals.right == 0.0) return result;

  const double dmax = params.delta_max;
  Control best = u_ref;
  double best_cost = result.objective_ref;
  const int n = config.grid;
  for (int i = 0; i < n; ++i) {
    const double throttle = -1.0 + 2.0 * i / (n - 1);
    for (int j = 0; j < n; ++j) {
      Control u;
      u.throttle = throttle;
      u.steer = -dmax + 2.0 * dmax * j / (n - 1);
      const double c = cost_at(u, nullptr);
      if (c < best_cost) {
        best_cost = c;
        best = u;
      }
    }
  }

  std::array<double, 2> step{1.0 / (n - 1), dmax / (n - 1)};
  for (int it = 0; it < config.refine_steps; ++it) {
    bool improved = false;
    for (int axis = 0; axis < 2; ++axis) {
      for (double dir : {1.0, -1.0}) {
        Control u = best;
        if (axis == 0) {
          u.throttle = std::clamp(u.throttle + dir * step[0], -1.0, 1.0);
        } else {
          u.steer = std::clamp(u.steer + dir * step[1], -dmax, dmax);
        }
        const double c = cost_at(u, nullptr);
        if (c < best_cost) {
          best_cost = c;
          best = u;
          improved = true;
        }
      }
    }
    if (!improved) {
      step[0] *= 0.5;
      step[1] *= 0.5;
    }
  }

  result.u_safe = best;
  result.objective_safe = cost_at(best, &result.residuals);
  return result;
}

double violation_penalty(const BarrierResiduals& r, double k_constraint) {
  return -k_constraint * (r.left * r.left + r.right * r.right);
}

}  // namespace h2h
