#include "h2h/vehicle_dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "h2h/errors.hpp"
#include "h2h/geometry.hpp"

namespace h2h {

bool VehicleState::finite() const {
  return std::isfinite(x) && std::isfinite(y) && std::isfinite(phi) && std::isfinite(vx) && std::isfinite(vy) &&
         std::isfinite(omega);
}

Control::Control(double throttle_cmd, double steer_cmd, double delta_max)
    : throttle(std::clamp(throttle_cmd, -1.0, 1.0)), steer(std::clamp(steer_cmd, -delta_max, delta_max)) {}

void validate(const PacejkaTriple& triple) {
  if (!(triple.B > 0.0) || !(triple.D > 0.0)) throw ConfigError("Pacejka B and D must be positive");
  if (!(triple.C > 0.0 && triple.C < 2.0)) throw ConfigError("Pacejka C must lie in (0, 2)");
}

void VehicleParams::validate() const {
  const auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string("vehicle parameter must be positive: ") + name);
  };
  positive(m, "m");
  positive(Iz, "Iz");
  positive(lf, "lf");
  positive(lr, "lr");
  positive(Cm1, "Cm1");
  positive(Cm2, "Cm2");
  positive(delta_max, "delta_max");
  positive(length, "length");
  positive(width, "width");
  if (!(Croll >= 0.0) || !(Cd >= 0.0)) throw ConfigError("Croll and Cd must be non-negative");
  h2h::validate(PacejkaTriple{B_front, C_front, D_front});
  h2h::validate(PacejkaTriple{B_rear, C_rear, D_rear});
}

VehicleParams VehicleParams::reference() { return VehicleParams{}; }

Control clamp_control(const Control& u, const VehicleParams& params) {
  return Control(u.throttle, u.steer, params.delta_max);
}

double tire_lateral_force(double alpha, const PacejkaTriple& triple) {
  return triple.D * std::sin(triple.C * std::atan(triple.B * alpha));
}

SlipAngles slip_angles(const VehicleState& state, double steer, const VehicleParams& params) {
  const double vx = std::max(state.vx, kMinSlipSpeed);
  return {steer - std::atan((state.omega * params.lf + state.vy) / vx),
          std::atan((state.omega * params.lr - state.vy) / vx)};
}

double longitudinal_force(double throttle, double vx, const VehicleParams& params) {
  return (params.Cm1 - params.Cm2 * vx) * throttle - params.Croll - params.Cd * vx * vx;
}

StateDerivative derivatives(const VehicleState& s, const Control& u, const VehicleParams& p, const TireSet& tires) {
  const SlipAngles alpha = slip_angles(s, u.steer, p);
  const double f_rx = longitudinal_force(u.throttle, s.vx, p);
  const double f_fy = tire_lateral_force(alpha.front, tires.front);
  const double f_ry = tire_lateral_force(alpha.rear, tires.rear);
  const double cos_phi = std::cos(s.phi);
  const double sin_phi = std::sin(s.phi);
  const double cos_delta = std::cos(u.steer);
  const double sin_delta = std::sin(u.steer);
  // Pitch/roll gravity terms vanish on a planar track.
  return {s.vx * cos_phi - s.vy * sin_phi,
          s.vx * sin_phi + s.vy * cos_phi,
          s.omega,
          (f_rx - f_fy * sin_delta + p.m * s.vy * s.omega) / p.m,
          (f_ry + f_fy * cos_delta - p.m * s.vx * s.omega) / p.m,
          (f_fy * p.lf * cos_delta - f_ry * p.lr) / p.Iz};
}

namespace {

VehicleState advance(const VehicleState& s, const StateDerivative& k, double h) {
  return {s.x + h * k[0], s.y + h * k[1], s.phi + h * k[2], s.vx + h * k[3], s.vy + h * k[4], s.omega + h * k[5]};
}

}  // namespace

VehicleState step(const VehicleState& state, const Control& control, const VehicleParams& params,
                  const TireSet& tires, double dt) {
  if (!(dt > 0.0 && dt <= kMaxStepDt)) throw ConfigError("integration step must lie in (0, 0.05] s");
  const StateDerivative k1 = derivatives(state, control, params, tires);
  const StateDerivative k2 = derivatives(advance(state, k1, 0.5 * dt), control, params, tires);
  const StateDerivative k3 = derivatives(advance(state, k2, 0.5 * dt), control, params, tires);
  const StateDerivative k4 = derivatives(advance(state, k3, dt), control, params, tires);
  StateDerivative blend{};
  for (std::size_t i = 0; i < blend.size(); ++i) blend[i] = (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0;
  VehicleState next = advance(state, blend, dt);
  if (!next.finite()) throw DivergenceError("vehicle state became non-finite during integration");
  next.phi = wrap_angle(next.phi);
  return next;
}

}  // namespace h2h
