#pragma once

#include <array>
#include <string>

namespace h2h {

/// Planar vehicle state: global pose plus body-frame velocities.
struct VehicleState {
  double x = 0.0;      // m
  double y = 0.0;      // m
  double phi = 0.0;    // rad, kept in (-pi, pi]
  double vx = 0.0;     // m/s, body longitudinal
  double vy = 0.0;     // m/s, body lateral (positive left)
  double omega = 0.0;  // rad/s

  bool finite() const;
  bool operator==(const VehicleState&) const = default;
};

/// Time derivative of a VehicleState, ordered (x, y, phi, vx, vy, omega).
using StateDerivative = std::array<double, 6>;

/// Actuator command. Throttle in [-1, 1] (negative brakes), steer in [-delta_max, delta_max].
struct Control {
  double throttle = 0.0;
  double steer = 0.0;

  Control() = default;
  Control(double throttle_cmd, double steer_cmd, double delta_max = 0.4);

  bool operator==(const Control&) const = default;
};

/// Pacejka magic-formula coefficients: stiffness B, shape C, peak D (N).
struct PacejkaTriple {
  double B = 0.0;
  double C = 0.0;
  double D = 0.0;

  bool operator==(const PacejkaTriple&) const = default;
};

/// The tire coefficients used by one dynamics evaluation. Passed separately from
/// VehicleParams so curricula can substitute morphed values.
struct TireSet {
  PacejkaTriple front;
  PacejkaTriple rear;

  bool operator==(const TireSet&) const = default;
};

struct VehicleParams {
  double m = 1.0;      // kg
  double Iz = 0.02;    // kg m^2
  double lf = 0.15;    // m
  double lr = 0.15;    // m
  double B_front = 10.0;
  double C_front = 1.4;
  double D_front = 5.0;  // N
  double B_rear = 10.0;
  double C_rear = 1.4;
  double D_rear = 5.0;  // N
  double Cm1 = 8.0;     // N
  double Cm2 = 0.5;     // N s/m
  double Croll = 0.1;   // N, rolling resistance
  double Cd = 0.02;     // N s^2/m^2
  double delta_max = 0.4;  // rad
  double length = 0.5;     // m, collision body
  double width = 0.3;      // m, collision body

  TireSet tires() const { return {{B_front, C_front, D_front}, {B_rear, C_rear, D_rear}}; }

  /// Throws ConfigError when an invariant is violated.
  void validate() const;

  /// Artifact default: a 1/10-scale style car. Not taken from any published vehicle.
  static VehicleParams reference();

  bool operator==(const VehicleParams&) const = default;
};

void validate(const PacejkaTriple& triple);

/// Clamps a command into the actuator box of the given vehicle.
Control clamp_control(const Control& u, const VehicleParams& params);

/// Speed floor used inside the slip-angle denominators.
inline constexpr double kMinSlipSpeed = 0.5;

/// Integrator step bounds.
inline constexpr double kMaxStepDt = 0.05;
inline constexpr double kDefaultDt = 0.02;

double tire_lateral_force(double alpha, const PacejkaTriple& triple);

struct SlipAngles {
  double front = 0.0;
  double rear = 0.0;
};

SlipAngles slip_angles(const VehicleState& state, double steer, const VehicleParams& params);

double longitudinal_force(double throttle, double vx, const VehicleParams& params);

/// Right-hand side of the dynamic bicycle model on a flat track.
StateDerivative derivatives(const VehicleState& state, const Control& control, const VehicleParams& params,
                            const TireSet& tires);

/// One classical RK4 step. Throws ConfigError for dt outside (0, kMaxStepDt] and
/// DivergenceError when the result is not finite.
VehicleState step(const VehicleState& state, const Control& control, const VehicleParams& params,
                  const TireSet& tires, double dt);

VehicleParams load_vehicle_params(const std::string& path);
void save_vehicle_params(const VehicleParams& params, const std::string& path);

}  // namespace h2h
