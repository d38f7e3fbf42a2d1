#pragma once

#include <Eigen/Dense>
#include <vector>

#include "h2h/raceline.hpp"
#include "h2h/vehicle_dynamics.hpp"

namespace h2h {

using Matrix4 = Eigen::Matrix4d;
using Vector4 = Eigen::Vector4d;
using RowVector4 = Eigen::RowVector4d;

struct LqrConfig {
  /// Weights on (e1, de1, e2, de2) and on the steering input.
  Vector4 q{1.0, 0.05, 0.5, 0.01};
  double r = 1.0;
  double dt = 0.02;
  int max_iterations = 10000;
  double tolerance = 1e-12;
  /// Gain table speeds, m/s.
  double v_min = 0.5;
  double v_max = 12.0;
  double v_step = 0.25;
  double kp_speed = 0.8;
  /// Lateral acceleration and braking used for the raceline speed profile.
  double max_lateral_accel = 6.0;
  double max_brake = 6.0;
};

struct LateralModel {
  Matrix4 A;
  Eigen::Vector4d B;
};

/// Linearized lateral-error dynamics about straight-line motion at speed vx, using the
/// axle cornering stiffness B*C*D of each tire.
LateralModel lateral_error_model(double vx, const VehicleParams& params, const TireSet& tires);

/// Bilinear (Tustin) discretization.
LateralModel discretize_bilinear(const LateralModel& model, double dt);

struct DareSolution {
  Matrix4 P;
  RowVector4 K;
  int iterations = 0;
  bool converged = false;
};

/// Fixed-point iteration of the discrete Riccati recursion.
DareSolution solve_dare(const LateralModel& discrete, const Vector4& q, double r, int max_iterations,
                        double tolerance);

/// Lateral tracking errors of a state relative to the raceline shifted by lateral_offset.
struct TrackingError {
  Vector4 x = Vector4::Zero();  // e1, de1, e2, de2
  double s = 0.0;               // raceline arc length
  double curvature = 0.0;       // raceline curvature at s
};

TrackingError tracking_error(const VehicleState& state, const Raceline& raceline, double lateral_offset = 0.0);

/// Raceline tracker: LQR steering with curvature feedforward and proportional throttle.
class LqrTracker {
 public:
  LqrTracker(const Raceline& raceline, VehicleParams params, LqrConfig config = {});
  LqrTracker(const Raceline& raceline, VehicleParams params, TireSet tires, LqrConfig config);

  /// Gain for a forward speed (nearest table entry).
  const RowVector4& gain(double vx) const;
  double feedforward(double vx, double curvature) const;
  /// Speed the raceline allows at arc length s (lateral and braking limited).
  double profile_speed(double s) const;

  Control control(const VehicleState& state, double target_speed, double lateral_offset = 0.0) const;

 private:
  Raceline raceline_;
  VehicleParams params_;
  TireSet tires_;
  LqrConfig config_;
  std::vector<RowVector4> gains_;
  std::vector<double> profile_;  // per raceline vertex
};

}  // namespace h2h
