#pragma once

#include "h2h/curriculum.hpp"
#include "h2h/track.hpp"
#include "h2h/vehicle_dynamics.hpp"

namespace h2h {

struct CbfConfig {
  double lambda1_0 = 0.25;  // s
  double lambda2_0 = 0.25;  // s
  double K_viol = 1.0e4;
  int grid = 17;
  int refine_steps = 20;
  /// Use max(0, +(...)) as printed instead of the default max(0, -(...)).
  bool literal_sign = false;

  void validate() const;
};

/// Second-order lane-keeping barriers. h_left is the clearance to the left wall
/// (w - e1) and h_right the clearance to the right wall (w + e1); derivatives use the
/// heading error against the local centerline tangent and the body accelerations of
/// the dynamics at the evaluated control.
struct BarrierEval {
  double h_left = 0.0;
  double h_right = 0.0;
  double hdot_left = 0.0;
  double hdot_right = 0.0;
  double hddot_left = 0.0;
  double hddot_right = 0.0;
};

struct BarrierResiduals {
  double left = 0.0;
  double right = 0.0;
};

/// Control-independent part of a barrier evaluation.
struct BarrierGeometry {
  double e1 = 0.0;
  double heading_error = 0.0;
  double half_width = 0.0;
};

BarrierGeometry barrier_geometry(const VehicleState& state, const TrackModel& track);

BarrierEval barrier_eval(const BarrierGeometry& geometry, const VehicleState& state, const Control& control,
                         const VehicleParams& params, const TireSet& tires);

BarrierEval barrier_eval(const VehicleState& state, const TrackModel& track, const Control& control,
                         const VehicleParams& params, const TireSet& tires);

/// C = max(0, -(l1 l2 hddot + (l1 + l2) hdot + h)); positive means violation.
BarrierResiduals constraint_residual(const BarrierEval& eval, double lambda1, double lambda2,
                                     bool literal_sign = false);

/// K_viol (C_l^2 + C_r^2) + |u - u_ref|^2
double shield_objective(const Control& u, const Control& u_ref, const BarrierResiduals& residuals, double K_viol);

struct ShieldResult {
  Control u_safe;
  BarrierResiduals residuals;  // at u_safe
  double objective_ref = 0.0;
  double objective_safe = 0.0;
};

/// Minimally invasive correction of u_ref over the actuator box: coarse grid search
/// followed by coordinate refinement. Returns u_ref untouched when it carries no
/// barrier penalty.
ShieldResult filter_control(const Control& u_ref, const VehicleState& state, const TrackModel& track,
                            const CbfGains& gains, const CbfConfig& config, const VehicleParams& params,
                            const TireSet& tires);

/// -k (C_l^2 + C_r^2)
double violation_penalty(const BarrierResiduals& residuals, double k_constraint);

}  // namespace h2h
