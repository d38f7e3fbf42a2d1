#pragma once

#include <cstdint>

#include "h2h/vehicle_dynamics.hpp"

namespace h2h {

struct CurriculumSchedule {
  double t_start = 500000.0;
  double t_end = 1500000.0;
  TireSet base_tires = VehicleParams::reference().tires();
  double lambda1_0 = 0.25;
  double lambda2_0 = 0.25;

  void validate() const;
};

/// Physics bundle applied to an environment at a given training step.
struct EnvPhysicsConfig {
  double t_s = 1.0;
  TireSet tires = VehicleParams::reference().tires();
  double lambda1 = 0.0;
  double lambda2 = 0.0;
};

/// Clamped linear progress of training between t_start and t_end.
double time_scale(double t, const CurriculumSchedule& schedule);

/// Morphs a base Pacejka triple: t_s = 0 gives a grippier, near-kinematic tire
/// (doubled peak, flattened shape) and t_s = 1 recovers the base triple exactly.
/// The cornering stiffness B*C*D scales as 2^(1 - t_s).
PacejkaTriple tire_params_at(double t_s, const PacejkaTriple& base);

struct CbfGains {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
};

/// Linear decay of both barrier gains to zero at t_s = 1.
CbfGains cbf_lambdas_at(double t_s, const CurriculumSchedule& schedule);

EnvPhysicsConfig environment_at(double t, const CurriculumSchedule& schedule);

}  // namespace h2h
