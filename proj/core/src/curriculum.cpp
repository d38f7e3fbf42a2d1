#include "h2h/curriculum.hpp"

#include <algorithm>
#include <cmath>

#include "h2h/errors.hpp"

namespace h2h {

void CurriculumSchedule::validate() const {
  if (!(t_start >= 0.0 && t_start < t_end)) throw ConfigError("curriculum needs 0 <= t_start < t_end");
  if (!(lambda1_0 >= 0.0 && lambda2_0 >= 0.0)) throw ConfigError("barrier gain bases must be non-negative");
  h2h::validate(base_tires.front);
  h2h::validate(base_tires.rear);
}

double time_scale(double t, const CurriculumSchedule& schedule) {
  return std::max(0.0, std::min(1.0, (t - schedule.t_start) / (schedule.t_end - schedule.t_start)));
}

PacejkaTriple tire_params_at(double t_s, const PacejkaTriple& base) {
  const double scale = std::exp2(1.0 - t_s);
  PacejkaTriple out;
  out.D = scale * base.D;
  out.C = std::pow(base.C, std::exp2(t_s - 1.0));
  // Grouped so that t_s = 1 reduces to B0 * (1 * 1) bit-exactly.
  out.B = base.B * (scale * ((base.D * base.C) / (out.D * out.C)));
  return out;
}

CbfGains cbf_lambdas_at(double t_s, const CurriculumSchedule& schedule) {
  return {schedule.lambda1_0 * (1.0 - t_s), schedule.lambda2_0 * (1.0 - t_s)};
}

EnvPhysicsConfig environment_at(double t, const CurriculumSchedule& schedule) {
  EnvPhysicsConfig cfg;
  cfg.t_s = time_scale(t, schedule);
  cfg.tires.front = tire_params_at(cfg.t_s, schedule.base_tires.front);
  cfg.tires.rear = tire_params_at(cfg.t_s, schedule.base_tires.rear);
  const CbfGains gains = cbf_lambdas_at(cfg.t_s, schedule);
  cfg.lambda1 = gains.lambda1;
  cfg.lambda2 = gains.lambda2;
  return cfg;
}

}  // namespace h2h
