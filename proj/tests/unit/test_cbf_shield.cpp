#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "h2h/cbf_shield.hpp"
#include "h2h/errors.hpp"

namespace h2h {
namespace {

const VehicleParams kP = VehicleParams::reference();

const TrackModel& corridor() {
  static const TrackModel t = make_oval(200.0, 10.0, 1.0);
  return t;
}

// Pose relative to the straight: e1 is y + 10, heading error is phi.
VehicleState at(double e1, double heading, double vx, double vy = 0.0, double omega = 0.0) {
  return {0.0, -10.0 + e1, heading, vx, vy, omega};
}

TEST(Barrier, CenteredAlignedIsSymmetric) {
  const BarrierEval e = barrier_eval(at(0.0, 0.0, 3.0), corridor(), {}, kP, kP.tires());
  EXPECT_NEAR(e.h_left, 1.0, 1e-12);
  EXPECT_NEAR(e.h_right, 1.0, 1e-12);
  EXPECT_NEAR(e.hdot_left, 0.0, 1e-12);
  EXPECT_NEAR(e.hdot_right, 0.0, 1e-12);
}

TEST(Barrier, SumIsTwiceHalfWidth) {
  const TrackModel oval = make_oval(12.0, 5.0, 1.0);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> s(0.0, oval.length()), e(-1.2, 1.2), h(-1, 1);
  for (int i = 0; i < 1000; ++i) {
    const Pose2 p = from_frenet({s(rng), e(rng), h(rng)}, oval.centerline());
    const BarrierEval b = barrier_eval({p.position.x(), p.position.y(), p.heading, 2.0, 0.1, 0.2}, oval,
                                       {0.3, 0.1}, kP, kP.tires());
    EXPECT_DOUBLE_EQ(b.h_left + b.h_right, 2.0);
  }
}

TEST(Barrier, LeftwardDriftShrinksLeftClearance) {
  const BarrierEval e = barrier_eval(at(0.2, 0.0, 2.0, 0.3), corridor(), {}, kP, kP.tires());
  EXPECT_NEAR(e.hdot_left, -0.3, 1e-12);
  EXPECT_NEAR(e.hdot_right, 0.3, 1e-12);
}

// h along a short rollout at fixed control, for finite differences.
std::array<double, 3> h_triplet(VehicleState s, const Control& u, double dt, bool left) {
  std::array<double, 3> out{};
  for (int i = 0; i < 3; ++i) {
    const BarrierGeometry g = barrier_geometry(s, corridor());
    out[static_cast<std::size_t>(i)] = left ? g.half_width - g.e1 : g.half_width + g.e1;
    s = step(s, u, kP, kP.tires(), dt);
  }
  return out;
}

TEST(Barrier, DerivativesMatchFiniteDifferences) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> e(-0.5, 0.5), h(-0.4, 0.4), vx(1.0, 5.0), vy(-0.4, 0.4), om(-1.0, 1.0),
      thr(-1, 1), st(-0.4, 0.4);
  const double dt = 1e-4;
  for (int i = 0; i < 200; ++i) {
    const VehicleState s = at(e(rng), h(rng), vx(rng), vy(rng), om(rng));
    const Control u(thr(rng), st(rng));
    // Evaluate at the middle sample of the triplet.
    const VehicleState mid = step(s, u, kP, kP.tires(), dt);
    const BarrierEval b = barrier_eval(mid, corridor(), u, kP, kP.tires());
    for (bool left : {true, false}) {
      const auto hs = h_triplet(s, u, dt, left);
      const double d1 = (hs[2] - hs[0]) / (2 * dt);
      const double d2 = (hs[2] - 2 * hs[1] + hs[0]) / (dt * dt);
      const double hd = left ? b.hdot_left : b.hdot_right;
      const double hdd = left ? b.hddot_left : b.hddot_right;
      EXPECT_NEAR(hd, d1, 1e-6 * std::max(1.0, std::abs(d1)));
      EXPECT_NEAR(hdd, d2, 1e-2 * std::max(1.0, std::abs(d2)));
    }
  }
}

TEST(Residual, SafeInterior) {
  BarrierEval e;
  e.h_left = e.h_right = 1.0;
  const BarrierResiduals r = constraint_residual(e, 1.0, 1.0);
  EXPECT_EQ(r.left, 0.0);
  EXPECT_EQ(r.right, 0.0);
}

TEST(Residual, ZeroGainsReduceToStateViolation) {
  const BarrierEval e = barrier_eval(at(-1.2, 0.0, 2.0), corridor(), {}, kP, kP.tires());
  ASSERT_LT(e.h_right, 0.0);
  const BarrierResiduals r = constraint_residual(e, 0.0, 0.0);
  EXPECT_DOUBLE_EQ(r.right, -e.h_right);
  EXPECT_EQ(r.left, 0.0);
}

TEST(Residual, MatchesExpressionAndLiteralFlag) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> x(-3, 3), lam(0, 1);
  for (int i = 0; i < 500; ++i) {
    BarrierEval e{x(rng), x(rng), x(rng), x(rng), x(rng), x(rng)};
    const double l1 = lam(rng), l2 = lam(rng);
    const double inner_l = l1 * l2 * e.hddot_left + (l1 + l2) * e.hdot_left + e.h_left;
    const double inner_r = l1 * l2 * e.hddot_right + (l1 + l2) * e.hdot_right + e.h_right;
    const BarrierResiduals r = constraint_residual(e, l1, l2);
    EXPECT_NEAR(r.left, std::max(0.0, -inner_l), 1e-12);
    EXPECT_NEAR(r.right, std::max(0.0, -inner_r), 1e-12);
    const BarrierResiduals lit = constraint_residual(e, l1, l2, true);
    EXPECT_NEAR(lit.left, std::max(0.0, inner_l), 1e-12);
    EXPECT_NEAR(lit.right, std::max(0.0, inner_r), 1e-12);
  }
}

TEST(Filter, ZeroGainsLeaveControlUntouched) {
  const TrackModel oval = make_oval(12.0, 5.0, 1.0);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> s(0.0, oval.length()), e(-0.95, 0.95), h(-1, 1), v(0, 6), thr(-1, 1),
      st(-0.4, 0.4);
  for (int i = 0; i < 2000; ++i) {
    const Pose2 p = from_frenet({s(rng), e(rng), h(rng)}, oval.centerline());
    const VehicleState state{p.position.x(), p.position.y(), p.heading, v(rng), 0.0, 0.0};
    const Control u(thr(rng), st(rng));
    const ShieldResult r = filter_control(u, state, oval, {0.0, 0.0}, CbfConfig{}, kP, kP.tires());
    EXPECT_EQ(r.u_safe, u);
  }
}

TEST(Filter, SteersAwayFromLeftWall) {
  const VehicleState s = at(0.5, 0.3, 4.0);
  const Control u_ref(0.5, 0.0);
  const CbfGains g{0.25, 0.25};
  const CbfConfig cfg;
  const ShieldResult r = filter_control(u_ref, s, corridor(), g, cfg, kP, kP.tires());
  ASSERT_GT(r.objective_ref, 0.0);

  // Dense grid oracle over the actuator box.
  double best = 1e300;
  Control best_u;
  for (int i = 0; i <= 100; ++i) {
    for (int j = 0; j <= 100; ++j) {
      const Control u(-1.0 + 0.02 * i, -0.4 + 0.008 * j);
      const BarrierResiduals res =
          constraint_residual(barrier_eval(s, corridor(), u, kP, kP.tires()), g.lambda1, g.lambda2);
      const double c = shield_objective(u, u_ref, res, cfg.K_viol);
      if (c < best) {
        best = c;
        best_u = u;
      }
    }
  }
  EXPECT_LT(best_u.steer, u_ref.steer);
  EXPECT_LT(r.u_safe.steer, u_ref.steer);
  EXPECT_LE(r.objective_safe, r.objective_ref);
  EXPECT_LE(r.objective_safe, best * (1.0 + 1e-3) + 1e-9);
}

TEST(Filter, NeverWorseAndInsideBox) {
  const TrackModel oval = make_oval(12.0, 5.0, 1.0);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> s(0.0, oval.length()), e(-1.0, 1.0), h(-1, 1), v(0, 6), thr(-1, 1),
      st(-0.4, 0.4), om(-2, 2);
  for (int i = 0; i < 300; ++i) {
    const Pose2 p = from_frenet({s(rng), e(rng), h(rng)}, oval.centerline());
    const VehicleState state{p.position.x(), p.position.y(), p.heading, v(rng), 0.1, om(rng)};
    const Control u(thr(rng), st(rng));
    const ShieldResult r = filter_control(u, state, oval, {0.5, 0.5}, CbfConfig{}, kP, kP.tires());
    EXPECT_LE(r.objective_safe, r.objective_ref);
    EXPECT_LE(std::abs(r.u_safe.throttle), 1.0);
    EXPECT_LE(std::abs(r.u_safe.steer), kP.delta_max);
  }
}

TEST(Filter, ConfigValidation) {
  CbfConfig c;
  c.K_viol = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = CbfConfig{};
  c.lambda1_0 = -1.0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Penalty, Examples) {
  EXPECT_EQ(violation_penalty({0.0, 0.0}, 2.0), -0.0);
  EXPECT_DOUBLE_EQ(violation_penalty({0.0, 0.5}, 2.0), -0.5);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> c(0, 2), k(0, 3);
  for (int i = 0; i < 100; ++i) {
    const double a = c(rng), b = c(rng), kk = k(rng);
    EXPECT_NEAR(violation_penalty({a, b}, kk), -kk * (a * a + b * b), 1e-12);
  }
}

}  // namespace
}  // namespace h2h
