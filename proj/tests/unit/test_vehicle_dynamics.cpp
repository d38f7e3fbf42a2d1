#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "h2h/errors.hpp"
#include "h2h/vehicle_dynamics.hpp"
#include "oracles.hpp"

namespace h2h {
namespace {

const VehicleParams kRef = VehicleParams::reference();

VehicleState random_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(-20.0, 20.0), ang(-3.1, 3.1), vx(-1.0, 8.0), vy(-1.5, 1.5),
      om(-4.0, 4.0);
  return {pos(rng), pos(rng), ang(rng), vx(rng), vy(rng), om(rng)};
}

TEST(TireForce, ZeroAtZeroSlip) { EXPECT_EQ(tire_lateral_force(0.0, {10, 1.4, 5}), 0.0); }

TEST(TireForce, OddAndBounded) {
  const PacejkaTriple t{10.0, 1.4, 5.0};
  for (int i = -2000; i <= 2000; ++i) {
    const double a = i * 1e-3;
    EXPECT_DOUBLE_EQ(tire_lateral_force(-a, t), -tire_lateral_force(a, t));
    EXPECT_LE(std::abs(tire_lateral_force(a, t)), t.D);
  }
}

TEST(TireForce, SlopeAtOriginIsBCD) {
  const PacejkaTriple t{8.0, 1.3, 4.0};
  const double h = 1e-6;
  const double slope = (tire_lateral_force(h, t) - tire_lateral_force(-h, t)) / (2 * h);
  EXPECT_NEAR(slope / (t.B * t.C * t.D), 1.0, 1e-4);
}

TEST(SlipAngles, StraightRolling) {
  const SlipAngles a = slip_angles({0, 0, 0, 3.0, 0, 0}, 0.0, kRef);
  EXPECT_EQ(a.front, 0.0);
  EXPECT_EQ(a.rear, 0.0);
}

TEST(SlipAngles, PureSteerOffset) {
  const SlipAngles a = slip_angles({0, 0, 0, 3.0, 0, 0}, 0.1, kRef);
  EXPECT_DOUBLE_EQ(a.front, 0.1);
  EXPECT_EQ(a.rear, 0.0);
}

TEST(SlipAngles, MatchesFormulaWithSpeedFloor) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> st(-0.4, 0.4);
  for (int i = 0; i < 500; ++i) {
    const VehicleState s = random_state(rng);
    const double d = st(rng);
    const double u = std::max(s.vx, 0.5);
    const SlipAngles a = slip_angles(s, d, kRef);
    EXPECT_NEAR(a.front, d - std::atan((s.omega * kRef.lf + s.vy) / u), 1e-14);
    EXPECT_NEAR(a.rear, std::atan((s.omega * kRef.lr - s.vy) / u), 1e-14);
  }
}

TEST(LongitudinalForce, Substitution) {
  EXPECT_DOUBLE_EQ(longitudinal_force(0.0, 0.0, kRef), -kRef.Croll);
  EXPECT_DOUBLE_EQ(longitudinal_force(1.0, 0.0, kRef), kRef.Cm1 - kRef.Croll);
  for (double d = -1.0; d <= 1.0; d += 0.25) {
    for (double v = 0.0; v <= 10.0; v += 0.5) {
      EXPECT_NEAR(longitudinal_force(d, v, kRef),
                  kRef.Cm1 * d - kRef.Cm2 * v * d - kRef.Croll - kRef.Cd * v * v, 1e-12);
    }
  }
}

TEST(Derivatives, RestHasOnlyRollingTerm) {
  const StateDerivative d = derivatives({}, {}, kRef, kRef.tires());
  EXPECT_DOUBLE_EQ(d[3], -kRef.Croll / kRef.m);
  for (std::size_t i : {0, 1, 2, 4, 5}) EXPECT_EQ(d[i], 0.0) << i;
}

TEST(Derivatives, StraightDrivingHasNoYaw) {
  const StateDerivative d = derivatives({1, 2, 0.3, 4.0, 0, 0}, {0.5, 0.0}, kRef, kRef.tires());
  EXPECT_EQ(d[2], 0.0);
  EXPECT_EQ(d[4], 0.0);
  EXPECT_EQ(d[5], 0.0);
}

TEST(Derivatives, MatchesIndependentOracle) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> thr(-1, 1), st(-0.4, 0.4);
  for (int i = 0; i < 1000; ++i) {
    const VehicleState s = random_state(rng);
    const Control u(thr(rng), st(rng));
    const StateDerivative d = derivatives(s, u, kRef, kRef.tires());
    const auto o = oracle::bicycle_rhs(s, u.throttle, u.steer, kRef, kRef.tires());
    for (std::size_t k = 0; k < 6; ++k) EXPECT_NEAR(d[k], o[k], 1e-12 * std::max(1.0, std::abs(o[k])));
  }
}

TEST(Control, ClampedOnConstruction) {
  const Control u(3.0, -1.0, 0.4);
  EXPECT_EQ(u.throttle, 1.0);
  EXPECT_EQ(u.steer, -0.4);
}

TEST(Step, FixedPointWithoutRollingResistance) {
  VehicleParams p = kRef;
  p.Croll = 0.0;
  const VehicleState s{1.0, -2.0, 0.7, 0.0, 0.0, 0.0};
  EXPECT_EQ(step(s, {}, p, p.tires(), 0.02), s);
}

TEST(Step, RejectsBadDt) {
  EXPECT_THROW(step({}, {}, kRef, kRef.tires(), 0.0), ConfigError);
  EXPECT_THROW(step({}, {}, kRef, kRef.tires(), 0.06), ConfigError);
}

TEST(Step, RejectsNonFiniteResult) {
  VehicleState s;
  s.vx = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(step(s, {}, kRef, kRef.tires(), 0.02), DivergenceError);
}

VehicleState rollout(double dt, double horizon) {
  VehicleState s{0, 0, 0, 2.0, 0.0, 0.0};
  const int n = static_cast<int>(std::lround(horizon / dt));
  for (int i = 0; i < n; ++i) s = step(s, {0.6, 0.15}, kRef, kRef.tires(), dt);
  return s;
}

TEST(Step, RefinementReference) {
  const VehicleState coarse = rollout(0.01, 1.0);
  const VehicleState fine = rollout(0.001, 1.0);
  EXPECT_LT(std::hypot(coarse.x - fine.x, coarse.y - fine.y), 1e-3);
}

TEST(Step, ConvergenceOrderAtLeast3_8) {
  const VehicleState ref = rollout(0.04 / 16, 1.0);
  const auto err = [&](double dt) {
    const VehicleState s = rollout(dt, 1.0);
    return std::hypot(s.x - ref.x, s.y - ref.y) + std::abs(s.vx - ref.vx) + std::abs(s.vy - ref.vy) +
           std::abs(s.omega - ref.omega);
  };
  const double order = std::log2(err(0.04) / err(0.02));
  EXPECT_GE(order, 3.8);
}

TEST(Step, MirrorSymmetry) {
  VehicleState a{0.0, 0.0, 0.2, 3.0, 0.1, 0.3};
  VehicleState b{0.0, 0.0, -0.2, 3.0, -0.1, -0.3};
  for (int i = 0; i < 200; ++i) {
    const double steer = 0.2 * std::sin(0.05 * i);
    a = step(a, {0.4, steer}, kRef, kRef.tires(), 0.02);
    b = step(b, {0.4, -steer}, kRef, kRef.tires(), 0.02);
  }
  EXPECT_DOUBLE_EQ(a.x, b.x);
  EXPECT_DOUBLE_EQ(a.y, -b.y);
  EXPECT_DOUBLE_EQ(a.phi, -b.phi);
  EXPECT_DOUBLE_EQ(a.vx, b.vx);
  EXPECT_DOUBLE_EQ(a.vy, -b.vy);
  EXPECT_DOUBLE_EQ(a.omega, -b.omega);
}

TEST(Step, HeadingStaysWrapped) {
  VehicleState s{0, 0, 3.1, 3.0, 0, 2.0};
  for (int i = 0; i < 300; ++i) {
    s = step(s, {0.5, 0.4}, kRef, kRef.tires(), 0.02);
    EXPECT_GT(s.phi, -M_PI);
    EXPECT_LE(s.phi, M_PI);
  }
}

TEST(VehicleParams, ValidateRejectsBadShape) {
  VehicleParams p = kRef;
  p.C_front = 2.0;
  EXPECT_THROW(p.validate(), ConfigError);
  p = kRef;
  p.Cd = -1.0;
  EXPECT_THROW(p.validate(), ConfigError);
  EXPECT_NO_THROW(kRef.validate());
}

}  // namespace
}  // namespace h2h
