#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>
#include <Eigen/Core>
#include <unsupported/Eigen/AutoDiff>

#include "aaslip/error.hpp"
#include "aaslip/model.hpp"

namespace aaslip {
namespace {

StanceState state(double x, double y, double xd = 0, double yd = 0, double r0 = 1,
                  double r0d = 0) {
  return {x, y, xd, yd, r0, r0d};
}

// Plain ASLIP right-hand side, written out without any ankle term.
void aslip_rhs(const StanceState& s, const ModelParams& p, double& xdd, double& ydd) {
  const double r = std::sqrt(s.x * s.x + s.y * s.y);
  const double rdot = (s.x * s.xdot + s.y * s.ydot) / r;
  const double f = p.stiffness * (s.r0 - r) + p.damping * (s.r0dot - rdot);
  const double mr = p.mass * r;
  xdd = (s.x * f) / mr;
  ydd = (s.y * f) / mr - p.gravity;
}

StanceState random_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ux(-0.6, 0.6), uy(0.5, 1.0), uv(-2, 2),
      ur0(0.5, 1.0), ur0d(-1, 1);
  return state(ux(rng), uy(rng), uv(rng), uv(rng), ur0(rng), ur0d(rng));
}

TEST(LegGeometry, VerticalLeg) {
  const auto g = leg_length_and_angle(state(0, 1));
  EXPECT_DOUBLE_EQ(g.length, 1.0);
  EXPECT_NEAR(g.theta(), std::numbers::pi / 2, 1e-15);
}

TEST(LegGeometry, PythagoreanTriple) {
  const auto g = leg_length_and_angle(state(-0.6, 0.8));
  EXPECT_DOUBLE_EQ(g.length, 1.0);
  EXPECT_DOUBLE_EQ(g.sin_theta, 0.8);
  EXPECT_DOUBLE_EQ(g.cos_theta, -0.6);
}

TEST(LegGeometry, FootPinIsInvalid) {
  EXPECT_THROW(leg_length_and_angle(state(0, 0)), InvalidStateError);
}

TEST(LegForce, HandValues) {
  const ModelParams p;
  EXPECT_EQ(leg_force(state(0, 1), p), 0.0);
  EXPECT_NEAR(leg_force(state(0, 0.9), p), 2.0, 1e-12);
  EXPECT_NEAR(leg_force(state(0, 1, 0, 0, 1, 0.1), p), 0.04, 1e-15);
}

TEST(LegForce, DampingActsOnRelativeRate) {
  ModelParams p;
  // compressing at 0.1 with a still set point adds c * 0.1
  EXPECT_NEAR(leg_force(state(0, 1, 0, -0.1), p), 0.04, 1e-15);
  p.damping = 0.0;
  EXPECT_EQ(leg_force(state(0, 1, 0, -0.1), p), 0.0);
}

TEST(Cop, HandValues) {
  EXPECT_EQ(cop_position(0.0, 1.7, 1.2), 0.0);
  EXPECT_NEAR(cop_position(-0.1, 2.0, std::numbers::pi / 2), 0.05, 1e-15);
  EXPECT_THROW(cop_position(0.1, 0.0, std::numbers::pi / 2), UndefinedCopError);
}

TEST(Cop, MultipliedFormIsExact) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> tau(-0.2, 0.2), f(0.1, 5), th(0.3, 2.8);
  for (int i = 0; i < 200; ++i) {
    const double t = tau(rng), F = f(rng), a = th(rng);
    EXPECT_NEAR(cop_position(t, F, a) * F * std::sin(a), -t, 1e-15 * (1 + std::abs(t)));
  }
}

TEST(AnkleForce, HandValues) {
  EXPECT_EQ(ankle_force(0.0, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(ankle_force(-0.1, 1.0), 0.1);
  EXPECT_DOUBLE_EQ(ankle_force(0.05, 0.5), -0.1);
}

TEST(StanceAccel, StaticEquilibrium) {
  const ModelParams p;
  // F_leg = k (r0 - 1) = m g
  const auto a = stance_accel(state(0, 1, 0, 0, 1 + 1.0 / 20.0), ControlInput{0, 0}, p);
  EXPECT_NEAR(a.xddot, 0.0, 1e-15);
  EXPECT_NEAR(a.yddot, 0.0, 1e-15);
}

TEST(StanceAccel, AnkleTorqueFollowsTheDynamics) {
  // F_ankle = -tau / r = 0.1 acts perpendicular to the leg; with the leg
  // vertical it pushes along -x (xddot = -y F_ankle / m r).
  const ModelParams p;
  const auto a = stance_accel(state(0, 1, 0, 0, 1 + 1.0 / 20.0), ControlInput{0, -0.1}, p);
  EXPECT_NEAR(a.xddot, -0.1, 1e-15);
  EXPECT_NEAR(a.yddot, 0.0, 1e-15);
}

TEST(StanceAccel, ZeroTorqueIsBitIdenticalToAslip) {
  std::mt19937_64 rng(11);
  ModelParams p;
  for (int i = 0; i < 500; ++i) {
    p.damping = (i % 2) ? 0.4 : 0.0;
    const StanceState s = random_state(rng);
    double xdd = 0, ydd = 0;
    aslip_rhs(s, p, xdd, ydd);
    const auto a = stance_accel(s, ControlInput{0.3, 0.0}, p);
    EXPECT_EQ(a.xddot, xdd);
    EXPECT_EQ(a.yddot, ydd);
  }
}

TEST(StanceAccel, JacobianMatchesFiniteDifferences) {
  using Dual = Eigen::AutoDiffScalar<Eigen::Matrix<double, 8, 1>>;
  std::mt19937_64 rng(3);
  const ModelParams p;
  const double h = 1e-6;
  for (int trial = 0; trial < 20; ++trial) {
    const StanceState s = random_state(rng);
    const ControlInput u{0.2, -0.05};
    BasicStanceState<Dual> sd;
    for (int j = 0; j < 6; ++j) sd[j] = Dual(s[j], 8, j);
    const BasicControlInput<Dual> ud{Dual(u.leg_accel, 8, 6), Dual(u.ankle_torque, 8, 7)};
    const auto ad = stance_accel(sd, ud, p);
    for (int j = 0; j < 8; ++j) {
      StanceState sp = s, sm = s;
      ControlInput up = u, um = u;
      if (j < 6) {
        sp[j] += h;
        sm[j] -= h;
      } else if (j == 6) {
        up.leg_accel += h;
        um.leg_accel -= h;
      } else {
        up.ankle_torque += h;
        um.ankle_torque -= h;
      }
      const auto ap = stance_accel(sp, up, p), am = stance_accel(sm, um, p);
      const double fx = (ap.xddot - am.xddot) / (2 * h);
      const double fy = (ap.yddot - am.yddot) / (2 * h);
      EXPECT_LT(std::abs(fx - ad.xddot.derivatives()[j]) / std::max(1.0, std::abs(fx)), 1e-5);
      EXPECT_LT(std::abs(fy - ad.yddot.derivatives()[j]) / std::max(1.0, std::abs(fy)), 1e-5);
    }
  }
}

TEST(StanceDerivative, CarriesSetPointChain) {
  const ModelParams p;
  const auto d = stance_derivative(state(-0.2, 0.9, 1.1, -0.3, 0.95, 0.2),
                                   ControlInput{0.7, 0.0}, p);
  EXPECT_EQ(d.x, 1.1);
  EXPECT_EQ(d.y, -0.3);
  EXPECT_EQ(d.r0, 0.2);
  EXPECT_EQ(d.r0dot, 0.7);
}

TEST(Energy, HandValue) {
  const ModelParams p;
  // kinetic 0.5 (1 + 0.04), height 0.9, spring 0.5 k 0.01
  const double e = mechanical_energy(state(0, 0.9, 1.0, 0.2), p);
  EXPECT_NEAR(e, 0.52 + 0.9 + 0.1, 1e-14);
}

TEST(ModelParams, Validation) {
  ModelParams p;
  EXPECT_NO_THROW(p.validate());
  p.damping = 0.0;
  EXPECT_NO_THROW(p.validate());
  p.damping = -0.1;
  EXPECT_THROW(p.validate(), InvalidArgumentError);
  p = ModelParams{};
  p.stiffness = 0.0;
  EXPECT_THROW(p.validate(), InvalidArgumentError);
}

}  // namespace
}  // namespace aaslip
