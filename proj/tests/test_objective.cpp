#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "aaslip/error.hpp"
#include "aaslip/objective.hpp"
#include "support.hpp"

namespace aaslip {
namespace {

TEST(SmoothMax, HandValues) {
  EXPECT_DOUBLE_EQ(smooth_max0(0.0, 1e-6), 5e-7);
  EXPECT_NEAR(smooth_max0(1.0, 1e-6), 1.0 + 2.5e-13, 1e-15);
  EXPECT_NEAR(smooth_max0(-1.0, 1e-6), 2.5e-13, 1e-18);
}

TEST(SmoothMax, BoundsTheKink) {
  for (double x : {-3.0, -1e-3, 0.0, 1e-7, 2.0}) {
    const double v = smooth_max0(x, 1e-4);
    EXPECT_GE(v, std::max(0.0, x));
    EXPECT_LE(v, std::max(0.0, x) + 0.5e-4 + 1e-16);
  }
}

TEST(LegPower, HandValues) {
  const ModelParams p;
  // r = 0.9; r0 is picked so that F = 2 once r0dot is set
  StanceState s{0, 0.9, 0, 0, 0.998, 0.0};
  EXPECT_EQ(leg_power(s, p), 0.0);
  s.r0dot = 0.1;
  EXPECT_NEAR(leg_force(s, p), 2.0, 1e-12);
  EXPECT_NEAR(leg_power(s, p), 0.2, 1e-12);
  s.r0 = 0.9 + (2.0 + 0.04) / 20.0;
  s.r0dot = -0.1;
  EXPECT_NEAR(leg_force(s, p), 2.0, 1e-12);
  EXPECT_NEAR(leg_power(s, p), -0.2, 1e-12);
}

TEST(AnklePower, HandValues) {
  const StanceState s{0, 1, 1, 0, 1, 0};
  EXPECT_EQ(ankle_power(s, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(ankle_power(s, -0.1), -0.1);
  EXPECT_DOUBLE_EQ(ankle_power(s, 0.1), 0.1);
  EXPECT_THROW(ankle_power(StanceState{0, 0, 1, 0, 1, 0}, 0.1), InvalidStateError);
}

TEST(InstantaneousCost, IdleIsTwoHalfEpsilons) {
  const ModelParams p;
  const CostParams c;
  EXPECT_NEAR(instantaneous_cost(StanceState{0, 1, 0, 0, 1, 0}, ControlInput{}, p, c), 1e-6,
              1e-20);
}

TEST(InstantaneousCost, HandValue) {
  const ModelParams p;
  CostParams c;
  c.alpha = 0.5;
  const StanceState s{0, 0.9, 0, 0, 0.998, 0.1};
  // leg: 0.5 * 0.2 + 0.5 * 0.028 * 4 = 0.156, ankle: smooth_max0(0)
  const double v = instantaneous_cost(s, ControlInput{0.3, 0.0}, p, c);
  EXPECT_NEAR(v, 0.156 + 5e-7, 1e-9);
}

TEST(InstantaneousCost, TermsAreClippedSeparately) {
  // negative leg work does not cancel positive ankle work
  const ModelParams p;
  CostParams c;
  c.alpha = 0.0;
  StanceState s{0, 1, 1, 0, 1.0 + 0.04 / 20.0 + 0.1 * 0.4 / 20.0, -0.1};
  const double f = leg_force(s, p);
  ASSERT_GT(f, 0.0);
  const double v = instantaneous_cost(s, ControlInput{0, 0.1}, p, c);
  EXPECT_NEAR(v, 0.1, 1e-9);
}

TEST(EnergyRequired, IdleTrajectory) {
  Trajectory t;
  t.duration = 1.0;
  for (int i = 0; i < 30; ++i) {
    t.states.push_back({0, 1, 0, 0, 1, 0});
    t.controls.push_back({0, 0});
  }
  EXPECT_NEAR(energy_required(t, ModelParams{}, CostParams{}), 1e-6, 1e-18);
}

TEST(Trapezoid, ExactOnConstants) {
  const std::vector<double> v(17, 0.37);
  EXPECT_NEAR(trapezoid_sum(v, 0.125), 0.37 * 2.0, 1e-15);
}

TEST(Trapezoid, ExactOnLinear) {
  std::vector<double> v;
  for (int i = 0; i <= 10; ++i) v.push_back(3.0 + 2.0 * i * 0.1);
  // integral of 3 + 2t over [0, 1]
  EXPECT_NEAR(trapezoid_sum(v, 0.1), 4.0, 1e-14);
}

TEST(CostOfTransport, HandValues) {
  const ModelParams p;
  EXPECT_DOUBLE_EQ(cost_of_transport(0.1, 1.0, p), 0.1);
  EXPECT_DOUBLE_EQ(cost_of_transport(0.1, 2.0, p), 0.05);
  EXPECT_THROW(cost_of_transport(0.1, 0.0, p), InvalidArgumentError);
}

TEST(Utility, HandValues) {
  EXPECT_EQ(ankle_utility(0.2, 0.2), 0.0);
  EXPECT_NEAR(ankle_utility(0.2, 0.19), 5.0, 1e-12);
  EXPECT_THROW(ankle_utility(0.0, 0.1), InvalidArgumentError);
}

TEST(EnergyRequired, MatchesSolverObjective) {
  const GaitSolution& sol = testing::nominal_solution();
  ASSERT_TRUE(sol.report.converged);
  const GaitNlp& nlp = testing::nominal_nlp();
  const double e = energy_required(sol.trajectory, nlp.params(), nlp.cost());
  EXPECT_NEAR(e, sol.energy, 1e-9);
  const double d = stride_distance(nlp.task(), sol.trajectory, nlp.params());
  EXPECT_NEAR(cost_of_transport(e, d, nlp.params()), sol.report.objective_value, 1e-9);
}

TEST(CostParams, Validation) {
  CostParams c;
  EXPECT_NO_THROW(c.validate());
  c.alpha = 1.5;
  EXPECT_THROW(c.validate(), InvalidArgumentError);
  c = CostParams{};
  c.smoothing = 0.0;
  EXPECT_THROW(c.validate(), InvalidArgumentError);
}

}  // namespace
}  // namespace aaslip
