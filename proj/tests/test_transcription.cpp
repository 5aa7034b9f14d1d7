#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/SparseCore>
#include <gtest/gtest.h>

#include "aaslip/error.hpp"
#include "aaslip/solver.hpp"
#include "aaslip/transcription.hpp"
#include "aaslip/verify.hpp"
#include "support.hpp"

namespace aaslip {
namespace {

GaitNlp make(bool ankle, double apex = 1.0) {
  GaitTask t;
  t.apex_height = apex;
  t.ankle_enabled = ankle;
  return build_nlp(t, ModelParams{}, CostParams{}, TranscriptionConfig{});
}

TEST(Layout, VariableCounts) {
  EXPECT_EQ(DecisionLayout(30, true).size(), 241);
  EXPECT_EQ(DecisionLayout(30, false).size(), 211);
  EXPECT_EQ(make(true).num_variables(), 241);
  EXPECT_EQ(make(false).num_variables(), 211);
}

TEST(Layout, ConstraintCounts) {
  // defects, flight, periodic, impact-free, stride, length, force, COP
  EXPECT_EQ(make(true).num_constraints(), 174 + 4 + 2 + 2 + 1 + 30 + 28 + 56);
  EXPECT_EQ(make(false).num_constraints(), 174 + 4 + 2 + 2 + 1 + 30 + 28);
  EXPECT_EQ(make(true).num_defect_rows(), 174);
}

TEST(Layout, OrderIsStatesControlsDuration) {
  const DecisionLayout l(30, true);
  EXPECT_EQ(l.state(0, 0), 0);
  EXPECT_EQ(l.state(29, 5), 179);
  EXPECT_EQ(l.leg_accel(0), 180);
  EXPECT_EQ(l.ankle_torque(0), 181);
  EXPECT_EQ(l.ankle_torque(29), 239);
  EXPECT_EQ(l.duration(), 240);
  EXPECT_EQ(DecisionLayout(30, false).ankle_torque(3), -1);
}

TEST(Layout, EncodeDecodeRoundTrip) {
  std::mt19937_64 rng(5);
  for (bool ankle : {true, false}) {
    const DecisionLayout l(12, ankle);
    const Trajectory t = testing::random_trajectory(rng, 12, ankle);
    const Eigen::VectorXd x = l.encode(t);
    EXPECT_EQ(l.encode(l.decode(x)), x);
    const Trajectory back = l.decode(x);
    EXPECT_EQ(back.duration, t.duration);
    EXPECT_EQ(back.states[7].ydot, t.states[7].ydot);
    EXPECT_EQ(back.controls[7].ankle_torque, t.controls[7].ankle_torque);
  }
  EXPECT_THROW(DecisionLayout(12, true).decode(Eigen::VectorXd::Zero(5)), InvalidArgumentError);
}

TEST(Defects, MatchIndependentOracle) {
  std::mt19937_64 rng(17);
  const ModelParams p;
  for (int trial = 0; trial < 20; ++trial) {
    const Trajectory t = testing::random_trajectory(rng, 30, trial % 2 == 0);
    const std::vector<double> a = defect_constraints(t, p);
    const std::vector<double> b = trapezoid_residuals(t, p);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
  }
}

TEST(Defects, NlpRowsAgreeWithStandaloneFunction) {
  std::mt19937_64 rng(19);
  const GaitNlp nlp = make(true);
  const Trajectory t = testing::random_trajectory(rng, 30, true);
  const Eigen::VectorXd x = nlp.layout().encode(t);
  Eigen::VectorXd c(nlp.num_constraints());
  nlp.constraints(x, c);
  const std::vector<double> d = defect_constraints(t, nlp.params());
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_NEAR(c[static_cast<int>(i)], d[i], 1e-13);
}

TEST(Defects, ExactOnRestingEquilibrium) {
  // F_leg = m g with the body still: every derivative is constant (zero).
  Trajectory t;
  t.duration = 0.7;
  for (int i = 0; i < 30; ++i) {
    t.states.push_back({0, 1, 0, 0, 1.05, 0});
    t.controls.push_back({0, 0});
  }
  for (double d : defect_constraints(t, ModelParams{})) EXPECT_NEAR(d, 0.0, 1e-15);
}

TEST(Defects, ExactOnSetPointChainUnderConstantAccel) {
  // r0dot' = u with u constant: r0dot is linear, r0 quadratic, and the
  // trapezoid rule integrates both rows exactly.
  std::mt19937_64 rng(23);
  Trajectory t = testing::random_trajectory(rng, 30, true);
  const double u = 0.8, r00 = 0.9, v0 = -0.2;
  for (std::size_t i = 0; i < t.num_knots(); ++i) {
    const double s = t.knot_time(i);
    t.states[i].r0 = r00 + v0 * s + 0.5 * u * s * s;
    t.states[i].r0dot = v0 + u * s;
    t.controls[i].leg_accel = u;
  }
  const std::vector<double> d = defect_constraints(t, ModelParams{});
  for (std::size_t k = 0; k + 1 < t.num_knots(); ++k) {
    EXPECT_NEAR(d[6 * k + 4], 0.0, 1e-15);
    EXPECT_NEAR(d[6 * k + 5], 0.0, 1e-15);
  }
}

TEST(Flight, InboundVelocity) {
  const ModelParams p;
  EXPECT_EQ(inbound_vertical_velocity(1.0, 1.0, p), 0.0);
  EXPECT_NEAR(inbound_vertical_velocity(1.0, 0.95, p), -0.31622776601683794, 1e-15);
  EXPECT_THROW(inbound_vertical_velocity(0.9, 1.0, p), InfeasibleTaskError);
}

TEST(Flight, LiftoffAtApexHasZeroResidual) {
  const GaitTask task;
  const StanceState first{-0.2, 0.95, 1.0, -std::sqrt(0.1), 1, 0};
  const StanceState last{0.2, 1.0, 1.0, 0.0, 1, 0};
  const FlightResiduals r = flight_linking_constraints(task, first, last, ModelParams{});
  EXPECT_NEAR(r.inbound_height, 0.0, 1e-15);
  EXPECT_EQ(r.inbound_velocity, 0.0);
  EXPECT_EQ(r.outbound_height, 0.0);
  EXPECT_EQ(r.outbound_velocity, 0.0);
  EXPECT_THROW(flight_linking_constraints(task, StanceState{0, 1.1, 1, 0, 1, 0}, last,
                                          ModelParams{}),
               InfeasibleTaskError);
}

TEST(Periodicity, TimeReversedArcIsPeriodic) {
  const StanceState first{-0.25, 0.93, 1.1, -0.3, 0.97, 0.05};
  const StanceState last{0.25, 0.93, 1.1, 0.3, 0.97, 0.05};
  const PeriodicityResiduals r = periodicity_constraints(GaitTask{}, first, last, ModelParams{});
  EXPECT_EQ(r.apex_height, 0.0);
  EXPECT_EQ(r.apex_velocity, 0.0);
  EXPECT_EQ(r.set_point, 0.0);
  EXPECT_EQ(r.set_point_rate, 0.0);
}

TEST(Periodicity, ResidualIsTheApexDifference) {
  const StanceState first{-0.25, 0.93, 1.1, -0.3, 0.97, 0.0};
  StanceState last = first;
  last.ydot = 0.3;
  last.y += 0.01;
  const PeriodicityResiduals r = periodicity_constraints(GaitTask{}, first, last, ModelParams{});
  EXPECT_NEAR(r.apex_height, 0.01, 1e-15);
}

Trajectory single_knot_pair(const StanceState& s, double tau) {
  Trajectory t;
  t.duration = 1.0;
  t.states = {s, s};
  t.controls = {{0, tau}, {0, tau}};
  return t;
}

TEST(Cop, HandExamples) {
  const ModelParams p;
  const StanceState vertical{0, 0.9, 0, 0, 1.0, 0};  // F = 2
  ASSERT_NEAR(leg_force(vertical, p), 2.0, 1e-12);
  auto m = cop_path_constraints(single_knot_pair(vertical, -0.1), p);
  EXPECT_GE(m[0], 0.0);
  EXPECT_GE(m[1], 0.0);
  m = cop_path_constraints(single_knot_pair(vertical, -0.2), p);
  EXPECT_LT(std::min(m[0], m[1]), 0.0);
}

TEST(Cop, ZeroTorqueMarginIsAnalytic) {
  std::mt19937_64 rng(29);
  const ModelParams p;
  const Trajectory t = testing::random_trajectory(rng, 30, false);
  const std::vector<double> m = cop_path_constraints(t, p);
  for (std::size_t k = 0; k < t.num_knots(); ++k) {
    const StanceState& s = t.states[k];
    const double r = std::hypot(s.x, s.y);
    const double want = 0.5 * p.foot_length * leg_force(s, p) * s.y / r;
    EXPECT_NEAR(m[2 * k], want, 1e-15);
    EXPECT_NEAR(m[2 * k + 1], want, 1e-15);
  }
}

TEST(Stride, GroundedGait) {
  Trajectory t;
  t.duration = 1.0;
  t.states = {{-0.3, 1.0, 1, 0, 1, 0}, {0.32, 1.0, 1, 0, 1, 0}};
  t.controls = {{0, 0}, {0, 0}};
  EXPECT_NEAR(stride_distance(GaitTask{}, t, ModelParams{}), 0.62, 1e-15);
}

TEST(Stride, InboundFlightContribution) {
  Trajectory t;
  t.duration = 1.0;
  t.states = {{-0.3, 0.95, 1, -0.3162, 1, 0}, {0.3, 1.0, 1, 0, 1, 0}};
  t.controls = {{0, 0}, {0, 0}};
  EXPECT_NEAR(stride_distance(GaitTask{}, t, ModelParams{}), 0.6 + 0.3162, 1e-15);
}

TEST(Stride, SymmetricGaitHasEqualFlightTimes) {
  Trajectory t;
  t.duration = 1.0;
  t.states = {{-0.3, 0.95, 1, -0.2, 1, 0}, {0.3, 0.95, 1, 0.2, 1, 0}};
  t.controls = {{0, 0}, {0, 0}};
  // t_fall = t_rise = 0.2, each adding v t
  EXPECT_NEAR(stride_distance(GaitTask{}, t, ModelParams{}), 0.6 + 0.4, 1e-15);
}

TEST(InitialGuess, InsideTheBoxAndEvaluable) {
  for (bool ankle : {true, false}) {
    for (double h : {0.6, 0.95, 1.2}) {
      const GaitNlp nlp = make(ankle, h);
      const Eigen::VectorXd& x = nlp.initial_guess();
      EXPECT_TRUE(((x - nlp.variable_lower()).array() >= 0).all());
      EXPECT_TRUE(((nlp.variable_upper() - x).array() >= 0).all());
      Eigen::VectorXd c(nlp.num_constraints());
      nlp.constraints(x, c);
      EXPECT_TRUE(c.allFinite());
      EXPECT_TRUE(std::isfinite(nlp.objective(x)));
    }
  }
}

TEST(BuildNlp, RejectsBadInput) {
  GaitTask t;
  t.apex_height = 0.3;  // below the shortest admissible leg
  EXPECT_THROW(build_nlp(t, ModelParams{}, CostParams{}, TranscriptionConfig{}),
               InfeasibleTaskError);
  TranscriptionConfig c;
  c.num_knots = 2;
  EXPECT_THROW(build_nlp(GaitTask{}, ModelParams{}, CostParams{}, c), InvalidArgumentError);
  c = TranscriptionConfig{};
  c.leg_length = {1.0, 0.5};
  EXPECT_THROW(build_nlp(GaitTask{}, ModelParams{}, CostParams{}, c), InvalidArgumentError);
}

TEST(Gradients, RandomInteriorPoints) {
  for (bool ankle : {true, false}) {
    const GaitNlp nlp = make(ankle);
    const GradientSurvey s = survey_gradients(nlp, nlp.initial_guess(), 10, 42);
    EXPECT_LT(s.worst_error, 1e-5) << s.worst.worst_label;
  }
}

TEST(Gradients, PointOnABoundIsOneSided) {
  const GaitNlp nlp = make(true);
  Eigen::VectorXd x = nlp.initial_guess();
  x[nlp.layout().leg_accel(10)] = nlp.variable_upper()[nlp.layout().leg_accel(10)];
  x[nlp.layout().state(0, 0)] = nlp.variable_upper()[nlp.layout().state(0, 0)];
  const GradientCheck g = check_gradients(nlp, x);
  EXPECT_TRUE(std::isfinite(g.max_relative_error));
  EXPECT_LT(g.max_relative_error, 1e-5);
}

TEST(Gradients, NearKinkMismatchIsDifferencingError) {
  // Seeds 7 and 11 draw torques where the smoothed cost is within ~eps of its
  // kink; the 1e-6 central difference is off there, a finer one is not.
  const GaitNlp nlp = make(true);
  for (std::uint64_t seed : {7u, 11u}) {
    const GradientSurvey coarse = survey_gradients(nlp, nlp.initial_guess(), 10, seed);
    std::mt19937_64 rng(seed);
    double fine = 0.0;
    for (int i = 0; i < 10; ++i) {
      const Eigen::VectorXd x = random_interior_point(nlp, nlp.initial_guess(), 0.05, rng);
      fine = std::max(fine, check_gradients(nlp, x, 1e-8).max_relative_error);
    }
    EXPECT_GT(coarse.worst_error, 1e-5) << seed;
    EXPECT_EQ(coarse.worst.worst_row, -1) << seed;
    EXPECT_LT(fine, 1e-5) << seed;
  }
}

TEST(Gradients, CorruptedDerivativeIsDetected) {
  const GaitNlp nlp = make(true);
  const auto bad = testing::corrupt(nlp);
  const GradientSurvey s = survey_gradients(*bad, nlp.initial_guess(), 3, 42);
  EXPECT_GT(s.worst_error, 1e-2);
}

TEST(Hessian, MatchesDifferencedLagrangianGradient) {
  const GaitNlp nlp = make(true);
  std::mt19937_64 rng(31);
  const Eigen::VectorXd x = random_interior_point(nlp, nlp.initial_guess(), 0.02, rng);
  const int n = nlp.num_variables(), m = nlp.num_constraints();
  std::normal_distribution<double> nd;
  Eigen::VectorXd lambda(m);
  for (int i = 0; i < m; ++i) lambda[i] = nd(rng);
  const double sigma = 0.7;

  const auto lagrangian_gradient = [&](const Eigen::VectorXd& z) {
    Eigen::VectorXd g(n);
    nlp.objective_gradient(z, g);
    g *= sigma;
    std::vector<double> v(nlp.jacobian_pattern().size());
    nlp.jacobian_values(z, v);
    const SparsityPattern& jp = nlp.jacobian_pattern();
    for (std::size_t k = 0; k < v.size(); ++k) g[jp.cols[k]] -= lambda[jp.rows[k]] * v[k];
    return g;
  };

  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
  std::vector<double> hv(nlp.hessian_pattern().size());
  nlp.hessian_values(x, sigma, lambda, hv);
  for (std::size_t k = 0; k < hv.size(); ++k) {
    dense(nlp.hessian_pattern().rows[k], nlp.hessian_pattern().cols[k]) += hv[k];
  }
  EXPECT_LT((dense - dense.transpose()).cwiseAbs().maxCoeff(), 1e-10);

  const double h = 1e-6;
  double worst = 0.0;
  int worst_i = -1, worst_j = -1;
  // pinned torques sit on the cost kink; the solver never moves them
  const auto fixed = [&](int k) { return nlp.variable_lower()[k] == nlp.variable_upper()[k]; };
  for (int j = 0; j < n; ++j) {
    if (fixed(j)) continue;
    Eigen::VectorXd xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    const Eigen::VectorXd col = (lagrangian_gradient(xp) - lagrangian_gradient(xm)) / (2 * h);
    for (int i = 0; i < n; ++i) {
      if (fixed(i)) continue;
      const double err =
          std::abs(col[i] - dense(i, j)) / std::max({1.0, std::abs(col[i]), std::abs(dense(i, j))});
      if (err > worst) {
        worst = err;
        worst_i = i;
        worst_j = j;
      }
    }
  }
  EXPECT_LT(worst, 1e-5) << "entry " << worst_i << "," << worst_j;
}

TEST(AnkleOff, SameProblemAsAnkleWithZeroTorque) {
  const GaitNlp with = make(true);
  const GaitNlp without = make(false);
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 10; ++trial) {
    Trajectory t = testing::random_trajectory(rng, 30, false);
    const Eigen::VectorXd xa = with.layout().encode(t);
    const Eigen::VectorXd xn = without.layout().encode(t);
    EXPECT_EQ(with.objective(xa), without.objective(xn));

    Eigen::VectorXd ca(with.num_constraints()), cn(without.num_constraints());
    with.constraints(xa, ca);
    without.constraints(xn, cn);
    for (int i = 0; i < without.num_constraints(); ++i) {
      EXPECT_EQ(ca[i], cn[i]) << without.constraint_label(i);
      EXPECT_EQ(with.constraint_lower()[i], without.constraint_lower()[i]);
      EXPECT_EQ(with.constraint_upper()[i], without.constraint_upper()[i]);
    }
    // The extra COP rows hold whenever the leg pushes: with tau = 0 they are
    // the analytic margin (lf/2) F y / r.
    for (int i = without.num_constraints(); i < with.num_constraints(); ++i) {
      const int knot = 1 + (i - without.num_constraints()) / 2;
      const StanceState& s = t.states[knot];
      const double want = 0.5 * with.params().foot_length * leg_force(s, with.params()) * s.y /
                          std::hypot(s.x, s.y);
      EXPECT_NEAR(ca[i], want, 1e-15);
    }
  }
}

}  // namespace
}  // namespace aaslip
