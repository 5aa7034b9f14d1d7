#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "aaslip/error.hpp"
#include "aaslip/experiments.hpp"

namespace aaslip {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

ExperimentContext context(double alpha) {
  ExperimentContext ctx;
  ctx.cost.alpha = alpha;
  return ctx;
}

// Two-point chain shared by several tests.
const std::vector<UtilityPoint>& short_sweep() {
  static const std::vector<UtilityPoint> pts = sweep_apex_height({0.95, 1.0}, context(0.5));
  return pts;
}

std::vector<std::string> data_rows(const std::string& csv) {
  std::vector<std::string> rows;
  std::istringstream in(csv);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line[0] != '#') rows.push_back(line);
  }
  return rows;
}

TEST(Linspace, Endpoints) {
  const auto v = linspace(0.6, 1.2, 31);
  ASSERT_EQ(v.size(), 31u);
  EXPECT_EQ(v.front(), 0.6);
  EXPECT_EQ(v.back(), 1.2);
  EXPECT_NEAR(v[15], 0.9, 1e-15);
  EXPECT_EQ(linspace(0.3, 0.7, 1), std::vector<double>{0.3});
  EXPECT_THROW(linspace(0, 1, 0), InvalidArgumentError);
}

TEST(SweepSpec, Validation) {
  SweepSpec s{{Axis::kApexHeight, Axis::kAlpha}, {{0.9, 1.0}, {0.0, 0.5}}, true};
  EXPECT_NO_THROW(s.validate());
  s.values[1] = {0.5, 0.5};
  EXPECT_THROW(s.validate(), InvalidArgumentError);
  s.values[1] = {};
  EXPECT_THROW(s.validate(), InvalidArgumentError);
  s = SweepSpec{{Axis::kAlpha, Axis::kApexHeight}, {{0.0}, {1.0}}, true};
  EXPECT_THROW(s.validate(), InvalidArgumentError);
  s = SweepSpec{{Axis::kApexHeight, Axis::kApexHeight}, {{1.0}, {1.1}}, true};
  EXPECT_THROW(s.validate(), InvalidArgumentError);
}

TEST(ApplyAxis, SetsTheRightField) {
  GaitTask t;
  ModelParams p;
  CostParams c;
  apply_axis(Axis::kAlpha, 0.3, t, p, c);
  apply_axis(Axis::kDamping, 0.9, t, p, c);
  apply_axis(Axis::kApexVelocity, 1.3, t, p, c);
  apply_axis(Axis::kApexHeight, 0.8, t, p, c);
  EXPECT_EQ(c.alpha, 0.3);
  EXPECT_EQ(p.damping, 0.9);
  EXPECT_EQ(t.apex_velocity, 1.3);
  EXPECT_EQ(t.apex_height, 0.8);
}

TEST(UtilityCsv, FailedPointsLeaveFieldsEmpty) {
  UtilityPoint good;
  good.coords = {0.9, 0.5};
  good.cot_ankle = 0.19;
  good.cot_no_ankle = 0.2;
  good.utility = 5.0;
  good.report_ankle.converged = good.report_no_ankle.converged = true;
  good.max_abs_torque = 0.01;
  UtilityPoint bad;
  bad.coords = {1.2, 0.5};
  bad.cot_ankle = bad.cot_no_ankle = bad.utility = bad.max_abs_torque = kNaN;

  const std::string csv = utility_csv({good, bad}, {Axis::kApexHeight, Axis::kAlpha},
                                      "[cost]\nalpha = 0.5\n");
  EXPECT_EQ(csv.rfind("# [cost]\n# alpha = 0.5\n", 0), 0u);
  const auto rows = data_rows(csv);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0],
            "apex_height,alpha,cot_ankle,cot_no_ankle,utility,converged_ankle,"
            "converged_no_ankle,max_abs_torque");
  EXPECT_EQ(rows[1], "0.9,0.5,0.19,0.2,5,1,1,0.01");
  EXPECT_EQ(rows[2], "1.2,0.5,,,,0,0,");
  EXPECT_THROW(utility_csv({good}, {Axis::kApexHeight}, ""), InvalidArgumentError);
}

TEST(Utility, ConvergedPointsAreNonNegativeAndRecomputable) {
  for (const UtilityPoint& p : short_sweep()) {
    ASSERT_TRUE(p.ok()) << p.report_ankle.termination_reason << " / "
                        << p.report_no_ankle.termination_reason;
    EXPECT_GE(p.utility, -0.5);
    EXPECT_NEAR(p.utility, ankle_utility(p.cot_no_ankle, p.cot_ankle), 1e-12);

    TranscriptionConfig cfg;
    GaitTask with = p.task, without = p.task;
    with.ankle_enabled = true;
    without.ankle_enabled = false;
    const GaitNlp a = build_nlp(with, p.params, p.cost, cfg);
    const GaitNlp b = build_nlp(without, p.params, p.cost, cfg);
    EXPECT_NEAR(a.objective(p.x_ankle), p.cot_ankle, 1e-9);
    EXPECT_NEAR(b.objective(p.x_no_ankle), p.cot_no_ankle, 1e-9);

    // Through the objective module directly.
    const Trajectory ta = a.layout().decode(p.x_ankle);
    const double e = energy_required(ta, p.params, p.cost);
    const double d = stride_distance(with, ta, p.params);
    EXPECT_NEAR(cost_of_transport(e, d, p.params), p.cot_ankle, 1e-9);
  }
}

TEST(Utility, BaselineAgainstItselfIsZero) {
  for (const UtilityPoint& p : short_sweep()) {
    EXPECT_EQ(ankle_utility(p.cot_no_ankle, p.cot_no_ankle), 0.0);
  }
}

TEST(Grid, MatchesTheOneDimensionalSweep) {
  const SweepSpec spec{{Axis::kApexHeight, Axis::kAlpha}, {{0.95, 1.0}, {0.5}}, true};
  const auto grid = grid_2d(spec, context(0.0));
  ASSERT_EQ(grid.size(), 2u);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_EQ(grid[i].coords, (std::vector<double>{short_sweep()[i].task.apex_height, 0.5}));
    EXPECT_NEAR(grid[i].utility, short_sweep()[i].utility, 1e-6);
  }
}

TEST(Grid, RasterOrderIndependentOfThreads) {
  const SweepSpec spec{{Axis::kApexHeight, Axis::kDamping}, {{1.0}, {0.3, 0.6}}, true};
  const ExperimentContext ctx = context(0.5);
  const auto one = grid_2d(spec, ctx, 1);
  const auto two = grid_2d(spec, ctx, 2);
  const std::vector<Axis> axes{Axis::kApexHeight, Axis::kDamping};
  EXPECT_EQ(utility_csv(one, axes, ""), utility_csv(two, axes, ""));
  ASSERT_EQ(one.size(), 2u);
  EXPECT_EQ(one[0].coords[1], 0.3);
  EXPECT_EQ(one[1].coords[1], 0.6);
  EXPECT_THROW(grid_2d(spec, ctx, 0), InvalidArgumentError);
}

TEST(Grid, InfeasibleTaskBecomesFailedPoint) {
  // apex below the shortest leg: no problem can be built
  const auto pts = sweep_apex_height({0.3}, context(0.5));
  ASSERT_EQ(pts.size(), 1u);
  EXPECT_FALSE(pts[0].ok());
  EXPECT_TRUE(std::isnan(pts[0].utility));
  EXPECT_EQ(data_rows(utility_csv(pts, {Axis::kApexHeight}, "")).back(), "0.3,,,,0,0,");
}

}  // namespace
}  // namespace aaslip
