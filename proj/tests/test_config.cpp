#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "aaslip/config.hpp"
#include "aaslip/error.hpp"

namespace aaslip {
namespace {

AppConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

TEST(Config, EmptyFileGivesDefaults) {
  const AppConfig c = parse("");
  EXPECT_EQ(c.model.stiffness, 20.0);
  EXPECT_EQ(c.model.damping, 0.4);
  EXPECT_EQ(c.model.foot_length, 0.15);
  EXPECT_EQ(c.cost.leg_loss, 0.028);
  EXPECT_EQ(c.cost.ankle_loss, 0.5);
  EXPECT_EQ(c.transcription.num_knots, 30);
  EXPECT_EQ(c.solve.solver.tolerance, 1e-9);
  EXPECT_EQ(c.solve.solver.max_iterations, 3000);
  EXPECT_EQ(c.solve.solver.multistart, 5);
  EXPECT_EQ(c.solve.solver.perturbation, 0.05);
  EXPECT_EQ(c.experiments.sweep_points, 31);
  EXPECT_EQ(c.experiments.grid_apex_points * c.experiments.grid_axis2_points, 441);
}

TEST(Config, SectionsOverrideDefaults) {
  const AppConfig c = parse(
      "[task]\napex_height = 0.95\nankle = false\n"
      "[model]\ndamping = 0.7\n"
      "[cost]\nalpha = 0\n"
      "[solver]\ncontinuation = 1e-2, 1e-4\nhessian = bfgs\n"
      "[experiments]\naxis2 = damping\njobs = 3\n");
  EXPECT_EQ(c.task.apex_height, 0.95);
  EXPECT_FALSE(c.task.ankle_enabled);
  EXPECT_EQ(c.model.damping, 0.7);
  EXPECT_EQ(c.model.stiffness, 20.0);
  EXPECT_EQ(c.cost.alpha, 0.0);
  ASSERT_EQ(c.solve.continuation.size(), 2u);
  EXPECT_EQ(c.solve.continuation[1], 1e-4);
  EXPECT_EQ(c.solve.solver.hessian, HessianMode::kBfgs);
  EXPECT_EQ(c.experiments.axis2, Axis::kDamping);
  EXPECT_EQ(c.experiments.jobs, 3);
}

TEST(Config, RoundTripsThroughIni) {
  AppConfig c;
  c.task.apex_height = 0.1 + 0.2;  // not representable in short decimal
  c.model.damping = 1.0 / 3.0;
  c.cost.alpha = 0.25;
  c.solve.continuation.clear();
  c.experiments.axis2 = Axis::kApexVelocity;
  const std::string text = to_ini(c);
  const AppConfig back = parse(text);
  EXPECT_EQ(back.task.apex_height, c.task.apex_height);
  EXPECT_EQ(back.model.damping, c.model.damping);
  EXPECT_TRUE(back.solve.continuation.empty());
  EXPECT_EQ(back.experiments.axis2, Axis::kApexVelocity);
  EXPECT_EQ(to_ini(back), text);
}

TEST(Config, Errors) {
  EXPECT_THROW(parse("[model]\nstifness = 3\n"), ConfigError);
  EXPECT_THROW(parse("[nosuch]\na = 1\n"), ConfigError);
  EXPECT_THROW(parse("[model]\ndamping = lots\n"), ConfigError);
  EXPECT_THROW(parse("[transcription]\nknots = 3.5\n"), ConfigError);
  EXPECT_THROW(parse("[task]\nankle = maybe\n"), ConfigError);
  EXPECT_THROW(parse("[experiments]\naxis2 = stiffness\n"), ConfigError);
  EXPECT_THROW(parse("stray = 1\n"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/aaslip.ini"), ConfigError);
}

TEST(Config, ValidateReportsAsConfigError) {
  AppConfig c = parse("[experiments]\napex_min = 1.2\napex_max = 0.6\n");
  EXPECT_THROW(c.validate(), ConfigError);
  c = parse("[model]\nstiffness = -1\n");
  EXPECT_THROW(c.validate(), ConfigError);
  c = parse("[experiments]\naxis2 = apex_height\n");
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Axis, Names) {
  for (Axis a : {Axis::kApexHeight, Axis::kAlpha, Axis::kApexVelocity, Axis::kDamping}) {
    EXPECT_EQ(parse_axis(to_string(a)), a);
  }
  EXPECT_EQ(parse_axis("apex-velocity"), Axis::kApexVelocity);
  EXPECT_THROW(parse_axis("mass"), InvalidArgumentError);
}

}  // namespace
}  // namespace aaslip
