#pragma once

// JSON documents for solutions, verification reports and sweep point
// dumps. Each embeds the resolved configuration as {section: {key: value}}
// with the values spelled exactly as in the INI file.

#include <string>

#include "aaslip/config.hpp"
#include "aaslip/experiments.hpp"
#include "aaslip/solver.hpp"
#include "aaslip/verify.hpp"

namespace aaslip {

struct SolutionFile {
  AppConfig config;  // config.task is the solved task
  Trajectory trajectory;
  SolveReport report;
  double energy = 0.0;
  double distance = 0.0;
  double cot = 0.0;
};

std::string solution_json(const AppConfig& config, const GaitSolution& solution);

/// Throws ConfigError on malformed or inconsistent documents.
SolutionFile parse_solution_json(const std::string& text);

std::string verify_json(const AppConfig& config, const LimitCycleReport& report,
                        const VerifyTolerances& tol);

/// One sweep point with both trajectories (absent for failed solves).
std::string utility_point_json(const AppConfig& config, const UtilityPoint& point,
                               const std::vector<Axis>& axes);

std::string gradient_json(const AppConfig& config, const GradientSurvey& survey,
                          std::uint64_t seed, double threshold);

}  // namespace aaslip
