#pragma once

// Ankle utility at one task, 1-D apex-height sweeps and 2-D grids.
//
// Failed solves stay failed: their CoT and utility are NaN in memory and
// empty fields in the CSV, never interpolated.

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "aaslip/config.hpp"
#include "aaslip/model.hpp"
#include "aaslip/objective.hpp"
#include "aaslip/solver.hpp"
#include "aaslip/transcription.hpp"

namespace aaslip {

struct UtilityPoint {
  GaitTask task;  // ankle flag ignored
  ModelParams params;
  CostParams cost;
  std::vector<double> coords;  // swept values, in axis order

  double cot_ankle = 0.0;
  double cot_no_ankle = 0.0;
  double utility = 0.0;  // percent
  SolveReport report_ankle;
  SolveReport report_no_ankle;
  Eigen::VectorXd x_ankle;
  Eigen::VectorXd x_no_ankle;
  double max_abs_torque = 0.0;

  bool converged_ankle() const { return report_ankle.converged; }
  bool converged_no_ankle() const { return report_no_ankle.converged; }
  bool ok() const { return converged_ankle() && converged_no_ankle(); }
  /// Low utility with a torque that is not negligible; logged for a look.
  bool needs_inspection() const;
};

/// Warm-start vectors for the two problems; empty means cold.
struct WarmStart {
  Eigen::VectorXd ankle;
  Eigen::VectorXd no_ankle;
};

/// Solves the ASLIP problem, then the AASLIP problem from the ASLIP optimum
/// with zero torque (feasible by construction) and, when given, from the
/// warm start; the lower converged CoT wins. Warm solves that fail fall
/// back to a cold start.
UtilityPoint utility_at(const GaitTask& task, const ModelParams& params,
                        const CostParams& cost, const TranscriptionConfig& config,
                        const GaitSolveOptions& options, const WarmStart& warm = {});

/// n evenly spaced values from lo to hi inclusive (n = 1 gives lo).
std::vector<double> linspace(double lo, double hi, int n);

struct SweepSpec {
  std::vector<Axis> axes;                   // first axis is apex_height
  std::vector<std::vector<double>> values;  // one list per axis
  bool warm_start = true;

  void validate() const;
};

struct ExperimentContext {
  GaitTask task;  // apex values overridden by the swept axes
  ModelParams params;
  CostParams cost;
  TranscriptionConfig config;
  GaitSolveOptions options;
};

using ProgressFn = std::function<void(const UtilityPoint&, int done, int total)>;

/// Apex-height sweep, each point warm started from its neighbour when
/// warm_start is set.
std::vector<UtilityPoint> sweep_apex_height(const std::vector<double>& heights,
                                            const ExperimentContext& ctx,
                                            bool warm_start = true,
                                            const ProgressFn& progress = {});

/// Full factorial grid. Every value of the second axis is a warm-start chain
/// along apex height; chains run on `jobs` worker threads. The result is in
/// raster order (second axis outer, apex height inner) whatever the
/// completion order.
std::vector<UtilityPoint> grid_2d(const SweepSpec& spec, const ExperimentContext& ctx,
                                  int jobs = 1, const ProgressFn& progress = {});

/// Task, params and cost with `axis` set to `value`.
void apply_axis(Axis axis, double value, GaitTask& task, ModelParams& params,
                CostParams& cost);

/// CSV with the resolved configuration as leading '#' lines, a header
/// naming the axes, then one row per point in the given order.
std::string utility_csv(const std::vector<UtilityPoint>& points,
                        const std::vector<Axis>& axes,
                        const std::string& config_ini);

}  // namespace aaslip
