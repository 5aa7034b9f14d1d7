#pragma once

// Independent checks of a solved gait: RK4 re-integration of the knot
// controls, a standalone trapezoid residual, apex matching after the
// outbound flight and bound margins. Nothing here goes through the
// transcription; only the model's dynamics functions are shared.

#include <vector>

#include "aaslip/model.hpp"
#include "aaslip/trajectory.hpp"
#include "aaslip/transcription.hpp"

namespace aaslip {

struct DenseTrajectory {
  std::vector<double> times;
  std::vector<StanceState> states;
  int steps_per_interval = 0;

  /// State at knot i (every steps_per_interval samples).
  const StanceState& at_knot(std::size_t i) const;
};

/// Fixed-step RK4 from the first knot with the controls interpolated
/// linearly between knots. Throws InvalidStateError when the body reaches
/// y <= 0 or the leg leaves [0.25, 1.5]; the message carries the time and
/// state. A zero-duration trajectory yields just the initial state.
DenseTrajectory integrate_stance(const Trajectory& traj, const ModelParams& p,
                                 int steps_per_interval);

/// Largest |E(t) - E(0)| of mechanical_energy over the samples.
double energy_drift(const DenseTrajectory& dense, const ModelParams& p);

/// Trapezoid residuals recomputed from scratch, interval-major
/// (x, y, xdot, ydot, r0, r0dot per interval).
std::vector<double> trapezoid_residuals(const Trajectory& traj, const ModelParams& p);

struct VerifyTolerances {
  double constraint = 1e-9;
  double reintegration = 1e-3;
};

struct LimitCycleReport {
  int steps_per_interval = 0;
  bool integration_ok = true;
  std::string integration_error;

  double max_defect = 0.0;
  double terminal_deviation = 0.0;  // Euclidean, over the 6 states
  double max_knot_deviation = 0.0;
  // |RK4(steps) - RK4(2 steps)| at the last knot. The knot deviation above is
  // dominated by the collocation, this one by the integrator.
  double rk4_error_estimate = 0.0;

  // Knot level: the flight relations applied to the first / last knot.
  double apex_height_in_error = 0.0;
  double apex_velocity_in_error = 0.0;
  double apex_height_out_error = 0.0;
  double apex_velocity_out_error = 0.0;
  // The same outbound errors from the re-integrated liftoff state.
  double reintegrated_apex_height_error = 0.0;
  double reintegrated_apex_velocity_error = 0.0;
  double set_point_error = 0.0;  // max of |r0(T)-r0(0)|, |r0dot(T)-r0dot(0)|

  std::vector<double> cop_margin_lower;  // per knot: (lf/2) F y/r + tau
  std::vector<double> cop_margin_upper;  // per knot: (lf/2) F y/r - tau
  double min_cop_margin = 0.0;
  double min_force_margin = 0.0;   // against the force bounds, all knots
  double min_length_margin = 0.0;  // against the leg length bounds
  double min_height = 0.0;
  double touchdown_force = 0.0;
  double liftoff_force = 0.0;
  double max_abs_torque = 0.0;

  /// Largest violation of the equality and path constraints (0 if none).
  double max_constraint_violation() const;
  bool passed(const VerifyTolerances& tol = {}) const;
};

LimitCycleReport limit_cycle_report(const GaitTask& task, const Trajectory& traj,
                                    const ModelParams& p,
                                    const TranscriptionConfig& config,
                                    int steps_per_interval = 100);

}  // namespace aaslip
