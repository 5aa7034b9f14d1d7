#pragma once

// Trapezoidal direct collocation of one periodic gait.
//
// Decision vector layout (stable; used for serialization):
//   [ s_0 .. s_{N-1} | u_0 .. u_{N-1} | T ]
// with s_i = (x, y, xdot, ydot, r0, r0dot) and u_i = (r0ddot, tau) when the
// ankle is enabled or u_i = (r0ddot) otherwise.
//
// Constraint rows, in order:
//   6 (N-1)  trapezoidal defects
//   4        flight linking: xdot(0) = v, y(0) + ydot(0)^2 / 2g = H,
//                            xdot(T) = v, y(T) + ydot(T)^2 / 2g = H
//   2        cycle continuity of r0 and r0dot
//   2        impact-free touchdown / liftoff, F_leg(0) = F_leg(T) = 0
//   1        stride distance >= min_stride
//   N        leg length bounds
//   N - 2    leg force bounds (interior knots)
//   2 (N-2)  center-of-pressure bounds (interior knots, ankle only)
// The ballistic sign conditions ydot(0) <= 0, ydot(T) >= 0, the touchdown
// position x(0) <= 0 and tau(0) = tau(T) = 0 are variable bounds.

#include <string>
#include <vector>

#include <Eigen/Core>

#include "aaslip/model.hpp"
#include "aaslip/nlp.hpp"
#include "aaslip/objective.hpp"
#include "aaslip/trajectory.hpp"

namespace aaslip {

struct GaitTask {
  double apex_height = 1.0;
  double apex_velocity = 1.0;
  bool ankle_enabled = true;

  void validate() const;
};

struct Interval {
  double lower = 0.0;
  double upper = 0.0;

  bool contains(double v) const { return v >= lower && v <= upper; }
};

struct TranscriptionConfig {
  int num_knots = 30;
  Interval duration{0.2, 5.0};
  Interval leg_length{0.5, 1.0};
  Interval leg_force{0.0, 5.0};
  Interval leg_accel{-1.0, 1.0};
  double velocity_limit = 5.0;   // |xdot|, |ydot|, |r0dot|
  double torque_limit = 1.0;     // |tau|, far looser than the COP bound
  double min_body_height = 0.1;
  double min_stride = 0.01;

  void validate() const;
};

class DecisionLayout {
 public:
  DecisionLayout(int num_knots, bool ankle_enabled);

  int num_knots() const { return num_knots_; }
  bool ankle_enabled() const { return ankle_; }
  int controls_per_knot() const { return ankle_ ? 2 : 1; }
  int size() const { return (StanceState::kSize + controls_per_knot()) * num_knots_ + 1; }

  int state(int knot, int component) const {
    return knot * StanceState::kSize + component;
  }
  int leg_accel(int knot) const {
    return StanceState::kSize * num_knots_ + knot * controls_per_knot();
  }
  /// -1 when the ankle is disabled.
  int ankle_torque(int knot) const { return ankle_ ? leg_accel(knot) + 1 : -1; }
  int duration() const { return size() - 1; }

  Trajectory decode(const Eigen::VectorXd& x) const;
  /// Ankle torques are dropped when the ankle is disabled.
  Eigen::VectorXd encode(const Trajectory& traj) const;

 private:
  int num_knots_;
  bool ankle_;
};

/// Residuals of the ballistic flight phases into and out of stance:
/// (xdot(0) - v, y(0) + ydot(0)^2/2g - H, xdot(T) - v, y(T) + ydot(T)^2/2g - H).
struct FlightResiduals {
  double inbound_velocity = 0.0;
  double inbound_height = 0.0;
  double outbound_velocity = 0.0;
  double outbound_height = 0.0;
};

/// (apex height out - apex height in, apex velocity out - in,
///  r0(T) - r0(0), r0dot(T) - r0dot(0)).
struct PeriodicityResiduals {
  double apex_height = 0.0;
  double apex_velocity = 0.0;
  double set_point = 0.0;
  double set_point_rate = 0.0;
};

/// Vertical touchdown velocity after falling from the apex:
/// -sqrt(2 g (H - y0)). Throws InfeasibleTaskError when y0 > H.
double inbound_vertical_velocity(double apex_height, double touchdown_height,
                                 const ModelParams& p);

/// s_{i+1} - s_i - h/2 (f_i + f_{i+1}) for every interval, interval-major.
std::vector<double> defect_constraints(const Trajectory& traj,
                                       const ModelParams& p);

/// Throws InfeasibleTaskError when the touchdown height exceeds the apex.
FlightResiduals flight_linking_constraints(const GaitTask& task,
                                           const StanceState& first,
                                           const StanceState& last,
                                           const ModelParams& p);

PeriodicityResiduals periodicity_constraints(const GaitTask& task,
                                             const StanceState& first,
                                             const StanceState& last,
                                             const ModelParams& p);

/// Per knot, the pair ((lf/2) F y/r + tau, (lf/2) F y/r - tau); the center
/// of pressure lies on the foot iff both are >= 0 (given F >= 0, y > 0).
std::vector<double> cop_path_constraints(const Trajectory& traj,
                                         const ModelParams& p);

/// Horizontal distance from inbound apex to outbound apex.
double stride_distance(const GaitTask& task, const Trajectory& traj,
                       const ModelParams& p);

/// The trapezoidal NLP for one gait task. Immutable once built; evaluators
/// are reentrant.
class GaitNlp final : public NlpProblem {
 public:
  GaitNlp(const GaitTask& task, const ModelParams& params,
          const CostParams& cost, const TranscriptionConfig& config);

  int num_variables() const override { return layout_.size(); }
  int num_constraints() const override { return static_cast<int>(c_lower_.size()); }
  const Eigen::VectorXd& variable_lower() const override { return x_lower_; }
  const Eigen::VectorXd& variable_upper() const override { return x_upper_; }
  const Eigen::VectorXd& constraint_lower() const override { return c_lower_; }
  const Eigen::VectorXd& constraint_upper() const override { return c_upper_; }

  /// Cost of transport E_req / (m g d); +inf when d <= 0.
  double objective(const Eigen::VectorXd& x) const override;
  void objective_gradient(const Eigen::VectorXd& x,
                          Eigen::VectorXd& grad) const override;
  void constraints(const Eigen::VectorXd& x, Eigen::VectorXd& c) const override;
  const SparsityPattern& jacobian_pattern() const override { return pattern_; }
  void jacobian_values(const Eigen::VectorXd& x,
                       std::span<double> values) const override;
  bool has_hessian() const override { return true; }
  const SparsityPattern& hessian_pattern() const override { return hessian_pattern_; }
  void hessian_values(const Eigen::VectorXd& x, double sigma,
                      const Eigen::VectorXd& lambda,
                      std::span<double> values) const override;
  std::vector<std::vector<int>> hessian_blocks() const override;
  std::string constraint_label(int row) const override;
  std::string variable_label(int index) const override;

  /// Energy required (trapezoidal quadrature of the cost integrand).
  double energy(const Eigen::VectorXd& x) const;
  double distance(const Eigen::VectorXd& x) const;

  const DecisionLayout& layout() const { return layout_; }
  const GaitTask& task() const { return task_; }
  const ModelParams& params() const { return params_; }
  const CostParams& cost() const { return cost_; }
  const TranscriptionConfig& config() const { return config_; }
  const Eigen::VectorXd& initial_guess() const { return guess_; }

  int num_defect_rows() const { return 6 * (layout_.num_knots() - 1); }

 private:
  void build_bounds();
  void build_pattern();

  GaitTask task_;
  ModelParams params_;
  CostParams cost_;
  TranscriptionConfig config_;
  DecisionLayout layout_;

  Eigen::VectorXd x_lower_, x_upper_, c_lower_, c_upper_;
  SparsityPattern pattern_;
  SparsityPattern hessian_pattern_;
  std::vector<std::string> row_labels_;
  Eigen::VectorXd guess_;

  // First rows of each constraint group.
  int row_flight_ = 0, row_periodic_ = 0, row_impact_ = 0, row_stride_ = 0,
      row_length_ = 0, row_force_ = 0, row_cop_ = 0;
};

/// Validates inputs and builds the NLP. Throws InfeasibleTaskError for tasks
/// that cannot satisfy the bounds (e.g. an apex below the shortest leg).
GaitNlp build_nlp(const GaitTask& task, const ModelParams& params,
                  const CostParams& cost, const TranscriptionConfig& config);

/// Symmetric stance arc seed: touchdown angle from a passive-SLIP
/// heuristic, y on a shallow parabola below the apex, r0 = l0, zero
/// controls. Satisfies every variable bound.
Eigen::VectorXd initial_guess(const GaitTask& task, const ModelParams& params,
                              const TranscriptionConfig& config);

/// Re-samples a trajectory onto `num_knots` uniform knots (linear
/// interpolation); used to warm start across knot counts.
Trajectory resample(const Trajectory& traj, int num_knots);

}  // namespace aaslip
