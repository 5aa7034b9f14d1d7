#pragma once

// Trust-region SQP for NlpProblem (Sl1QP flavour).
//
// Each iteration solves an elastic (l1-relaxed) QP subproblem with the
// interior-point QP solver inside an infinity-norm trust region, so the
// subproblem is always feasible even when the linearized constraints are
// inconsistent. The elastic weight doubles as the penalty of the l1 merit
// function, which makes the QP objective the predicted merit decrease.
// The Lagrangian Hessian is the exact one when the problem provides it,
// shifted by a multiple of the identity until the QP factorization shows
// the right inertia; otherwise a block-diagonal damped-BFGS approximation
// over NlpProblem::hessian_blocks(). Rejected steps get one second-order
// correction before the radius shrinks.

#include <cstdint>
#include <string>

#include <Eigen/Core>

#include "aaslip/nlp.hpp"

namespace aaslip {

enum class HessianMode { kExact, kBfgs };

struct SolverOptions {
  double tolerance = 1e-9;              // max-norm constraint violation
  double optimality_tolerance = 1e-6;   // scaled KKT stationarity
  int max_iterations = 3000;
  double max_wall_time = 0.0;           // seconds; 0 disables the cap
  int multistart = 5;                   // retries after a failed solve
  double perturbation = 0.05;           // uniform noise magnitude for retries
  std::uint64_t seed = 1;
  HessianMode hessian = HessianMode::kExact;  // falls back to BFGS
  bool verbose = false;
};

struct SolveReport {
  bool converged = false;
  double constraint_violation = 0.0;
  double objective_value = 0.0;
  int iterations = 0;
  double wall_time = 0.0;
  std::string termination_reason;
  int attempts = 1;
};

struct NlpResult {
  Eigen::VectorXd x;
  Eigen::VectorXd multipliers;  // constraint multipliers, L = f - lambda'c
  SolveReport report;
};

/// Max-norm violation of the constraint and variable bounds at x.
double max_constraint_violation(const NlpProblem& nlp, const Eigen::VectorXd& x);

/// Single SQP run from `guess` (projected onto the variable bounds).
/// Throws InvalidArgumentError on a dimension mismatch and EvaluationError
/// when an evaluator produces a non-finite value at the starting point.
NlpResult solve_nlp(const NlpProblem& nlp, const Eigen::VectorXd& guess,
                    const SolverOptions& options = {});

/// solve_nlp followed by up to options.multistart retries from uniformly
/// perturbed copies of the guess. Returns the first converged run, or the
/// least-infeasible failure.
NlpResult solve_nlp_multistart(const NlpProblem& nlp,
                               const Eigen::VectorXd& guess,
                               const SolverOptions& options = {});

struct GradientCheck {
  double max_relative_error = 0.0;
  int worst_row = -1;       // -1: objective gradient
  int worst_variable = -1;
  double analytic = 0.0;
  double finite_difference = 0.0;
  std::string worst_label;
};

/// Compares the objective gradient and every Jacobian nonzero against
/// central differences (one-sided second-order differences next to a
/// bound). The error measure is |a - fd| / max(1, |a|, |fd|). Columns of
/// fixed variables (lower == upper) are skipped: there is no interior to
/// difference in, and pinned torques sit exactly on the cost kink.
GradientCheck check_gradients(const NlpProblem& nlp, const Eigen::VectorXd& point,
                              double step = 1e-6);

}  // namespace aaslip
