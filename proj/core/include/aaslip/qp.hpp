#pragma once

// Sparse quadratic programs
//
//   minimize    1/2 z'Hz + q'z
//   subject to  A z  = b
//               G z >= h
//
// solved with a Mehrotra predictor-corrector interior-point method. The
// reduced KKT system is quasi-definite and factored with a sparse LDL'.
// With check_inertia set, a factorization whose inertia shows negative
// curvature of H + G'DG on the null space of A stops the solve with
// kNonconvex, so the caller can regularize H and retry.

#include <string>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace aaslip {

struct QpProblem {
  Eigen::SparseMatrix<double> hessian;  // symmetric
  Eigen::VectorXd linear;
  Eigen::SparseMatrix<double> eq_matrix;
  Eigen::VectorXd eq_rhs;
  Eigen::SparseMatrix<double> ineq_matrix;
  Eigen::VectorXd ineq_rhs;
};

struct QpOptions {
  double tolerance = 1e-11;
  int max_iterations = 200;
  double primal_regularization = 1e-11;
  double dual_regularization = 1e-11;
  int refinement_steps = 3;
  bool check_inertia = false;
};

enum class QpStatus { kSolved, kMaxIterations, kNumericalFailure, kNonconvex };

std::string to_string(QpStatus status);

struct QpSolution {
  QpStatus status = QpStatus::kNumericalFailure;
  Eigen::VectorXd z;
  Eigen::VectorXd eq_multipliers;    // y in  Hz + q - A'y - G'w = 0
  Eigen::VectorXd ineq_multipliers;  // w >= 0
  Eigen::VectorXd slack;             // s = G z - h >= 0
  int iterations = 0;
  double objective = 0.0;
};

QpSolution solve_qp(const QpProblem& qp, const QpOptions& options = {});

}  // namespace aaslip
