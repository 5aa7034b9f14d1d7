#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace aaslip {

/// Coordinate list of the nonzeros of a sparse matrix.
struct SparsityPattern {
  std::vector<int> rows;
  std::vector<int> cols;

  std::size_t size() const { return rows.size(); }
};

/// Smooth nonlinear program
///
///   minimize f(x)  subject to  c_lower <= c(x) <= c_upper,
///                              x_lower <= x   <= x_upper,
///
/// with exact first derivatives. Rows with c_lower == c_upper are equalities.
/// Implementations must be reentrant: evaluators are const and keep no
/// mutable state.
class NlpProblem {
 public:
  virtual ~NlpProblem() = default;

  virtual int num_variables() const = 0;
  virtual int num_constraints() const = 0;

  virtual const Eigen::VectorXd& variable_lower() const = 0;
  virtual const Eigen::VectorXd& variable_upper() const = 0;
  virtual const Eigen::VectorXd& constraint_lower() const = 0;
  virtual const Eigen::VectorXd& constraint_upper() const = 0;

  virtual double objective(const Eigen::VectorXd& x) const = 0;
  virtual void objective_gradient(const Eigen::VectorXd& x,
                                  Eigen::VectorXd& grad) const = 0;
  virtual void constraints(const Eigen::VectorXd& x,
                           Eigen::VectorXd& c) const = 0;
  virtual const SparsityPattern& jacobian_pattern() const = 0;
  /// Values in the order of jacobian_pattern().
  virtual void jacobian_values(const Eigen::VectorXd& x,
                               std::span<double> values) const = 0;

  /// Exact Hessian of the Lagrangian sigma f(x) - lambda' c(x), when the
  /// problem provides one. The pattern lists entries of both triangles and
  /// may repeat an entry; repeated values are summed.
  virtual bool has_hessian() const { return false; }
  virtual const SparsityPattern& hessian_pattern() const;
  virtual void hessian_values(const Eigen::VectorXd& x, double sigma,
                              const Eigen::VectorXd& lambda,
                              std::span<double> values) const;

  /// Partition of the variables into groups whose Lagrangian Hessian is
  /// approximated by independent dense blocks. Default: a single block.
  virtual std::vector<std::vector<int>> hessian_blocks() const;

  virtual std::string constraint_label(int row) const;
  virtual std::string variable_label(int index) const;
};

}  // namespace aaslip
