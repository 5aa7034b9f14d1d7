#include "aaslip/nlp.hpp"

#include <numeric>

#include "aaslip/error.hpp"

namespace aaslip {

std::vector<std::vector<int>> NlpProblem::hessian_blocks() const {
  std::vector<int> all(num_variables());
  std::iota(all.begin(), all.end(), 0);
  return {std::move(all)};
}

const SparsityPattern& NlpProblem::hessian_pattern() const {
  static const SparsityPattern empty;
  return empty;
}

void NlpProblem::hessian_values(const Eigen::VectorXd& /*x*/, double /*sigma*/,
                                const Eigen::VectorXd& /*lambda*/,
                                std::span<double> /*values*/) const {
  throw InvalidArgumentError("problem does not provide an exact Hessian");
}

std::string NlpProblem::constraint_label(int row) const {
  return "constraint " + std::to_string(row);
}

std::string NlpProblem::variable_label(int index) const {
  return "x[" + std::to_string(index) + "]";
}

}  // namespace aaslip
