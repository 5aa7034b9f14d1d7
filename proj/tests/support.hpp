#pragma once

#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "aaslip/solver.hpp"
#include "aaslip/trajectory.hpp"
#include "aaslip/transcription.hpp"

namespace aaslip::testing {

// Nominal task solved once per test binary.
inline const GaitNlp& nominal_nlp() {
  static const GaitNlp nlp = build_nlp(GaitTask{}, ModelParams{}, CostParams{},
                                       TranscriptionConfig{});
  return nlp;
}

inline const GaitSolution& nominal_solution() {
  static const GaitSolution sol = solve(nominal_nlp(), nominal_nlp().initial_guess());
  return sol;
}

// Stance-like knots with random rates and controls; not dynamically consistent.
inline Trajectory random_trajectory(std::mt19937_64& rng, int knots, bool ankle) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Trajectory t;
  t.duration = 0.8 + 0.2 * u(rng);
  for (int i = 0; i < knots; ++i) {
    const double s = static_cast<double>(i) / (knots - 1);
    StanceState st{-0.3 + 0.6 * s + 0.02 * u(rng), 0.9 + 0.03 * u(rng), 1.0 + 0.2 * u(rng),
                   0.3 * u(rng), 0.95 + 0.03 * u(rng), 0.2 * u(rng)};
    t.states.push_back(st);
    t.controls.push_back({u(rng), ankle ? 0.05 * u(rng) : 0.0});
  }
  return t;
}

// Forwards to a GaitNlp but reports one Jacobian entry off by `offset`:
// a stand-in for a derivative bug.
class CorruptedNlp final : public NlpProblem {
 public:
  CorruptedNlp(const GaitNlp& inner, std::size_t entry, double offset)
      : inner_(inner), entry_(entry), offset_(offset) {}

  int num_variables() const override { return inner_.num_variables(); }
  int num_constraints() const override { return inner_.num_constraints(); }
  const Eigen::VectorXd& variable_lower() const override { return inner_.variable_lower(); }
  const Eigen::VectorXd& variable_upper() const override { return inner_.variable_upper(); }
  const Eigen::VectorXd& constraint_lower() const override {
    return inner_.constraint_lower();
  }
  const Eigen::VectorXd& constraint_upper() const override {
    return inner_.constraint_upper();
  }
  double objective(const Eigen::VectorXd& x) const override { return inner_.objective(x); }
  void objective_gradient(const Eigen::VectorXd& x, Eigen::VectorXd& g) const override {
    inner_.objective_gradient(x, g);
  }
  void constraints(const Eigen::VectorXd& x, Eigen::VectorXd& c) const override {
    inner_.constraints(x, c);
  }
  const SparsityPattern& jacobian_pattern() const override {
    return inner_.jacobian_pattern();
  }
  void jacobian_values(const Eigen::VectorXd& x, std::span<double> v) const override {
    inner_.jacobian_values(x, v);
    v[entry_] += offset_;
  }
  std::string constraint_label(int row) const override { return inner_.constraint_label(row); }
  std::string variable_label(int i) const override { return inner_.variable_label(i); }

 private:
  const GaitNlp& inner_;
  std::size_t entry_;
  double offset_;
};

inline std::unique_ptr<NlpProblem> corrupt(const GaitNlp& nlp) {
  // an entry in the middle of the defect block
  return std::make_unique<CorruptedNlp>(nlp, nlp.jacobian_pattern().size() / 3, 0.1);
}

}  // namespace aaslip::testing
