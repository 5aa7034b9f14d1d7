#include "aaslip/objective.hpp"

#include <cmath>
#include <vector>

#include "aaslip/error.hpp"

namespace aaslip {

void CostParams::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw InvalidArgumentError("cost parameter 'alpha' must lie in [0, 1]");
  }
  if (!(smoothing > 0.0)) {
    throw InvalidArgumentError("cost parameter 'smoothing' must be positive");
  }
  if (!(leg_loss >= 0.0) || !(ankle_loss >= 0.0)) {
    throw InvalidArgumentError("thermal-loss coefficients must be >= 0");
  }
}

double trapezoid_sum(std::span<const double> samples, double step) {
  if (samples.size() < 2) return 0.0;
  double interior = 0.0;
  for (std::size_t i = 1; i + 1 < samples.size(); ++i) interior += samples[i];
  const double ends = 0.5 * (samples.front() + samples.back());
  return step * (ends + interior);
}

double energy_required(const Trajectory& traj, const ModelParams& p,
                       const CostParams& cost) {
  traj.validate();
  std::vector<double> power(traj.num_knots());
  for (std::size_t i = 0; i < power.size(); ++i) {
    power[i] = instantaneous_cost(traj.states[i], traj.controls[i], p, cost);
  }
  return trapezoid_sum(power, traj.step());
}

double cost_of_transport(double energy, double distance,
                         const ModelParams& p) {
  if (!(distance > 0.0)) {
    throw InvalidArgumentError("cost of transport needs a positive distance");
  }
  return energy / (p.mass * p.gravity * distance);
}

double ankle_utility(double cot_no_ankle, double cot_ankle) {
  if (!(cot_no_ankle > 0.0)) {
    throw InvalidArgumentError("ankle utility needs a positive baseline CoT");
  }
  return 100.0 * (cot_no_ankle - cot_ankle) / cot_no_ankle;
}

}  // namespace aaslip
