#include "aaslip/trajectory.hpp"

#include <cmath>

#include "aaslip/error.hpp"

namespace aaslip {

double Trajectory::step() const {
  return num_knots() < 2 ? 0.0
                         : duration / static_cast<double>(num_knots() - 1);
}

double Trajectory::knot_time(std::size_t i) const {
  return step() * static_cast<double>(i);
}

void Trajectory::validate() const {
  if (states.size() != controls.size()) {
    throw InvalidArgumentError("trajectory has unequal state/control counts");
  }
  if (states.size() < 2) {
    throw InvalidArgumentError("trajectory needs at least two knots");
  }
  // Knot times are t_i = i * T / (n - 1); they are monotone iff T >= 0.
  if (!(duration >= 0.0) || !std::isfinite(duration)) {
    throw InvalidArgumentError("trajectory knot times are not monotone");
  }
}

}  // namespace aaslip
