#include "aaslip/model.hpp"

#include <cmath>
#include <string>

namespace aaslip {

void ModelParams::validate() const {
  const auto require_positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw InvalidArgumentError(std::string("model parameter '") + name +
                                 "' must be strictly positive");
    }
  };
  require_positive(mass, "mass");
  require_positive(gravity, "gravity");
  require_positive(stiffness, "stiffness");
  // c = 0 is admitted for the passive conservative (energy-check) setup.
  if (!(damping >= 0.0) || !std::isfinite(damping)) {
    throw InvalidArgumentError("model parameter 'damping' must be >= 0");
  }
  require_positive(leg_length, "leg_length");
  require_positive(foot_length, "foot_length");
}

double cop_position(double tau, double f_leg, double theta) {
  const double denom = f_leg * std::sin(theta);
  if (denom == 0.0) {
    throw UndefinedCopError(
        "center of pressure undefined: leg force times sin(theta) is zero");
  }
  return -tau / denom;
}

double mechanical_energy(const StanceState& s, const ModelParams& p) {
  const double r = leg_length_and_angle(s).length;
  const double stretch = s.r0 - r;
  return 0.5 * p.mass * (s.xdot * s.xdot + s.ydot * s.ydot) +
         p.mass * p.gravity * s.y + 0.5 * p.stiffness * stretch * stretch;
}

}  // namespace aaslip
