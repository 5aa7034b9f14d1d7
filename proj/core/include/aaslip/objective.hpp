#pragma once

// Energy-required integrand, cost of transport and ankle utility.

#include <cmath>
#include <span>

#include "aaslip/model.hpp"
#include "aaslip/trajectory.hpp"

namespace aaslip {

struct CostParams {
  double alpha = 0.5;        // 0: mechanical work only, 1: thermal losses only
  double leg_loss = 0.028;   // R_leg
  double ankle_loss = 0.50;  // R_ankle
  double smoothing = 1e-6;   // epsilon of the smoothed max(0, x)

  void validate() const;
};

/// Differentiable max(0, x): (x + sqrt(x^2 + eps^2)) / 2.
template <typename Scalar>
Scalar smooth_max0(const Scalar& x, double eps) {
  using std::sqrt;
  const Scalar root = sqrt(x * x + eps * eps);
  // the negative side cancels, so rationalize there
  if (x < 0.0) return (eps * eps / 2.0) / (root - x);
  return (x + root) / 2.0;
}

/// Mechanical power of the leg actuator, F_leg * r0dot.
template <typename Scalar>
Scalar leg_power(const BasicStanceState<Scalar>& s, const ModelParams& p) {
  return leg_force(s, p) * s.r0dot;
}

/// Mechanical power of the ankle, tau (xdot y - x ydot) / r^2.
template <typename Scalar>
Scalar ankle_power(const BasicStanceState<Scalar>& s, const Scalar& tau) {
  const Scalar r2 = s.x * s.x + s.y * s.y;
  if (!(detail::value_of(r2) > 0.0)) {
    throw InvalidStateError("ankle power undefined at zero leg length");
  }
  return tau * (s.xdot * s.y - s.x * s.ydot) / r2;
}

/// Power integrand of the energy-required objective. The leg and ankle terms
/// are clipped independently.
template <typename Scalar>
Scalar instantaneous_cost(const BasicStanceState<Scalar>& s,
                          const BasicControlInput<Scalar>& u,
                          const ModelParams& p, const CostParams& cost) {
  const Scalar f_leg = leg_force(s, p);
  const Scalar p_leg = f_leg * s.r0dot;
  const Scalar p_ankle = ankle_power(s, u.ankle_torque);
  const double a = cost.alpha;
  const Scalar leg_term =
      smooth_max0(Scalar((1.0 - a) * p_leg + a * cost.leg_loss * f_leg * f_leg),
                  cost.smoothing);
  const Scalar ankle_term = smooth_max0(
      Scalar((1.0 - a) * p_ankle +
             a * cost.ankle_loss * u.ankle_torque * u.ankle_torque),
      cost.smoothing);
  return leg_term + ankle_term;
}

/// Composite trapezoid rule on a uniform grid of spacing `step`. The NLP
/// objective goes through this same routine so both agree bit for bit.
double trapezoid_sum(std::span<const double> samples, double step);

/// Trapezoidal quadrature of instantaneous_cost over the knot grid.
double energy_required(const Trajectory& traj, const ModelParams& p,
                       const CostParams& cost);

/// E_req / (m g d). Throws InvalidArgumentError for d <= 0.
double cost_of_transport(double energy, double distance, const ModelParams& p);

/// Percent decrease in CoT from adding the ankle. Throws
/// InvalidArgumentError for a nonpositive baseline.
double ankle_utility(double cot_no_ankle, double cot_ankle);

}  // namespace aaslip
