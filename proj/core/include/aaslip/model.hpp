#pragma once

// Stance dynamics of the ankle-actuated spring-loaded inverted pendulum.
//
// Everything is nondimensional (m = g = l0 = 1 for the nominal plant). The
// foot pin is the origin; x < 0 means the body is behind the foot. The leg
// angle is carried as sin(theta) = y / r and cos(theta) = x / r.
//
// The evaluation functions are templates so the transcription can push
// forward-mode dual numbers through them to obtain exact Jacobians.

#include <cmath>
#include <type_traits>
#include <utility>

#include "aaslip/error.hpp"

namespace aaslip {

struct ModelParams {
  double mass = 1.0;
  double gravity = 1.0;
  double stiffness = 20.0;
  double damping = 0.4;
  double leg_length = 1.0;
  double foot_length = 0.15;

  /// Throws InvalidArgumentError unless every field is strictly positive
  /// (damping may be zero).
  void validate() const;
};

template <typename Scalar>
struct BasicStanceState {
  Scalar x{};
  Scalar y{};
  Scalar xdot{};
  Scalar ydot{};
  Scalar r0{};     // leg spring set point
  Scalar r0dot{};  // set-point rate

  static constexpr int kSize = 6;

  Scalar& operator[](int i) {
    return const_cast<Scalar&>(std::as_const(*this)[i]);
  }
  const Scalar& operator[](int i) const {
    switch (i) {
      case 0: return x;
      case 1: return y;
      case 2: return xdot;
      case 3: return ydot;
      case 4: return r0;
      default: return r0dot;
    }
  }
};

template <typename Scalar>
struct BasicControlInput {
  Scalar leg_accel{};     // r0 double-dot
  Scalar ankle_torque{};  // tau_ankle
};

using StanceState = BasicStanceState<double>;
using ControlInput = BasicControlInput<double>;

template <typename Scalar>
struct StanceAccel {
  Scalar xddot{};
  Scalar yddot{};
};

/// Leg length with the direction cosines of the leg measured from the ground.
template <typename Scalar>
struct LegGeometry {
  Scalar length{};
  Scalar sin_theta{};
  Scalar cos_theta{};

  double theta() const;
};

namespace detail {

template <typename Scalar>
double value_of(const Scalar& s) {
  if constexpr (std::is_arithmetic_v<Scalar>) {
    return static_cast<double>(s);
  } else {
    return value_of(s.value());
  }
}

}  // namespace detail

template <typename Scalar>
double LegGeometry<Scalar>::theta() const {
  return std::atan2(detail::value_of(sin_theta), detail::value_of(cos_theta));
}

template <typename Scalar>
LegGeometry<Scalar> leg_length_and_angle(const BasicStanceState<Scalar>& s) {
  using std::sqrt;
  const Scalar r = sqrt(s.x * s.x + s.y * s.y);
  if (!(detail::value_of(r) > 0.0)) {
    throw InvalidStateError("leg length is zero: body sits on the foot pin");
  }
  return {r, s.y / r, s.x / r};
}

/// Rate of change of the leg length, (x xdot + y ydot) / r.
template <typename Scalar>
Scalar leg_length_rate(const BasicStanceState<Scalar>& s, const Scalar& r) {
  return (s.x * s.xdot + s.y * s.ydot) / r;
}

/// F_leg = k (r0 - r) + c (r0dot - rdot).
template <typename Scalar>
Scalar leg_force(const BasicStanceState<Scalar>& s, const ModelParams& p) {
  const Scalar r = leg_length_and_angle(s).length;
  const Scalar rdot = leg_length_rate(s, r);
  return p.stiffness * (s.r0 - r) + p.damping * (s.r0dot - rdot);
}

/// Center of pressure under the foot, -tau / (F_leg sin(theta)).
double cop_position(double tau, double f_leg, double theta);

/// Magnitude of the force the ankle applies perpendicular to the leg.
template <typename Scalar>
Scalar ankle_force(const Scalar& tau, const Scalar& r) {
  return -tau / r;
}

template <typename Scalar>
StanceAccel<Scalar> stance_accel(const BasicStanceState<Scalar>& s,
                                 const BasicControlInput<Scalar>& u,
                                 const ModelParams& p) {
  const LegGeometry<Scalar> leg = leg_length_and_angle(s);
  const Scalar& r = leg.length;
  const Scalar rdot = leg_length_rate(s, r);
  const Scalar f_leg =
      p.stiffness * (s.r0 - r) + p.damping * (s.r0dot - rdot);
  const Scalar f_ankle = ankle_force(u.ankle_torque, r);
  const Scalar mr = p.mass * r;
  return {(s.x * f_leg) / mr - (s.y * f_ankle) / mr,
          (s.y * f_leg) / mr + (s.x * f_ankle) / mr - p.gravity};
}

/// Full time derivative of the stance state.
template <typename Scalar>
BasicStanceState<Scalar> stance_derivative(const BasicStanceState<Scalar>& s,
                                           const BasicControlInput<Scalar>& u,
                                           const ModelParams& p) {
  const StanceAccel<Scalar> a = stance_accel(s, u, p);
  return {s.xdot, s.ydot, a.xddot, a.yddot, s.r0dot, u.leg_accel};
}

/// Kinetic + gravitational + spring energy (conserved when c = 0 and the
/// actuators are idle).
double mechanical_energy(const StanceState& s, const ModelParams& p);

}  // namespace aaslip
