#include "aaslip/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "aaslip/error.hpp"

namespace aaslip {

namespace {

constexpr double kMinGuardLength = 0.25;
constexpr double kMaxGuardLength = 1.5;

StanceState axpy(const StanceState& s, double a, const StanceState& d) {
  StanceState out;
  for (int c = 0; c < StanceState::kSize; ++c) out[c] = s[c] + a * d[c];
  return out;
}

ControlInput lerp(const ControlInput& a, const ControlInput& b, double w) {
  return {a.leg_accel + w * (b.leg_accel - a.leg_accel),
          a.ankle_torque + w * (b.ankle_torque - a.ankle_torque)};
}

void guard(const StanceState& s, double t) {
  const double r = std::hypot(s.x, s.y);
  if (s.y > 0.0 && r >= kMinGuardLength && r <= kMaxGuardLength &&
      std::isfinite(r)) {
    return;
  }
  std::ostringstream msg;
  msg << "re-integration left the stance region at t=" << t << ": x=" << s.x
      << " y=" << s.y << " r=" << r;
  throw InvalidStateError(msg.str());
}

double distance(const StanceState& a, const StanceState& b) {
  double sum = 0.0;
  for (int c = 0; c < StanceState::kSize; ++c) sum += (a[c] - b[c]) * (a[c] - b[c]);
  return std::sqrt(sum);
}

double apex_height(const StanceState& s, const ModelParams& p) {
  return s.y + s.ydot * s.ydot / (2.0 * p.gravity);
}

}  // namespace

const StanceState& DenseTrajectory::at_knot(std::size_t i) const {
  const std::size_t k = i * static_cast<std::size_t>(std::max(steps_per_interval, 1));
  if (k >= states.size()) throw InvalidArgumentError("knot index out of range");
  return states[k];
}

DenseTrajectory integrate_stance(const Trajectory& traj, const ModelParams& p,
                                 int steps_per_interval) {
  traj.validate();
  if (steps_per_interval < 1) {
    throw InvalidArgumentError("steps_per_interval must be at least 1");
  }
  DenseTrajectory out;
  out.steps_per_interval = steps_per_interval;
  StanceState s = traj.states.front();
  out.times.push_back(0.0);
  out.states.push_back(s);
  if (traj.duration == 0.0) return out;

  const double h = traj.step() / steps_per_interval;
  const auto f = [&](const StanceState& st, const ControlInput& u) {
    return stance_derivative(st, u, p);
  };
  for (std::size_t i = 0; i + 1 < traj.num_knots(); ++i) {
    const ControlInput& ua = traj.controls[i];
    const ControlInput& ub = traj.controls[i + 1];
    for (int k = 0; k < steps_per_interval; ++k) {
      const double w0 = static_cast<double>(k) / steps_per_interval;
      const double w1 = static_cast<double>(k + 1) / steps_per_interval;
      const ControlInput u0 = lerp(ua, ub, w0);
      const ControlInput um = lerp(ua, ub, 0.5 * (w0 + w1));
      const ControlInput u1 = lerp(ua, ub, w1);
      const double t = traj.knot_time(i) + k * h;
      guard(s, t);
      const StanceState k1 = f(s, u0);
      const StanceState s2 = axpy(s, 0.5 * h, k1);
      guard(s2, t + 0.5 * h);
      const StanceState k2 = f(s2, um);
      const StanceState s3 = axpy(s, 0.5 * h, k2);
      guard(s3, t + 0.5 * h);
      const StanceState k3 = f(s3, um);
      const StanceState s4 = axpy(s, h, k3);
      guard(s4, t + h);
      const StanceState k4 = f(s4, u1);
      for (int c = 0; c < StanceState::kSize; ++c) {
        s[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
      }
      out.times.push_back(traj.knot_time(i) + (k + 1) * h);
      out.states.push_back(s);
    }
  }
  guard(s, traj.duration);
  return out;
}

double energy_drift(const DenseTrajectory& dense, const ModelParams& p) {
  if (dense.states.empty()) return 0.0;
  const double e0 = mechanical_energy(dense.states.front(), p);
  double worst = 0.0;
  for (const StanceState& s : dense.states) {
    worst = std::max(worst, std::abs(mechanical_energy(s, p) - e0));
  }
  return worst;
}

std::vector<double> trapezoid_residuals(const Trajectory& traj, const ModelParams& p) {
  traj.validate();
  const double h = traj.step();
  std::vector<double> out;
  out.reserve(6 * (traj.num_knots() - 1));
  StanceState fa = stance_derivative(traj.states[0], traj.controls[0], p);
  for (std::size_t i = 0; i + 1 < traj.num_knots(); ++i) {
    const StanceState fb = stance_derivative(traj.states[i + 1], traj.controls[i + 1], p);
    for (int c = 0; c < StanceState::kSize; ++c) {
      out.push_back(traj.states[i + 1][c] - traj.states[i][c] -
                    0.5 * h * (fa[c] + fb[c]));
    }
    fa = fb;
  }
  return out;
}

double LimitCycleReport::max_constraint_violation() const {
  double v = max_defect;
  v = std::max({v, std::abs(apex_height_in_error), std::abs(apex_velocity_in_error),
                std::abs(apex_height_out_error), std::abs(apex_velocity_out_error),
                set_point_error, std::abs(touchdown_force), std::abs(liftoff_force)});
  v = std::max({v, -min_cop_margin, -min_force_margin, -min_length_margin});
  return v;
}

bool LimitCycleReport::passed(const VerifyTolerances& tol) const {
  return integration_ok && max_constraint_violation() <= tol.constraint &&
         terminal_deviation <= tol.reintegration;
}

LimitCycleReport limit_cycle_report(const GaitTask& task, const Trajectory& traj,
                                    const ModelParams& p,
                                    const TranscriptionConfig& config,
                                    int steps_per_interval) {
  traj.validate();
  LimitCycleReport rep;
  rep.steps_per_interval = steps_per_interval;

  for (double d : trapezoid_residuals(traj, p)) {
    rep.max_defect = std::max(rep.max_defect, std::abs(d));
  }

  const StanceState& first = traj.states.front();
  const StanceState& last = traj.states.back();
  rep.apex_height_in_error = apex_height(first, p) - task.apex_height;
  rep.apex_velocity_in_error = first.xdot - task.apex_velocity;
  rep.apex_height_out_error = apex_height(last, p) - task.apex_height;
  rep.apex_velocity_out_error = last.xdot - task.apex_velocity;
  rep.set_point_error =
      std::max(std::abs(last.r0 - first.r0), std::abs(last.r0dot - first.r0dot));
  rep.touchdown_force = leg_force(first, p);
  rep.liftoff_force = leg_force(last, p);

  try {
    const DenseTrajectory dense = integrate_stance(traj, p, steps_per_interval);
    const StanceState& end = dense.states.back();
    rep.terminal_deviation = distance(end, last);
    for (std::size_t i = 0; i < traj.num_knots(); ++i) {
      rep.max_knot_deviation =
          std::max(rep.max_knot_deviation, distance(dense.at_knot(i), traj.states[i]));
    }
    const DenseTrajectory fine = integrate_stance(traj, p, 2 * steps_per_interval);
    rep.rk4_error_estimate = distance(fine.states.back(), end);
    rep.reintegrated_apex_height_error = apex_height(end, p) - task.apex_height;
    rep.reintegrated_apex_velocity_error = end.xdot - task.apex_velocity;
  } catch (const InvalidStateError& e) {
    rep.integration_ok = false;
    rep.integration_error = e.what();
    rep.terminal_deviation = std::numeric_limits<double>::infinity();
    rep.max_knot_deviation = std::numeric_limits<double>::infinity();
    rep.rk4_error_estimate = std::numeric_limits<double>::infinity();
  }

  constexpr double kBig = std::numeric_limits<double>::infinity();
  rep.min_cop_margin = kBig;
  rep.min_force_margin = kBig;
  rep.min_length_margin = kBig;
  rep.min_height = kBig;
  const std::size_t n = traj.num_knots();
  for (std::size_t i = 0; i < n; ++i) {
    const StanceState& s = traj.states[i];
    const double r = std::hypot(s.x, s.y);
    const double f = leg_force(s, p);
    const double tau = traj.controls[i].ankle_torque;
    const double support = 0.5 * p.foot_length * f * s.y / r;
    rep.cop_margin_lower.push_back(support + tau);
    rep.cop_margin_upper.push_back(support - tau);
    rep.min_cop_margin = std::min({rep.min_cop_margin, support + tau, support - tau});
    rep.min_force_margin = std::min({rep.min_force_margin, f - config.leg_force.lower,
                                     config.leg_force.upper - f});
    rep.min_length_margin = std::min({rep.min_length_margin, r - config.leg_length.lower,
                                      config.leg_length.upper - r});
    rep.min_height = std::min(rep.min_height, s.y);
    rep.max_abs_torque = std::max(rep.max_abs_torque, std::abs(tau));
  }
  return rep;
}

}  // namespace aaslip
