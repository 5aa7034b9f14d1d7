#include "aaslip/transcription.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include <unsupported/Eigen/AutoDiff>

#include "aaslip/error.hpp"

namespace aaslip {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kKnotVars = 8;  // 6 states + leg accel + ankle torque

using Dual = Eigen::AutoDiffScalar<Eigen::Matrix<double, kKnotVars, 1>>;
using KnotGradient = std::array<double, kKnotVars>;

const char* const kStateNames[6] = {"x", "y", "xdot", "ydot", "r0", "r0dot"};

// Which knot variables each component of the state derivative depends on,
// besides its own diagonal entry in the defect.
constexpr bool kDerivativeMask[6][kKnotVars] = {
    {false, false, true, false, false, false, false, false},  // xdot
    {false, false, false, true, false, false, false, false},  // ydot
    {true, true, true, true, true, true, false, true},        // xddot
    {true, true, true, true, true, true, false, true},        // yddot
    {false, false, false, false, false, true, false, false},  // r0dot
    {false, false, false, false, false, false, true, false},  // r0ddot
};

constexpr bool kForceMask[kKnotVars] = {true, true, true, true, true, true, false, false};
constexpr bool kLengthMask[kKnotVars] = {true, true, false, false, false, false, false, false};
constexpr bool kCopMask[kKnotVars] = {true, true, true, true, true, true, false, true};

struct DualKnot {
  BasicStanceState<Dual> s;
  BasicControlInput<Dual> u;
};

DualKnot seed(const StanceState& s, const ControlInput& u) {
  DualKnot k;
  for (int c = 0; c < StanceState::kSize; ++c) k.s[c] = Dual(s[c], kKnotVars, c);
  k.u.leg_accel = Dual(u.leg_accel, kKnotVars, 6);
  k.u.ankle_torque = Dual(u.ankle_torque, kKnotVars, 7);
  return k;
}

KnotGradient gradient_of(const Dual& d) {
  KnotGradient g{};
  for (int j = 0; j < kKnotVars; ++j) g[j] = d.derivatives()[j];
  return g;
}

// Second-order duals: the outer derivatives carry first-order duals, so
// d.derivatives()[i].derivatives()[j] is a Hessian entry.
using Dual2 = Eigen::AutoDiffScalar<Eigen::Matrix<Dual, kKnotVars, 1>>;

struct Dual2Knot {
  BasicStanceState<Dual2> s;
  BasicControlInput<Dual2> u;
};

Dual2 seed2_scalar(double value, int index) {
  Dual2 d;
  d.value() = Dual(value, kKnotVars, index);
  for (int j = 0; j < kKnotVars; ++j) d.derivatives()[j] = Dual(j == index ? 1.0 : 0.0);
  return d;
}

Dual2Knot seed2(const StanceState& s, const ControlInput& u) {
  Dual2Knot k;
  for (int c = 0; c < StanceState::kSize; ++c) k.s[c] = seed2_scalar(s[c], c);
  k.u.leg_accel = seed2_scalar(u.leg_accel, 6);
  k.u.ankle_torque = seed2_scalar(u.ankle_torque, 7);
  return k;
}

template <typename Scalar>
Scalar cop_margin(const BasicStanceState<Scalar>& s, const Scalar& tau,
                  const ModelParams& p, double sign) {
  const LegGeometry<Scalar> leg = leg_length_and_angle(s);
  return 0.5 * p.foot_length * leg_force(s, p) * leg.sin_theta + sign * tau;
}

// Either records a sparsity pattern or writes values in pattern order.
class EntryWriter {
 public:
  explicit EntryWriter(SparsityPattern* pattern) : pattern_(pattern) {}
  explicit EntryWriter(std::span<double> values) : values_(values) {}

  void add(int row, int col, double value) {
    if (pattern_ != nullptr) {
      pattern_->rows.push_back(row);
      pattern_->cols.push_back(col);
    } else {
      values_[next_++] = value;
    }
  }

 private:
  SparsityPattern* pattern_ = nullptr;
  std::span<double> values_;
  std::size_t next_ = 0;
};

struct KnotIndex {
  std::array<int, kKnotVars> var{};
};

KnotIndex knot_index(const DecisionLayout& layout, int k) {
  KnotIndex idx;
  for (int c = 0; c < 6; ++c) idx.var[c] = layout.state(k, c);
  idx.var[6] = layout.leg_accel(k);
  idx.var[7] = layout.ankle_torque(k);
  return idx;
}

// Shared walker for the constraint Jacobian; the pattern pass and the value
// pass take the same path so the ordering always agrees.
void walk_jacobian(const GaitNlp& nlp, const Eigen::VectorXd& x,
                   EntryWriter& out, int row_flight, int row_periodic,
                   int row_impact, int row_stride, int row_length,
                   int row_force, int row_cop) {
  const DecisionLayout& layout = nlp.layout();
  const ModelParams& p = nlp.params();
  const GaitTask& task = nlp.task();
  const int n = layout.num_knots();
  const Trajectory traj = layout.decode(x);
  const double h = traj.step();
  const double dh_dT = 1.0 / static_cast<double>(n - 1);
  const int t_col = layout.duration();

  // State derivative and its Jacobian at every knot.
  std::vector<std::array<double, 6>> f(n);
  std::vector<std::array<KnotGradient, 6>> df(n);
  for (int k = 0; k < n; ++k) {
    const DualKnot dk = seed(traj.states[k], traj.controls[k]);
    const BasicStanceState<Dual> fd = stance_derivative(dk.s, dk.u, p);
    for (int c = 0; c < 6; ++c) {
      f[k][c] = fd[c].value();
      df[k][c] = gradient_of(fd[c]);
    }
  }

  const auto emit_knot = [&](int row, int k, const KnotGradient& g,
                             const bool* mask) {
    const KnotIndex idx = knot_index(layout, k);
    for (int j = 0; j < kKnotVars; ++j) {
      if (mask[j] && idx.var[j] >= 0) out.add(row, idx.var[j], g[j]);
    }
  };

  // Defects.
  for (int i = 0; i + 1 < n; ++i) {
    const KnotIndex a = knot_index(layout, i);
    const KnotIndex b = knot_index(layout, i + 1);
    for (int c = 0; c < 6; ++c) {
      const int row = 6 * i + c;
      for (int j = 0; j < kKnotVars; ++j) {
        if ((kDerivativeMask[c][j] || j == c) && a.var[j] >= 0) {
          out.add(row, a.var[j], (j == c ? -1.0 : 0.0) - 0.5 * h * df[i][c][j]);
        }
      }
      for (int j = 0; j < kKnotVars; ++j) {
        if ((kDerivativeMask[c][j] || j == c) && b.var[j] >= 0) {
          out.add(row, b.var[j], (j == c ? 1.0 : 0.0) - 0.5 * h * df[i + 1][c][j]);
        }
      }
      out.add(row, t_col, -0.5 * dh_dT * (f[i][c] + f[i + 1][c]));
    }
  }

  // Flight linking.
  const StanceState& first = traj.states.front();
  const StanceState& last = traj.states.back();
  const double g = p.gravity;
  out.add(row_flight + 0, layout.state(0, 2), 1.0);
  out.add(row_flight + 1, layout.state(0, 1), 1.0);
  out.add(row_flight + 1, layout.state(0, 3), first.ydot / g);
  out.add(row_flight + 2, layout.state(n - 1, 2), 1.0);
  out.add(row_flight + 3, layout.state(n - 1, 1), 1.0);
  out.add(row_flight + 3, layout.state(n - 1, 3), last.ydot / g);

  // Cycle continuity of the set point.
  out.add(row_periodic + 0, layout.state(0, 4), -1.0);
  out.add(row_periodic + 0, layout.state(n - 1, 4), 1.0);
  out.add(row_periodic + 1, layout.state(0, 5), -1.0);
  out.add(row_periodic + 1, layout.state(n - 1, 5), 1.0);

  const auto force_gradient = [&](int k) {
    const DualKnot dk = seed(traj.states[k], traj.controls[k]);
    return gradient_of(leg_force(dk.s, p));
  };

  // Impact-free touchdown and liftoff.
  emit_knot(row_impact + 0, 0, force_gradient(0), kForceMask);
  emit_knot(row_impact + 1, n - 1, force_gradient(n - 1), kForceMask);

  // Stride distance.
  const double v = task.apex_velocity;
  out.add(row_stride, layout.state(0, 0), -1.0);
  out.add(row_stride, layout.state(0, 3), -v / g);
  out.add(row_stride, layout.state(n - 1, 0), 1.0);
  out.add(row_stride, layout.state(n - 1, 2), last.ydot / g);
  out.add(row_stride, layout.state(n - 1, 3), last.xdot / g);

  // Leg length.
  for (int k = 0; k < n; ++k) {
    const DualKnot dk = seed(traj.states[k], traj.controls[k]);
    emit_knot(row_length + k, k, gradient_of(leg_length_and_angle(dk.s).length),
              kLengthMask);
  }

  // Leg force, interior knots.
  for (int k = 1; k + 1 < n; ++k) {
    emit_knot(row_force + (k - 1), k, force_gradient(k), kForceMask);
  }

  // Center of pressure, interior knots.
  if (layout.ankle_enabled()) {
    for (int k = 1; k + 1 < n; ++k) {
      const DualKnot dk = seed(traj.states[k], traj.controls[k]);
      emit_knot(row_cop + 2 * (k - 1), k,
                gradient_of(cop_margin(dk.s, dk.u.ankle_torque, p, 1.0)), kCopMask);
      emit_knot(row_cop + 2 * (k - 1) + 1, k,
                gradient_of(cop_margin(dk.s, dk.u.ankle_torque, p, -1.0)), kCopMask);
    }
  }
}

struct EnergyTerms {
  double energy = 0.0;
  double distance = 0.0;
  Eigen::VectorXd energy_grad;
  // Distance depends on five variables only.
  std::array<int, 5> dist_vars{};
  std::array<double, 5> dist_grad{};
};

EnergyTerms energy_terms(const GaitNlp& nlp, const Trajectory& traj) {
  const DecisionLayout& layout = nlp.layout();
  const ModelParams& p = nlp.params();
  const int n = layout.num_knots();
  const double h = traj.step();
  const double dh_dT = 1.0 / static_cast<double>(n - 1);

  EnergyTerms t;
  t.energy_grad = Eigen::VectorXd::Zero(layout.size());
  std::vector<double> power(n);
  for (int k = 0; k < n; ++k) {
    const DualKnot dk = seed(traj.states[k], traj.controls[k]);
    const Dual cost = instantaneous_cost(dk.s, dk.u, p, nlp.cost());
    power[k] = cost.value();
    const double weight = (k == 0 || k == n - 1) ? 0.5 * h : h;
    const KnotIndex idx = knot_index(layout, k);
    for (int j = 0; j < kKnotVars; ++j) {
      if (idx.var[j] >= 0) t.energy_grad[idx.var[j]] += weight * cost.derivatives()[j];
    }
  }
  t.energy = trapezoid_sum(power, h);
  t.energy_grad[layout.duration()] = trapezoid_sum(power, dh_dT);

  const StanceState& last = traj.states.back();
  const double g = p.gravity;
  t.distance = stride_distance(nlp.task(), traj, p);
  t.dist_vars = {layout.state(0, 0), layout.state(0, 3), layout.state(n - 1, 0),
                 layout.state(n - 1, 2), layout.state(n - 1, 3)};
  t.dist_grad = {-1.0, -nlp.task().apex_velocity / g, 1.0, last.ydot / g,
                 last.xdot / g};
  return t;
}

// Hessian of sigma * CoT - lambda' c. Per knot, the terms that scale with
// the interval length are gathered in `a` and the purely local constraint
// terms in `b`, so the knot block is h a'' - b'' and the coupling with T is
// a' / (N - 1). The cost of transport adds dense rank-two terms through the
// stride distance, which touches only five variables.
void walk_hessian(const GaitNlp& nlp, const Eigen::VectorXd& x, double sigma,
                  const Eigen::VectorXd& lambda, EntryWriter& out, int row_flight,
                  int row_impact, int row_stride, int row_length, int row_force,
                  int row_cop) {
  const DecisionLayout& layout = nlp.layout();
  const ModelParams& p = nlp.params();
  const int n = layout.num_knots();
  const Trajectory traj = layout.decode(x);
  const double h = traj.step();
  const double dh_dT = 1.0 / static_cast<double>(n - 1);
  const int t_col = layout.duration();
  const double weight = p.mass * p.gravity;
  const double two_g = 2.0 * p.gravity;

  const EnergyTerms et = energy_terms(nlp, traj);
  const bool finite_cot = et.distance > 0.0;
  const double cot_scale = finite_cot ? sigma / (weight * et.distance) : 0.0;

  for (int k = 0; k < n; ++k) {
    const Dual2Knot dk = seed2(traj.states[k], traj.controls[k]);
    const double w = (k == 0 || k == n - 1) ? 0.5 : 1.0;
    Dual2 a = cot_scale * w * instantaneous_cost(dk.s, dk.u, p, nlp.cost());
    const BasicStanceState<Dual2> f = stance_derivative(dk.s, dk.u, p);
    for (int c = 0; c < 6; ++c) {
      double mu = 0.0;
      if (k > 0) mu += lambda[6 * (k - 1) + c];
      if (k + 1 < n) mu += lambda[6 * k + c];
      a += 0.5 * mu * f[c];
    }

    Dual2 b = 0.0 * dk.s.x;
    if (k == 0 || k == n - 1) {
      const int flight = row_flight + (k == 0 ? 1 : 3);
      b += lambda[flight] * (dk.s.y + dk.s.ydot * dk.s.ydot / two_g);
      b += lambda[row_impact + (k == 0 ? 0 : 1)] * leg_force(dk.s, p);
    } else {
      b += lambda[row_force + k - 1] * leg_force(dk.s, p);
      if (layout.ankle_enabled()) {
        const int row = row_cop + 2 * (k - 1);
        b += lambda[row] * cop_margin(dk.s, dk.u.ankle_torque, p, 1.0);
        b += lambda[row + 1] * cop_margin(dk.s, dk.u.ankle_torque, p, -1.0);
      }
    }
    b += lambda[row_length + k] * leg_length_and_angle(dk.s).length;

    const KnotIndex idx = knot_index(layout, k);
    for (int i = 0; i < kKnotVars; ++i) {
      if (idx.var[i] < 0) continue;
      for (int j = 0; j < kKnotVars; ++j) {
        if (idx.var[j] < 0) continue;
        out.add(idx.var[i], idx.var[j],
                h * a.derivatives()[i].derivatives()[j] -
                    b.derivatives()[i].derivatives()[j]);
      }
      const double cross = dh_dT * a.derivatives()[i].value();
      out.add(idx.var[i], t_col, cross);
      out.add(t_col, idx.var[i], cross);
    }
  }

  // Rank-two terms of E / (W d) and the curvature of d itself.
  const double d = et.distance;
  const double e = et.energy;
  const double cross_scale = finite_cot ? sigma / (weight * d * d) : 0.0;
  const double outer_scale = finite_cot ? 2.0 * sigma * e / (weight * d * d * d) : 0.0;
  for (int j = 0; j < layout.size(); ++j) {
    for (int q = 0; q < 5; ++q) {
      const double v = -cross_scale * et.energy_grad[j] * et.dist_grad[q];
      out.add(j, et.dist_vars[q], v);
      out.add(et.dist_vars[q], j, v);
    }
  }
  for (int q = 0; q < 5; ++q) {
    for (int r = 0; r < 5; ++r) {
      out.add(et.dist_vars[q], et.dist_vars[r],
              outer_scale * et.dist_grad[q] * et.dist_grad[r]);
    }
  }
  const double dist_curv =
      (-cross_scale * e - lambda[row_stride]) / p.gravity;
  out.add(layout.state(n - 1, 2), layout.state(n - 1, 3), dist_curv);
  out.add(layout.state(n - 1, 3), layout.state(n - 1, 2), dist_curv);
}

}  // namespace

// ---------------------------------------------------------------------------

void GaitTask::validate() const {
  if (!(apex_height > 0.0) || !std::isfinite(apex_height)) {
    throw InvalidArgumentError("apex height must be positive");
  }
  if (!(apex_velocity > 0.0) || !std::isfinite(apex_velocity)) {
    throw InvalidArgumentError("apex velocity must be positive");
  }
}

void TranscriptionConfig::validate() const {
  if (num_knots < 3) throw InvalidArgumentError("need at least 3 knots");
  const auto check = [](const Interval& i, const char* name) {
    if (!(i.lower <= i.upper)) {
      throw InvalidArgumentError(std::string("empty interval for ") + name);
    }
  };
  check(duration, "duration");
  check(leg_length, "leg_length");
  check(leg_force, "leg_force");
  check(leg_accel, "leg_accel");
  if (!(duration.lower > 0.0)) {
    throw InvalidArgumentError("duration lower bound must be positive");
  }
  if (!(leg_length.lower > 0.0)) {
    throw InvalidArgumentError("leg length lower bound must be positive");
  }
  if (!(min_body_height > 0.0)) {
    throw InvalidArgumentError("minimum body height must be positive");
  }
}

DecisionLayout::DecisionLayout(int num_knots, bool ankle_enabled)
    : num_knots_(num_knots), ankle_(ankle_enabled) {
  if (num_knots < 2) throw InvalidArgumentError("layout needs >= 2 knots");
}

Trajectory DecisionLayout::decode(const Eigen::VectorXd& x) const {
  if (x.size() != size()) {
    throw InvalidArgumentError("decision vector has the wrong dimension");
  }
  Trajectory traj;
  traj.duration = x[duration()];
  traj.states.resize(num_knots_);
  traj.controls.resize(num_knots_);
  for (int k = 0; k < num_knots_; ++k) {
    for (int c = 0; c < StanceState::kSize; ++c) traj.states[k][c] = x[state(k, c)];
    traj.controls[k].leg_accel = x[leg_accel(k)];
    traj.controls[k].ankle_torque = ankle_ ? x[ankle_torque(k)] : 0.0;
  }
  return traj;
}

Eigen::VectorXd DecisionLayout::encode(const Trajectory& traj) const {
  if (static_cast<int>(traj.num_knots()) != num_knots_ ||
      traj.controls.size() != traj.states.size()) {
    throw InvalidArgumentError("trajectory knot count does not match layout");
  }
  Eigen::VectorXd x(size());
  for (int k = 0; k < num_knots_; ++k) {
    for (int c = 0; c < StanceState::kSize; ++c) x[state(k, c)] = traj.states[k][c];
    x[leg_accel(k)] = traj.controls[k].leg_accel;
    if (ankle_) x[ankle_torque(k)] = traj.controls[k].ankle_torque;
  }
  x[duration()] = traj.duration;
  return x;
}

double inbound_vertical_velocity(double apex_height, double touchdown_height,
                                 const ModelParams& p) {
  const double drop = apex_height - touchdown_height;
  if (drop < 0.0) {
    throw InfeasibleTaskError("touchdown height is above the apex height");
  }
  return -std::sqrt(2.0 * p.gravity * drop);
}

std::vector<double> defect_constraints(const Trajectory& traj,
                                       const ModelParams& p) {
  traj.validate();
  const double h = traj.step();
  std::vector<double> out;
  out.reserve(6 * (traj.num_knots() - 1));
  StanceState f_prev = stance_derivative(traj.states[0], traj.controls[0], p);
  for (std::size_t i = 0; i + 1 < traj.num_knots(); ++i) {
    const StanceState f_next =
        stance_derivative(traj.states[i + 1], traj.controls[i + 1], p);
    for (int c = 0; c < 6; ++c) {
      out.push_back(traj.states[i + 1][c] - traj.states[i][c] -
                    0.5 * h * (f_prev[c] + f_next[c]));
    }
    f_prev = f_next;
  }
  return out;
}

FlightResiduals flight_linking_constraints(const GaitTask& task,
                                           const StanceState& first,
                                           const StanceState& last,
                                           const ModelParams& p) {
  if (first.y > task.apex_height) {
    throw InfeasibleTaskError("touchdown height is above the apex height");
  }
  const double two_g = 2.0 * p.gravity;
  return {first.xdot - task.apex_velocity,
          first.y + first.ydot * first.ydot / two_g - task.apex_height,
          last.xdot - task.apex_velocity,
          last.y + last.ydot * last.ydot / two_g - task.apex_height};
}

PeriodicityResiduals periodicity_constraints(const GaitTask& /*task*/,
                                             const StanceState& first,
                                             const StanceState& last,
                                             const ModelParams& p) {
  const double two_g = 2.0 * p.gravity;
  const double apex_in = first.y + first.ydot * first.ydot / two_g;
  const double apex_out = last.y + last.ydot * last.ydot / two_g;
  return {apex_out - apex_in, last.xdot - first.xdot, last.r0 - first.r0,
          last.r0dot - first.r0dot};
}

std::vector<double> cop_path_constraints(const Trajectory& traj,
                                         const ModelParams& p) {
  std::vector<double> out;
  out.reserve(2 * traj.num_knots());
  for (std::size_t k = 0; k < traj.num_knots(); ++k) {
    const double tau = traj.controls[k].ankle_torque;
    out.push_back(cop_margin(traj.states[k], tau, p, 1.0));
    out.push_back(cop_margin(traj.states[k], tau, p, -1.0));
  }
  return out;
}

double stride_distance(const GaitTask& task, const Trajectory& traj,
                       const ModelParams& p) {
  const StanceState& first = traj.states.front();
  const StanceState& last = traj.states.back();
  const double t_fall = -first.ydot / p.gravity;
  const double t_rise = last.ydot / p.gravity;
  return task.apex_velocity * t_fall + (last.x - first.x) + last.xdot * t_rise;
}

// ---------------------------------------------------------------------------

GaitNlp::GaitNlp(const GaitTask& task, const ModelParams& params,
                 const CostParams& cost, const TranscriptionConfig& config)
    : task_(task), params_(params), cost_(cost), config_(config),
      layout_(config.num_knots, task.ankle_enabled) {
  build_bounds();
  guess_ = aaslip::initial_guess(task_, params_, config_);
  build_pattern();
}

void GaitNlp::build_bounds() {
  const int n = layout_.num_knots();
  const int nv = layout_.size();
  x_lower_.resize(nv);
  x_upper_.resize(nv);
  const double reach = config_.leg_length.upper;
  const double vmax = config_.velocity_limit;
  for (int k = 0; k < n; ++k) {
    const double lo[6] = {-reach, config_.min_body_height, -vmax, -vmax,
                          config_.leg_length.lower, -vmax};
    const double hi[6] = {reach, reach, vmax, vmax, config_.leg_length.upper, vmax};
    for (int c = 0; c < 6; ++c) {
      x_lower_[layout_.state(k, c)] = lo[c];
      x_upper_[layout_.state(k, c)] = hi[c];
    }
    x_lower_[layout_.leg_accel(k)] = config_.leg_accel.lower;
    x_upper_[layout_.leg_accel(k)] = config_.leg_accel.upper;
    if (layout_.ankle_enabled()) {
      const bool endpoint = k == 0 || k == n - 1;
      x_lower_[layout_.ankle_torque(k)] = endpoint ? 0.0 : -config_.torque_limit;
      x_upper_[layout_.ankle_torque(k)] = endpoint ? 0.0 : config_.torque_limit;
    }
  }
  x_upper_[layout_.state(0, 0)] = 0.0;        // touchdown behind the foot
  x_upper_[layout_.state(0, 3)] = 0.0;        // falling into stance
  x_lower_[layout_.state(n - 1, 3)] = 0.0;    // rising out of stance
  x_lower_[layout_.duration()] = config_.duration.lower;
  x_upper_[layout_.duration()] = config_.duration.upper;

  std::vector<double> lo, hi;
  const auto add = [&](double l, double u, std::string label) {
    lo.push_back(l);
    hi.push_back(u);
    row_labels_.push_back(std::move(label));
  };
  for (int i = 0; i + 1 < n; ++i) {
    for (int c = 0; c < 6; ++c) {
      add(0.0, 0.0, "defect[" + std::to_string(i) + "]." + kStateNames[c]);
    }
  }
  row_flight_ = static_cast<int>(lo.size());
  add(0.0, 0.0, "flight.inbound_velocity");
  add(0.0, 0.0, "flight.inbound_height");
  add(0.0, 0.0, "flight.outbound_velocity");
  add(0.0, 0.0, "flight.outbound_height");
  row_periodic_ = static_cast<int>(lo.size());
  add(0.0, 0.0, "periodic.r0");
  add(0.0, 0.0, "periodic.r0dot");
  row_impact_ = static_cast<int>(lo.size());
  add(0.0, 0.0, "impact.touchdown_force");
  add(0.0, 0.0, "impact.liftoff_force");
  row_stride_ = static_cast<int>(lo.size());
  add(config_.min_stride, kInf, "stride_distance");
  row_length_ = static_cast<int>(lo.size());
  for (int k = 0; k < n; ++k) {
    add(config_.leg_length.lower, config_.leg_length.upper,
        "leg_length[" + std::to_string(k) + "]");
  }
  row_force_ = static_cast<int>(lo.size());
  for (int k = 1; k + 1 < n; ++k) {
    add(config_.leg_force.lower, config_.leg_force.upper,
        "leg_force[" + std::to_string(k) + "]");
  }
  row_cop_ = static_cast<int>(lo.size());
  if (layout_.ankle_enabled()) {
    for (int k = 1; k + 1 < n; ++k) {
      add(0.0, kInf, "cop_heel[" + std::to_string(k) + "]");
      add(0.0, kInf, "cop_toe[" + std::to_string(k) + "]");
    }
  }
  c_lower_ = Eigen::Map<Eigen::VectorXd>(lo.data(), static_cast<int>(lo.size()));
  c_upper_ = Eigen::Map<Eigen::VectorXd>(hi.data(), static_cast<int>(hi.size()));
}

void GaitNlp::build_pattern() {
  pattern_ = {};
  EntryWriter writer(&pattern_);
  walk_jacobian(*this, guess_, writer, row_flight_, row_periodic_, row_impact_,
                row_stride_, row_length_, row_force_, row_cop_);

  hessian_pattern_ = {};
  EntryWriter hess_writer(&hessian_pattern_);
  walk_hessian(*this, guess_, 1.0, Eigen::VectorXd::Zero(num_constraints()),
               hess_writer, row_flight_, row_impact_, row_stride_, row_length_,
               row_force_, row_cop_);
}

void GaitNlp::jacobian_values(const Eigen::VectorXd& x,
                              std::span<double> values) const {
  if (values.size() != pattern_.size()) {
    throw InvalidArgumentError("Jacobian value buffer has the wrong size");
  }
  EntryWriter writer(values);
  walk_jacobian(*this, x, writer, row_flight_, row_periodic_, row_impact_,
                row_stride_, row_length_, row_force_, row_cop_);
}

void GaitNlp::constraints(const Eigen::VectorXd& x, Eigen::VectorXd& c) const {
  const Trajectory traj = layout_.decode(x);
  const int n = layout_.num_knots();
  c.resize(num_constraints());

  const std::vector<double> defects = defect_constraints(traj, params_);
  for (std::size_t i = 0; i < defects.size(); ++i) c[static_cast<int>(i)] = defects[i];

  const StanceState& first = traj.states.front();
  const StanceState& last = traj.states.back();
  const double two_g = 2.0 * params_.gravity;
  c[row_flight_ + 0] = first.xdot - task_.apex_velocity;
  c[row_flight_ + 1] = first.y + first.ydot * first.ydot / two_g - task_.apex_height;
  c[row_flight_ + 2] = last.xdot - task_.apex_velocity;
  c[row_flight_ + 3] = last.y + last.ydot * last.ydot / two_g - task_.apex_height;

  c[row_periodic_ + 0] = last.r0 - first.r0;
  c[row_periodic_ + 1] = last.r0dot - first.r0dot;

  c[row_impact_ + 0] = leg_force(first, params_);
  c[row_impact_ + 1] = leg_force(last, params_);

  c[row_stride_] = stride_distance(task_, traj, params_);

  for (int k = 0; k < n; ++k) {
    c[row_length_ + k] = leg_length_and_angle(traj.states[k]).length;
  }
  for (int k = 1; k + 1 < n; ++k) {
    c[row_force_ + k - 1] = leg_force(traj.states[k], params_);
  }
  if (layout_.ankle_enabled()) {
    for (int k = 1; k + 1 < n; ++k) {
      const double tau = traj.controls[k].ankle_torque;
      c[row_cop_ + 2 * (k - 1)] = cop_margin(traj.states[k], tau, params_, 1.0);
      c[row_cop_ + 2 * (k - 1) + 1] = cop_margin(traj.states[k], tau, params_, -1.0);
    }
  }
}

double GaitNlp::energy(const Eigen::VectorXd& x) const {
  return energy_required(layout_.decode(x), params_, cost_);
}

double GaitNlp::distance(const Eigen::VectorXd& x) const {
  return stride_distance(task_, layout_.decode(x), params_);
}

double GaitNlp::objective(const Eigen::VectorXd& x) const {
  const Trajectory traj = layout_.decode(x);
  const double d = stride_distance(task_, traj, params_);
  if (!(d > 0.0)) return kInf;
  return cost_of_transport(energy_required(traj, params_, cost_), d, params_);
}

void GaitNlp::objective_gradient(const Eigen::VectorXd& x,
                                 Eigen::VectorXd& grad) const {
  const EnergyTerms t = energy_terms(*this, layout_.decode(x));
  const double weight = params_.mass * params_.gravity;
  grad = t.energy_grad / (weight * t.distance);
  for (int q = 0; q < 5; ++q) {
    grad[t.dist_vars[q]] -=
        t.dist_grad[q] * t.energy / (weight * t.distance * t.distance);
  }
}

void GaitNlp::hessian_values(const Eigen::VectorXd& x, double sigma,
                             const Eigen::VectorXd& lambda,
                             std::span<double> values) const {
  if (values.size() != hessian_pattern_.size()) {
    throw InvalidArgumentError("Hessian value buffer has the wrong size");
  }
  if (lambda.size() != num_constraints()) {
    throw InvalidArgumentError("multiplier vector has the wrong size");
  }
  EntryWriter writer(values);
  walk_hessian(*this, x, sigma, lambda, writer, row_flight_, row_impact_,
               row_stride_, row_length_, row_force_, row_cop_);
}

std::vector<std::vector<int>> GaitNlp::hessian_blocks() const {
  std::vector<std::vector<int>> blocks;
  for (int k = 0; k < layout_.num_knots(); ++k) {
    std::vector<int> block;
    for (int c = 0; c < 6; ++c) block.push_back(layout_.state(k, c));
    block.push_back(layout_.leg_accel(k));
    if (layout_.ankle_enabled()) block.push_back(layout_.ankle_torque(k));
    blocks.push_back(std::move(block));
  }
  blocks.push_back({layout_.duration()});
  return blocks;
}

std::string GaitNlp::constraint_label(int row) const {
  if (row < 0 || row >= static_cast<int>(row_labels_.size())) {
    return NlpProblem::constraint_label(row);
  }
  return row_labels_[row];
}

std::string GaitNlp::variable_label(int index) const {
  if (index == layout_.duration()) return "T";
  const int n = layout_.num_knots();
  if (index < 6 * n) {
    return std::string(kStateNames[index % 6]) + "[" + std::to_string(index / 6) + "]";
  }
  const int rel = index - 6 * n;
  const int per = layout_.controls_per_knot();
  const int knot = rel / per;
  return std::string(rel % per == 0 ? "r0ddot" : "tau") + "[" +
         std::to_string(knot) + "]";
}

GaitNlp build_nlp(const GaitTask& task, const ModelParams& params,
                  const CostParams& cost, const TranscriptionConfig& config) {
  task.validate();
  params.validate();
  cost.validate();
  config.validate();
  if (task.apex_height <= config.min_body_height) {
    throw InfeasibleTaskError(
        "apex height is below the minimum stance body height");
  }
  if (task.apex_height < config.leg_length.lower) {
    throw InfeasibleTaskError("apex height is below the shortest admissible leg");
  }
  return GaitNlp(task, params, cost, config);
}

Eigen::VectorXd initial_guess(const GaitTask& task, const ModelParams& params,
                              const TranscriptionConfig& config) {
  const DecisionLayout layout(config.num_knots, task.ankle_enabled);
  const int n = config.num_knots;
  // Passive-SLIP style touchdown: nearly extended leg at ~68 degrees, capped
  // so touchdown is not above the apex.
  constexpr double kTouchdownAngle = 68.0 * std::numbers::pi / 180.0;
  const double rest = std::min(params.leg_length, config.leg_length.upper);
  const double r_td = 0.97 * rest;
  const double y_td = std::min(r_td * std::sin(kTouchdownAngle), task.apex_height);
  const double half_span = std::sqrt(std::max(r_td * r_td - y_td * y_td, 0.0));
  const double duration = std::clamp(2.0 * half_span / task.apex_velocity,
                                     config.duration.lower, config.duration.upper);
  const double sag = std::min(0.05 * y_td, std::max(0.0, y_td - config.leg_length.lower) * 0.5);
  const double r0 = std::clamp(rest, config.leg_length.lower, config.leg_length.upper);

  Trajectory traj;
  traj.duration = duration;
  traj.states.resize(n);
  traj.controls.resize(n);
  for (int k = 0; k < n; ++k) {
    const double s = static_cast<double>(k) / static_cast<double>(n - 1);
    StanceState& st = traj.states[k];
    st.x = -half_span + 2.0 * half_span * s;
    st.xdot = 2.0 * half_span / duration;
    st.y = y_td - 4.0 * sag * s * (1.0 - s);
    st.ydot = -4.0 * sag * (1.0 - 2.0 * s) / duration;
    st.r0 = r0;
    st.r0dot = 0.0;
  }
  return layout.encode(traj);
}

Trajectory resample(const Trajectory& traj, int num_knots) {
  traj.validate();
  if (num_knots < 2) throw InvalidArgumentError("resample needs >= 2 knots");
  Trajectory out;
  out.duration = traj.duration;
  out.states.resize(num_knots);
  out.controls.resize(num_knots);
  const int m = static_cast<int>(traj.num_knots());
  for (int k = 0; k < num_knots; ++k) {
    const double pos = static_cast<double>(k) * (m - 1) / (num_knots - 1);
    const int i = std::min(static_cast<int>(pos), m - 2);
    const double w = pos - i;
    for (int c = 0; c < 6; ++c) {
      out.states[k][c] = (1 - w) * traj.states[i][c] + w * traj.states[i + 1][c];
    }
    out.controls[k].leg_accel =
        (1 - w) * traj.controls[i].leg_accel + w * traj.controls[i + 1].leg_accel;
    out.controls[k].ankle_torque =
        (1 - w) * traj.controls[i].ankle_torque + w * traj.controls[i + 1].ankle_torque;
  }
  return out;
}

}  // namespace aaslip
