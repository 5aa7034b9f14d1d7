#include "aaslip/sqp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/SparseCore>

#include "aaslip/error.hpp"
#include "aaslip/qp.hpp"

namespace aaslip {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;
using Triplet = Eigen::Triplet<double>;

constexpr double kActiveBound = 1e-10;

bool is_finite_bound(double v) { return std::isfinite(v) && std::abs(v) < 1e19; }

struct Evaluation {
  double f = 0.0;
  Vec grad;
  Vec c;
  SpMat jac;
  double viol_l1 = 0.0;
  double viol_max = 0.0;
};

void check_finite_values(const NlpProblem& nlp, const Evaluation& e) {
  if (!std::isfinite(e.f)) throw EvaluationError("objective is not finite", -1);
  for (Eigen::Index i = 0; i < e.c.size(); ++i) {
    if (!std::isfinite(e.c[i])) {
      throw EvaluationError(
          "constraint " + nlp.constraint_label(static_cast<int>(i)) +
              " is not finite",
          static_cast<int>(i));
    }
  }
}

class Sqp {
 public:
  Sqp(const NlpProblem& nlp, const SolverOptions& options)
      : nlp_(nlp), options_(options), n_(nlp.num_variables()),
        m_(nlp.num_constraints()), xl_(nlp.variable_lower()),
        xu_(nlp.variable_upper()), cl_(nlp.constraint_lower()),
        cu_(nlp.constraint_upper()), pattern_(nlp.jacobian_pattern()),
        blocks_(nlp.hessian_blocks()),
        exact_(options.hessian == HessianMode::kExact && nlp.has_hessian()) {
    layout_elastics();
    reset_hessian();
  }

  NlpResult run(const Vec& guess);

 private:
  struct Step {
    Vec d;
    Vec lambda;  // constraint multipliers
    double elastic_sum = 0.0;
    bool ok = false;
    bool nonconvex = false;
  };

  void layout_elastics();
  void reset_hessian();
  Evaluation evaluate(const Vec& x, bool derivatives) const;
  void violation(const Vec& x, const Vec& c, double& l1, double& max) const;
  Step solve_subproblem(const Vec& x, const Evaluation& e, const Vec& c_model,
                        double rho, double radius) const;
  // Exact mode: raises the identity shift until the QP is convex enough.
  Step solve_regularized(const Vec& x, const Evaluation& e, const Vec& c_model,
                         double rho, double radius);
  void compute_exact_hessian(const Vec& x, const Vec& lambda);
  SpMat assemble_hessian() const;
  double hessian_quadratic(const Vec& d) const;
  void update_hessian(const Vec& s, const Vec& y);
  // Scaled max-norm of the projected Lagrangian gradient.
  double stationarity(const Vec& x, const Evaluation& e, const Vec& lambda) const;
  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

  const NlpProblem& nlp_;
  const SolverOptions& options_;
  const int n_;
  const int m_;
  const Vec& xl_;
  const Vec& xu_;
  const Vec& cl_;
  const Vec& cu_;
  const SparsityPattern& pattern_;
  std::vector<std::vector<int>> blocks_;
  std::vector<Eigen::MatrixXd> hess_;
  std::vector<bool> block_scaled_;

  const bool exact_;
  SpMat exact_hess_;
  double shift_ = 0.0;       // identity shift in use
  double last_shift_ = 0.0;  // last nonzero shift that worked

  // Elastic variable indices per constraint row (-1 when absent).
  std::vector<int> elastic_lo_;
  std::vector<int> elastic_hi_;
  int num_elastic_ = 0;

  std::chrono::steady_clock::time_point start_;
};

void Sqp::layout_elastics() {
  elastic_lo_.assign(m_, -1);
  elastic_hi_.assign(m_, -1);
  for (int i = 0; i < m_; ++i) {
    const bool eq = cl_[i] == cu_[i];
    if (eq || is_finite_bound(cl_[i])) elastic_lo_[i] = num_elastic_++;
    if (eq || is_finite_bound(cu_[i])) elastic_hi_[i] = num_elastic_++;
  }
}

void Sqp::reset_hessian() {
  hess_.clear();
  block_scaled_.assign(blocks_.size(), false);
  for (const auto& block : blocks_) {
    const auto k = static_cast<Eigen::Index>(block.size());
    hess_.push_back(Eigen::MatrixXd::Identity(k, k));
  }
}

void Sqp::violation(const Vec& x, const Vec& c, double& l1, double& max) const {
  l1 = 0.0;
  max = 0.0;
  for (int i = 0; i < m_; ++i) {
    const double v = std::max({0.0, cl_[i] - c[i], c[i] - cu_[i]});
    l1 += v;
    max = std::max(max, v);
  }
  for (int j = 0; j < n_; ++j) {
    const double v = std::max({0.0, xl_[j] - x[j], x[j] - xu_[j]});
    max = std::max(max, v);
  }
}

Evaluation Sqp::evaluate(const Vec& x, bool derivatives) const {
  Evaluation e;
  e.f = nlp_.objective(x);
  e.c.resize(m_);
  nlp_.constraints(x, e.c);
  check_finite_values(nlp_, e);
  violation(x, e.c, e.viol_l1, e.viol_max);
  if (derivatives) {
    e.grad.resize(n_);
    nlp_.objective_gradient(x, e.grad);
    std::vector<double> values(pattern_.size());
    nlp_.jacobian_values(x, values);
    std::vector<Triplet> triplets;
    triplets.reserve(values.size());
    for (std::size_t k = 0; k < values.size(); ++k) {
      if (!std::isfinite(values[k])) {
        throw EvaluationError("Jacobian of constraint " +
                                  nlp_.constraint_label(pattern_.rows[k]) +
                                  " is not finite",
                              pattern_.rows[k]);
      }
      triplets.emplace_back(pattern_.rows[k], pattern_.cols[k], values[k]);
    }
    if (!e.grad.allFinite()) {
      throw EvaluationError("objective gradient is not finite", -1);
    }
    e.jac.resize(m_, n_);
    e.jac.setFromTriplets(triplets.begin(), triplets.end());
  }
  return e;
}

void Sqp::compute_exact_hessian(const Vec& x, const Vec& lambda) {
  const SparsityPattern& pat = nlp_.hessian_pattern();
  std::vector<double> values(pat.size());
  nlp_.hessian_values(x, 1.0, lambda, values);
  std::vector<Triplet> triplets;
  triplets.reserve(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!std::isfinite(values[k])) {
      throw EvaluationError("Hessian is not finite", -1);
    }
    triplets.emplace_back(pat.rows[k], pat.cols[k], values[k]);
  }
  exact_hess_.resize(n_, n_);
  exact_hess_.setFromTriplets(triplets.begin(), triplets.end());
}

SpMat Sqp::assemble_hessian() const {
  const int nz = n_ + num_elastic_;
  std::vector<Triplet> triplets;
  if (exact_) {
    triplets.reserve(exact_hess_.nonZeros() + n_);
    for (int col = 0; col < exact_hess_.outerSize(); ++col) {
      for (SpMat::InnerIterator it(exact_hess_, col); it; ++it) {
        triplets.emplace_back(it.row(), col, it.value());
      }
    }
    for (int j = 0; j < n_; ++j) triplets.emplace_back(j, j, shift_);
    SpMat h(nz, nz);
    h.setFromTriplets(triplets.begin(), triplets.end());
    return h;
  }
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const auto& idx = blocks_[b];
    for (std::size_t i = 0; i < idx.size(); ++i) {
      for (std::size_t j = 0; j < idx.size(); ++j) {
        triplets.emplace_back(idx[i], idx[j], hess_[b](i, j));
      }
    }
  }
  SpMat h(nz, nz);
  h.setFromTriplets(triplets.begin(), triplets.end());
  return h;
}

double Sqp::hessian_quadratic(const Vec& d) const {
  if (exact_) return d.dot(exact_hess_ * d) + shift_ * d.squaredNorm();
  double total = 0.0;
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const auto& idx = blocks_[b];
    Vec db(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) db[i] = d[idx[i]];
    total += db.dot(hess_[b] * db);
  }
  return total;
}

// QP in z = (d, elastics):
//   min 1/2 d'Bd + g'd + rho * sum(elastics)
//   equality rows:    J_i d + p_i - q_i = cl_i - cm_i
//   lower-bound rows: J_i d + p_i      >= cl_i - cm_i
//   upper-bound rows: -J_i d + q_i     >= cm_i - cu_i
//   elastics >= 0, max(xl - x, -radius) <= d <= min(xu - x, radius)
// where cm is the constraint model value (c(x) for the SQP step, the
// second-order-corrected value for the correction step).
Sqp::Step Sqp::solve_subproblem(const Vec& x, const Evaluation& e,
                                const Vec& c_model, double rho,
                                double radius) const {
  const int nz = n_ + num_elastic_;
  std::vector<Triplet> a_trip;
  std::vector<Triplet> g_trip;
  std::vector<double> b_vals;
  std::vector<double> h_vals;
  std::vector<int> eq_row(m_, -1);
  std::vector<int> lo_row(m_, -1);
  std::vector<int> hi_row(m_, -1);

  // Row-wise view of the (column-major) Jacobian.
  std::vector<std::vector<std::pair<int, double>>> rows(m_);
  for (int col = 0; col < e.jac.outerSize(); ++col) {
    for (SpMat::InnerIterator it(e.jac, col); it; ++it) {
      rows[it.row()].emplace_back(col, it.value());
    }
  }

  for (int i = 0; i < m_; ++i) {
    if (cl_[i] == cu_[i]) {
      const int r = static_cast<int>(b_vals.size());
      eq_row[i] = r;
      for (const auto& [col, v] : rows[i]) a_trip.emplace_back(r, col, v);
      a_trip.emplace_back(r, n_ + elastic_lo_[i], 1.0);
      a_trip.emplace_back(r, n_ + elastic_hi_[i], -1.0);
      b_vals.push_back(cl_[i] - c_model[i]);
      continue;
    }
    if (elastic_lo_[i] >= 0) {
      const int r = static_cast<int>(h_vals.size());
      lo_row[i] = r;
      for (const auto& [col, v] : rows[i]) g_trip.emplace_back(r, col, v);
      g_trip.emplace_back(r, n_ + elastic_lo_[i], 1.0);
      h_vals.push_back(cl_[i] - c_model[i]);
    }
    if (elastic_hi_[i] >= 0) {
      const int r = static_cast<int>(h_vals.size());
      hi_row[i] = r;
      for (const auto& [col, v] : rows[i]) g_trip.emplace_back(r, col, -v);
      g_trip.emplace_back(r, n_ + elastic_hi_[i], 1.0);
      h_vals.push_back(c_model[i] - cu_[i]);
    }
  }
  for (int k = 0; k < num_elastic_; ++k) {
    const int r = static_cast<int>(h_vals.size());
    g_trip.emplace_back(r, n_ + k, 1.0);
    h_vals.push_back(0.0);
  }
  for (int j = 0; j < n_; ++j) {
    if (xl_[j] == xu_[j]) {
      // Two opposing bound rows would leave the interior empty.
      a_trip.emplace_back(static_cast<int>(b_vals.size()), j, 1.0);
      b_vals.push_back(xl_[j] - x[j]);
      continue;
    }
    const double lo = is_finite_bound(xl_[j]) ? std::max(xl_[j] - x[j], -radius) : -radius;
    const double hi = is_finite_bound(xu_[j]) ? std::min(xu_[j] - x[j], radius) : radius;
    g_trip.emplace_back(static_cast<int>(h_vals.size()), j, 1.0);
    h_vals.push_back(std::min(lo, 0.0));
    g_trip.emplace_back(static_cast<int>(h_vals.size()), j, -1.0);
    h_vals.push_back(-std::max(hi, 0.0));
  }

  QpProblem qp;
  qp.hessian = assemble_hessian();
  qp.linear = Vec::Constant(nz, rho);
  qp.linear.head(n_) = e.grad;
  qp.eq_matrix.resize(static_cast<int>(b_vals.size()), nz);
  qp.eq_matrix.setFromTriplets(a_trip.begin(), a_trip.end());
  qp.eq_rhs = Eigen::Map<const Vec>(b_vals.data(), static_cast<int>(b_vals.size()));
  qp.ineq_matrix.resize(static_cast<int>(h_vals.size()), nz);
  qp.ineq_matrix.setFromTriplets(g_trip.begin(), g_trip.end());
  qp.ineq_rhs = Eigen::Map<const Vec>(h_vals.data(), static_cast<int>(h_vals.size()));

  QpOptions qp_options;
  qp_options.check_inertia = exact_;
  const QpSolution sol = solve_qp(qp, qp_options);
  Step step;
  step.nonconvex = sol.status == QpStatus::kNonconvex;
  step.ok = sol.status != QpStatus::kNumericalFailure && !step.nonconvex &&
            sol.z.allFinite();
  if (!step.ok) return step;

  step.d = sol.z.head(n_);
  step.elastic_sum = sol.z.tail(num_elastic_).cwiseMax(0.0).sum();
  step.lambda = Vec::Zero(m_);
  for (int i = 0; i < m_; ++i) {
    if (eq_row[i] >= 0) {
      step.lambda[i] = sol.eq_multipliers[eq_row[i]];
    } else {
      if (lo_row[i] >= 0) step.lambda[i] += sol.ineq_multipliers[lo_row[i]];
      if (hi_row[i] >= 0) step.lambda[i] -= sol.ineq_multipliers[hi_row[i]];
    }
  }
  // Keep the step inside the box despite interior-point round-off.
  for (int j = 0; j < n_; ++j) {
    step.d[j] = std::clamp(x[j] + step.d[j], xl_[j], xu_[j]) - x[j];
  }
  return step;
}

Sqp::Step Sqp::solve_regularized(const Vec& x, const Evaluation& e,
                                 const Vec& c_model, double rho, double radius) {
  if (!exact_) return solve_subproblem(x, e, c_model, rho, radius);
  constexpr double kShiftMax = 1e10;
  shift_ = 0.0;
  Step step = solve_subproblem(x, e, c_model, rho, radius);
  if (!step.nonconvex) return step;
  shift_ = last_shift_ == 0.0 ? 1e-4 : std::max(1e-20, last_shift_ / 3.0);
  for (;;) {
    step = solve_subproblem(x, e, c_model, rho, radius);
    if (!step.nonconvex) {
      last_shift_ = shift_;
      return step;
    }
    shift_ *= last_shift_ == 0.0 ? 100.0 : 8.0;
    if (shift_ > kShiftMax) return step;
  }
}

// Damped BFGS (Powell) on each block, with Shanno-Phua sizing on the first
// usable curvature pair.
void Sqp::update_hessian(const Vec& s, const Vec& y) {
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const auto& idx = blocks_[b];
    const auto k = static_cast<Eigen::Index>(idx.size());
    Vec sb(k), yb(k);
    for (Eigen::Index i = 0; i < k; ++i) {
      sb[i] = s[idx[i]];
      yb[i] = y[idx[i]];
    }
    if (sb.squaredNorm() < 1e-28) continue;
    Eigen::MatrixXd& B = hess_[b];
    double sy = sb.dot(yb);
    if (!block_scaled_[b] && sy > 1e-14) {
      B = Eigen::MatrixXd::Identity(k, k) * (yb.squaredNorm() / sy);
      block_scaled_[b] = true;
    }
    const Vec bs = B * sb;
    const double sbs = sb.dot(bs);
    if (!(sbs > 1e-20)) continue;
    const double theta = sy >= 0.2 * sbs ? 1.0 : 0.8 * sbs / (sbs - sy);
    const Vec r = theta * yb + (1.0 - theta) * bs;
    const double sr = sb.dot(r);
    if (!(sr > 1e-20)) continue;
    Eigen::MatrixXd updated = B - bs * bs.transpose() / sbs + r * r.transpose() / sr;
    if (!updated.allFinite()) {
      B.setIdentity();
      block_scaled_[b] = false;
      continue;
    }
    B = 0.5 * (updated + updated.transpose());
  }
}

double Sqp::stationarity(const Vec& x, const Evaluation& e,
                         const Vec& lambda) const {
  const Vec r = e.grad - e.jac.transpose() * lambda;
  double worst = 0.0;
  for (int j = 0; j < n_; ++j) {
    if (xl_[j] == xu_[j]) continue;
    double v = std::abs(r[j]);
    // Bound multipliers absorb the sign-compatible part.
    if (x[j] <= xl_[j] + kActiveBound) v = std::max(0.0, -r[j]);
    if (x[j] >= xu_[j] - kActiveBound) v = std::max(0.0, r[j]);
    worst = std::max(worst, v);
  }
  return worst / std::max(1.0, e.grad.lpNorm<Eigen::Infinity>());
}

NlpResult Sqp::run(const Vec& guess) {
  start_ = std::chrono::steady_clock::now();
  Vec x = guess.cwiseMax(xl_).cwiseMin(xu_);
  Evaluation e = evaluate(x, true);

  // The elastic penalty of the QP is also the l1 merit penalty, so the QP
  // objective gives the predicted merit reduction directly.
  double rho = 100.0;
  double radius = 1.0;
  constexpr double kRhoMax = 1e8;
  constexpr double kRadiusMax = 10.0;
  constexpr double kRadiusMin = 1e-12;
  constexpr double kAccept = 0.1;

  NlpResult result;
  result.multipliers = Vec::Zero(m_);
  SolveReport& rep = result.report;
  int iter = 0;
  std::string reason = "max-iterations";
  bool converged = false;
  bool hessian_stale = true;

  for (; iter < options_.max_iterations; ++iter) {
    if (options_.max_wall_time > 0.0 && elapsed() > options_.max_wall_time) {
      reason = "wall-time";
      break;
    }

    if (exact_ && hessian_stale) compute_exact_hessian(x, result.multipliers);
    hessian_stale = false;
    Step step = solve_regularized(x, e, e.c, rho, radius);
    for (int k = 0; k < 4 && step.ok && rho < kRhoMax; ++k) {
      // Elastics still carrying infeasibility: the penalty may be too small.
      if (step.elastic_sum <= std::max(1e-12, 1e-6 * e.viol_l1)) break;
      if (step.lambda.lpNorm<Eigen::Infinity>() < 0.5 * rho) break;
      rho = std::min(kRhoMax, 10.0 * rho);
      step = solve_regularized(x, e, e.c, rho, radius);
    }
    if (!step.ok && !exact_) {
      reset_hessian();
      step = solve_subproblem(x, e, e.c, rho, radius);
    }
    if (!step.ok) {
      reason = "qp-failure";
      break;
    }

    const double kkt = stationarity(x, e, step.lambda);
    const double dnorm = step.d.lpNorm<Eigen::Infinity>();
    const double model = e.grad.dot(step.d) + 0.5 * hessian_quadratic(step.d) +
                         rho * step.elastic_sum;
    const double pred = rho * e.viol_l1 - model;
    const double merit0 = e.f + rho * e.viol_l1;

    if (options_.verbose) {
      std::cerr << "iter " << iter << " f=" << e.f << " viol=" << e.viol_max
                << " kkt=" << kkt << " |d|=" << dnorm << " radius=" << radius
                << " rho=" << rho << " shift=" << shift_ << " pred=" << pred
                << "\n";
    }

    const bool feasible = e.viol_max <= options_.tolerance;
    if (feasible && kkt <= options_.optimality_tolerance) {
      converged = true;
      reason = "optimal";
      break;
    }
    if (!(pred > 1e-15 * std::max(1.0, std::abs(merit0))) ||
        dnorm <= 1e-14 * (1.0 + x.lpNorm<Eigen::Infinity>())) {
      // The model sees no further decrease: a stationary point of the merit.
      if (feasible) {
        converged = true;
        reason = "stationary";
      } else {
        reason = "infeasible-stationary";
      }
      break;
    }

    const auto trial_ratio = [&](const Vec& trial, Evaluation& out) {
      try {
        out = evaluate(trial, false);
      } catch (const EvaluationError&) {
        return -1.0;
      }
      return (merit0 - (out.f + rho * out.viol_l1)) / pred;
    };

    Vec x_new = x + step.d;
    Evaluation e_new;
    double ratio = trial_ratio(x_new, e_new);
    if (ratio < kAccept && e_new.c.size() == m_) {
      // Second-order correction: re-linearize at the trial point.
      const Vec c_soc = e_new.c - e.jac * step.d;
      const Step corr = solve_subproblem(x, e, c_soc, rho, radius);
      if (corr.ok) {
        Vec x_soc = x + corr.d;
        Evaluation e_soc;
        const double ratio_soc = trial_ratio(x_soc, e_soc);
        if (ratio_soc >= kAccept) {
          x_new = std::move(x_soc);
          e_new = std::move(e_soc);
          ratio = ratio_soc;
        }
      }
    }

    if (ratio < kAccept) {
      radius = 0.25 * std::min(radius, dnorm);
      if (radius < kRadiusMin) {
        if (feasible) {
          converged = true;
          reason = "no-progress-feasible";
        } else {
          reason = "trust-region-collapse";
        }
        break;
      }
      continue;
    }
    if (ratio >= 0.75 && dnorm >= 0.9 * radius) {
      radius = std::min(kRadiusMax, 2.0 * radius);
    }

    Evaluation e_full = evaluate(x_new, true);
    if (!exact_) {
      const Vec grad_lag_new = e_full.grad - e_full.jac.transpose() * step.lambda;
      const Vec grad_lag_old = e.grad - e.jac.transpose() * step.lambda;
      update_hessian(x_new - x, grad_lag_new - grad_lag_old);
    }
    result.multipliers = step.lambda;
    hessian_stale = true;
    x = std::move(x_new);
    e = std::move(e_full);
  }

  rep.converged = converged;
  rep.constraint_violation = e.viol_max;
  rep.objective_value = e.f;
  rep.iterations = iter;
  rep.wall_time = elapsed();
  rep.termination_reason = reason;
  result.x = std::move(x);
  return result;
}

}  // namespace

double max_constraint_violation(const NlpProblem& nlp, const Eigen::VectorXd& x) {
  Vec c(nlp.num_constraints());
  nlp.constraints(x, c);
  double max = 0.0;
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    max = std::max({max, nlp.constraint_lower()[i] - c[i],
                    c[i] - nlp.constraint_upper()[i]});
  }
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    max = std::max({max, nlp.variable_lower()[j] - x[j],
                    x[j] - nlp.variable_upper()[j]});
  }
  return max;
}

NlpResult solve_nlp(const NlpProblem& nlp, const Eigen::VectorXd& guess,
                    const SolverOptions& options) {
  if (guess.size() != nlp.num_variables()) {
    throw InvalidArgumentError("initial guess has " + std::to_string(guess.size()) +
                               " entries, problem has " +
                               std::to_string(nlp.num_variables()) + " variables");
  }
  if (!(options.tolerance > 0.0)) {
    throw InvalidArgumentError("solver tolerance must be positive");
  }
  Sqp sqp(nlp, options);
  return sqp.run(guess);
}

NlpResult solve_nlp_multistart(const NlpProblem& nlp,
                               const Eigen::VectorXd& guess,
                               const SolverOptions& options) {
  NlpResult best = solve_nlp(nlp, guess, options);
  int attempts = 1;
  double total_time = best.report.wall_time;
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> noise(-options.perturbation,
                                               options.perturbation);
  for (int k = 0; k < options.multistart && !best.report.converged; ++k) {
    Vec start = guess;
    for (Eigen::Index j = 0; j < start.size(); ++j) start[j] += noise(rng);
    NlpResult trial;
    try {
      trial = solve_nlp(nlp, start, options);
    } catch (const EvaluationError&) {
      ++attempts;
      continue;
    }
    ++attempts;
    total_time += trial.report.wall_time;
    if (trial.report.converged ||
        trial.report.constraint_violation < best.report.constraint_violation) {
      best = std::move(trial);
    }
  }
  best.report.attempts = attempts;
  best.report.wall_time = total_time;
  return best;
}

GradientCheck check_gradients(const NlpProblem& nlp, const Eigen::VectorXd& point,
                              double step) {
  const int n = nlp.num_variables();
  const int m = nlp.num_constraints();
  if (point.size() != n) {
    throw InvalidArgumentError("gradient-check point has the wrong dimension");
  }
  const Vec& lo = nlp.variable_lower();
  const Vec& hi = nlp.variable_upper();
  const SparsityPattern& pattern = nlp.jacobian_pattern();

  Vec grad(n);
  nlp.objective_gradient(point, grad);
  std::vector<double> jac(pattern.size());
  nlp.jacobian_values(point, jac);

  // Column -> pattern entries.
  std::vector<std::vector<std::size_t>> by_col(n);
  for (std::size_t k = 0; k < pattern.size(); ++k) by_col[pattern.cols[k]].push_back(k);

  GradientCheck out;
  const auto consider = [&](double a, double fd, int row, int var) {
    if (!std::isfinite(a) || !std::isfinite(fd)) {
      throw EvaluationError("non-finite derivative while checking " +
                                (row < 0 ? std::string("objective")
                                         : nlp.constraint_label(row)),
                            row);
    }
    const double err = std::abs(a - fd) / std::max({1.0, std::abs(a), std::abs(fd)});
    if (err > out.max_relative_error || out.worst_variable < 0) {
      out.max_relative_error = err;
      out.worst_row = row;
      out.worst_variable = var;
      out.analytic = a;
      out.finite_difference = fd;
    }
  };

  // Declared nonzeros are compared with their difference quotients; rows
  // outside the declared structure must difference to zero.
  std::vector<char> declared(m, 0);
  const auto compare_column = [&](int j, const auto& quotient) {
    for (std::size_t k : by_col[j]) {
      declared[pattern.rows[k]] = 1;
      consider(jac[k], quotient(pattern.rows[k]), pattern.rows[k], j);
    }
    for (int r = 0; r < m; ++r) {
      if (!declared[r]) consider(0.0, quotient(r), r, j);
    }
    for (std::size_t k : by_col[j]) declared[pattern.rows[k]] = 0;
  };

  Vec x = point;
  Vec c0(m), c1(m), c2(m);
  for (int j = 0; j < n; ++j) {
    if (lo[j] == hi[j]) continue;
    const double xj = point[j];
    double f1, f2;
    double scale;
    // Central differences unless a bound is within one step, in which case
    // a one-sided second-order stencil points into the box.
    int mode = 0;
    if (xj - step < lo[j]) mode = 1;
    else if (xj + step > hi[j]) mode = -1;

    if (mode == 0) {
      x[j] = xj + step;
      f1 = nlp.objective(x);
      nlp.constraints(x, c1);
      x[j] = xj - step;
      f2 = nlp.objective(x);
      nlp.constraints(x, c2);
      x[j] = xj;
      scale = 1.0 / (2.0 * step);
      consider(grad[j], (f1 - f2) * scale, -1, j);
      compare_column(j, [&](int r) { return (c1[r] - c2[r]) * scale; });
    } else {
      const double h = mode * step;
      const double f0 = nlp.objective(x);
      nlp.constraints(x, c0);
      x[j] = xj + h;
      f1 = nlp.objective(x);
      nlp.constraints(x, c1);
      x[j] = xj + 2.0 * h;
      f2 = nlp.objective(x);
      nlp.constraints(x, c2);
      x[j] = xj;
      scale = 1.0 / (2.0 * h);
      consider(grad[j], (-3.0 * f0 + 4.0 * f1 - f2) * scale, -1, j);
      compare_column(j, [&](int r) {
        return (-3.0 * c0[r] + 4.0 * c1[r] - c2[r]) * scale;
      });
    }
  }
  out.worst_label = (out.worst_row < 0 ? std::string("objective")
                                       : nlp.constraint_label(out.worst_row)) +
                    " / " + nlp.variable_label(out.worst_variable);
  return out;
}

}  // namespace aaslip
