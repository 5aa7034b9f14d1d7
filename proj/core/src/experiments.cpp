#include "aaslip/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "aaslip/error.hpp"

namespace aaslip {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Candidate {
  GaitSolution solution;
  bool valid = false;
};

// Warm solve with a cold fallback; evaluation errors count as failures.
Candidate solve_with_fallback(const GaitNlp& nlp, const Eigen::VectorXd& warm,
                              const GaitSolveOptions& options) {
  Candidate c;
  const auto attempt = [&](const Eigen::VectorXd& start, bool is_warm) {
    try {
      GaitSolution s = solve(nlp, start, options, is_warm);
      if (!c.valid || (s.report.converged && !c.solution.report.converged)) {
        c.solution = std::move(s);
        c.valid = true;
      }
    } catch (const EvaluationError&) {
    } catch (const InvalidStateError&) {
    }
  };
  if (warm.size() == nlp.num_variables()) attempt(warm, true);
  if (!c.valid || !c.solution.report.converged) attempt(nlp.initial_guess(), false);
  return c;
}

void keep_better(Candidate& best, Candidate next) {
  if (!next.valid) return;
  if (!best.valid) {
    best = std::move(next);
    return;
  }
  const bool a = best.solution.report.converged;
  const bool b = next.solution.report.converged;
  if ((b && !a) || (a && b && next.solution.cot < best.solution.cot)) {
    best = std::move(next);
  }
}

std::string format_value(double v) {
  if (!std::isfinite(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

bool UtilityPoint::needs_inspection() const {
  return ok() && utility < 0.5 && max_abs_torque >= 1e-3;
}

UtilityPoint utility_at(const GaitTask& task, const ModelParams& params,
                        const CostParams& cost, const TranscriptionConfig& config,
                        const GaitSolveOptions& options, const WarmStart& warm) {
  UtilityPoint pt;
  pt.task = task;
  pt.params = params;
  pt.cost = cost;
  pt.cot_ankle = pt.cot_no_ankle = pt.utility = pt.max_abs_torque = kNaN;

  GaitTask with = task;
  with.ankle_enabled = true;
  GaitTask without = task;
  without.ankle_enabled = false;
  const GaitNlp nlp_a = build_nlp(with, params, cost, config);
  const GaitNlp nlp_b = build_nlp(without, params, cost, config);

  const Candidate base = solve_with_fallback(nlp_b, warm.no_ankle, options);
  if (base.valid) {
    pt.report_no_ankle = base.solution.report;
    pt.x_no_ankle = base.solution.x;
    if (base.solution.report.converged) pt.cot_no_ankle = base.solution.cot;
  }

  Candidate best;
  if (base.valid && base.solution.report.converged) {
    // The ASLIP optimum with zero torque is feasible for the ankle problem.
    const Eigen::VectorXd seed = nlp_a.layout().encode(base.solution.trajectory);
    keep_better(best, solve_with_fallback(nlp_a, seed, options));
  }
  if (warm.ankle.size() == nlp_a.num_variables() ||
      !(best.valid && best.solution.report.converged)) {
    keep_better(best, solve_with_fallback(nlp_a, warm.ankle, options));
  }
  if (best.valid) {
    pt.report_ankle = best.solution.report;
    pt.x_ankle = best.solution.x;
    if (best.solution.report.converged) {
      pt.cot_ankle = best.solution.cot;
      double tau = 0.0;
      for (const ControlInput& u : best.solution.trajectory.controls) {
        tau = std::max(tau, std::abs(u.ankle_torque));
      }
      pt.max_abs_torque = tau;
    }
  }
  if (pt.ok() && pt.cot_no_ankle > 0.0) {
    pt.utility = ankle_utility(pt.cot_no_ankle, pt.cot_ankle);
  }
  return pt;
}

std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 1) throw InvalidArgumentError("linspace needs at least one point");
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) {
    v[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / (n - 1);
  }
  if (n > 1) v.back() = hi;
  return v;
}

void SweepSpec::validate() const {
  if (axes.empty() || axes.size() != values.size()) {
    throw InvalidArgumentError("sweep needs one value list per axis");
  }
  if (axes.front() != Axis::kApexHeight) {
    throw InvalidArgumentError("the first sweep axis must be apex_height");
  }
  for (std::size_t a = 0; a < axes.size(); ++a) {
    if (values[a].empty()) {
      throw InvalidArgumentError("empty value list for " + to_string(axes[a]));
    }
    for (std::size_t i = 1; i < values[a].size(); ++i) {
      if (!(values[a][i] > values[a][i - 1])) {
        throw InvalidArgumentError("values for " + to_string(axes[a]) +
                                   " must be strictly increasing");
      }
    }
    for (std::size_t b = 0; b < a; ++b) {
      if (axes[a] == axes[b]) throw InvalidArgumentError("repeated sweep axis");
    }
  }
}

void apply_axis(Axis axis, double value, GaitTask& task, ModelParams& params,
                CostParams& cost) {
  switch (axis) {
    case Axis::kApexHeight: task.apex_height = value; break;
    case Axis::kAlpha: cost.alpha = value; break;
    case Axis::kApexVelocity: task.apex_velocity = value; break;
    case Axis::kDamping: params.damping = value; break;
  }
}

namespace {

// One warm-start chain along apex height with the other axes fixed.
std::vector<UtilityPoint> run_chain(const std::vector<double>& heights,
                                    const ExperimentContext& ctx,
                                    const std::vector<double>& fixed_coords,
                                    const std::vector<Axis>& fixed_axes, bool warm_start,
                                    const std::function<void(const UtilityPoint&)>& done) {
  GaitTask task = ctx.task;
  ModelParams params = ctx.params;
  CostParams cost = ctx.cost;
  for (std::size_t a = 0; a < fixed_axes.size(); ++a) {
    apply_axis(fixed_axes[a], fixed_coords[a], task, params, cost);
  }
  std::vector<UtilityPoint> out;
  WarmStart warm;
  for (double h : heights) {
    task.apex_height = h;
    UtilityPoint pt;
    try {
      pt = utility_at(task, params, cost, ctx.config, ctx.options,
                      warm_start ? warm : WarmStart{});
    } catch (const InfeasibleTaskError&) {
      pt.task = task;
      pt.params = params;
      pt.cost = cost;
      pt.cot_ankle = pt.cot_no_ankle = pt.utility = pt.max_abs_torque = kNaN;
      pt.report_ankle.termination_reason = "infeasible-task";
      pt.report_no_ankle.termination_reason = "infeasible-task";
    }
    pt.coords = {h};
    pt.coords.insert(pt.coords.end(), fixed_coords.begin(), fixed_coords.end());
    // Only converged neighbours seed the next point.
    if (pt.converged_ankle()) warm.ankle = pt.x_ankle;
    if (pt.converged_no_ankle()) warm.no_ankle = pt.x_no_ankle;
    if (done) done(pt);
    out.push_back(std::move(pt));
  }
  return out;
}

}  // namespace

std::vector<UtilityPoint> sweep_apex_height(const std::vector<double>& heights,
                                            const ExperimentContext& ctx,
                                            bool warm_start, const ProgressFn& progress) {
  SweepSpec spec{{Axis::kApexHeight}, {heights}, warm_start};
  spec.validate();
  int count = 0;
  const int total = static_cast<int>(heights.size());
  return run_chain(heights, ctx, {}, {}, warm_start, [&](const UtilityPoint& p) {
    ++count;
    if (progress) progress(p, count, total);
  });
}

std::vector<UtilityPoint> grid_2d(const SweepSpec& spec, const ExperimentContext& ctx,
                                  int jobs, const ProgressFn& progress) {
  spec.validate();
  if (spec.axes.size() != 2) throw InvalidArgumentError("grid_2d needs exactly two axes");
  if (jobs < 1) throw InvalidArgumentError("jobs must be at least 1");
  const std::vector<double>& heights = spec.values[0];
  const std::vector<double>& second = spec.values[1];
  const int rows = static_cast<int>(second.size());
  const int total = rows * static_cast<int>(heights.size());

  std::vector<std::vector<UtilityPoint>> results(rows);
  std::atomic<int> next{0};
  std::mutex progress_mutex;
  int count = 0;
  std::exception_ptr failure;

  const auto worker = [&] {
    for (int row = next++; row < rows; row = next++) {
      try {
        results[row] = run_chain(heights, ctx, {second[row]}, {spec.axes[1]},
                                 spec.warm_start, [&](const UtilityPoint& p) {
                                   std::lock_guard lock(progress_mutex);
                                   ++count;
                                   if (progress) progress(p, count, total);
                                 });
      } catch (...) {
        std::lock_guard lock(progress_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int threads = std::min(jobs, rows);
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  std::vector<UtilityPoint> out;
  out.reserve(total);
  for (auto& row : results) {
    for (auto& p : row) out.push_back(std::move(p));
  }
  return out;
}

std::string utility_csv(const std::vector<UtilityPoint>& points,
                        const std::vector<Axis>& axes, const std::string& config_ini) {
  std::ostringstream out;
  std::istringstream cfg(config_ini);
  for (std::string line; std::getline(cfg, line);) {
    out << "#" << (line.empty() ? "" : " ") << line << "\n";
  }
  for (Axis a : axes) out << to_string(a) << ",";
  out << "cot_ankle,cot_no_ankle,utility,converged_ankle,converged_no_ankle,"
         "max_abs_torque\n";
  for (const UtilityPoint& p : points) {
    if (p.coords.size() != axes.size()) {
      throw InvalidArgumentError("utility point does not match the CSV axes");
    }
    for (double c : p.coords) out << format_value(c) << ",";
    out << format_value(p.cot_ankle) << "," << format_value(p.cot_no_ankle) << ","
        << format_value(p.utility) << "," << (p.converged_ankle() ? 1 : 0) << ","
        << (p.converged_no_ankle() ? 1 : 0) << "," << format_value(p.max_abs_torque)
        << "\n";
  }
  return out.str();
}

}  // namespace aaslip
