#include "aaslip/solver.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <optional>

#include "aaslip/error.hpp"
#include "aaslip/objective.hpp"

namespace aaslip {

namespace {

using Vec = Eigen::VectorXd;

struct Attempt {
  NlpResult result;
  int iterations = 0;
  double wall_time = 0.0;
};

void accumulate(Attempt& a, const NlpResult& r) {
  a.iterations += r.report.iterations;
  a.wall_time += r.report.wall_time;
}

// Intermediate stages only need to land near the next basin; their own
// convergence status is irrelevant as long as the iterate stays finite.
Attempt run_ladder(const GaitNlp& nlp, const Vec& start,
                   const GaitSolveOptions& options) {
  Attempt a;
  Vec x = start;
  const double target = nlp.cost().smoothing;
  for (double eps : options.continuation) {
    if (!(eps > target)) continue;
    CostParams cost = nlp.cost();
    cost.smoothing = eps;
    const GaitNlp stage = build_nlp(nlp.task(), nlp.params(), cost, nlp.config());
    SolverOptions o = options.solver;
    o.max_iterations = std::min(o.max_iterations, options.stage_iterations);
    o.optimality_tolerance = std::max(o.optimality_tolerance, options.stage_optimality);
    const NlpResult r = solve_nlp(stage, x, o);
    accumulate(a, r);
    if (r.x.allFinite()) x = r.x;
  }
  a.result = solve_nlp(nlp, x, options.solver);
  accumulate(a, a.result);
  return a;
}

bool better(const NlpResult& a, const NlpResult& b) {
  if (a.report.converged != b.report.converged) return a.report.converged;
  if (a.report.converged) return false;  // keep the earlier converged run
  return a.report.constraint_violation < b.report.constraint_violation;
}

}  // namespace

void GaitSolveOptions::validate() const {
  if (!(solver.tolerance > 0.0)) {
    throw InvalidArgumentError("solver tolerance must be positive");
  }
  if (solver.max_iterations < 1 || stage_iterations < 1 || warm_iterations < 0) {
    throw InvalidArgumentError("iteration caps must be positive");
  }
  if (solver.multistart < 0 || !(solver.perturbation >= 0.0)) {
    throw InvalidArgumentError("multistart count and perturbation must be nonnegative");
  }
  for (double eps : continuation) {
    if (!(eps > 0.0)) throw InvalidArgumentError("continuation smoothing must be positive");
  }
}

GaitSolution solve(const GaitNlp& nlp, const Vec& guess,
                   const GaitSolveOptions& options, bool warm) {
  options.validate();
  if (guess.size() != nlp.num_variables()) {
    throw InvalidArgumentError("initial guess has " + std::to_string(guess.size()) +
                               " entries, problem has " +
                               std::to_string(nlp.num_variables()) + " variables");
  }

  std::mt19937_64 rng(options.solver.seed);
  std::uniform_real_distribution<double> noise(-options.solver.perturbation,
                                               options.solver.perturbation);
  std::optional<NlpResult> best;
  std::exception_ptr first_error;
  int iterations = 0;
  double wall_time = 0.0;
  int attempts = 0;

  const auto consider = [&](NlpResult r) {
    if (!best || better(r, *best)) best = std::move(r);
  };

  for (int k = 0; k <= options.solver.multistart; ++k) {
    Vec start = guess;
    if (k > 0) {
      for (Eigen::Index j = 0; j < start.size(); ++j) start[j] += noise(rng);
    }
    ++attempts;
    try {
      if (k == 0 && warm && options.warm_iterations > 0) {
        SolverOptions o = options.solver;
        o.max_iterations = std::min(o.max_iterations, options.warm_iterations);
        NlpResult direct = solve_nlp(nlp, start, o);
        iterations += direct.report.iterations;
        wall_time += direct.report.wall_time;
        if (direct.report.converged) {
          consider(std::move(direct));
          break;
        }
        consider(std::move(direct));
      }
      Attempt a = run_ladder(nlp, start, options);
      iterations += a.iterations;
      wall_time += a.wall_time;
      const bool done = a.result.report.converged;
      consider(std::move(a.result));
      if (done) break;
    } catch (const EvaluationError&) {
      if (!first_error) first_error = std::current_exception();
    } catch (const InvalidStateError&) {
      if (!first_error) first_error = std::current_exception();
    }
  }
  if (!best) std::rethrow_exception(first_error);

  GaitSolution out;
  out.x = best->x;
  out.trajectory = nlp.layout().decode(out.x);
  out.report = best->report;
  out.report.iterations = iterations;
  out.report.wall_time = wall_time;
  out.report.attempts = attempts;
  out.energy = nlp.energy(out.x);
  out.distance = nlp.distance(out.x);
  out.cot = out.report.objective_value;
  return out;
}

GaitSolution solve_gait(const GaitTask& task, const ModelParams& params,
                        const CostParams& cost, const TranscriptionConfig& config,
                        const GaitSolveOptions& options) {
  const GaitNlp nlp = build_nlp(task, params, cost, config);
  return solve(nlp, nlp.initial_guess(), options, false);
}

Vec random_interior_point(const NlpProblem& nlp, const Vec& center, double spread,
                          std::mt19937_64& rng, double margin) {
  if (center.size() != nlp.num_variables()) {
    throw InvalidArgumentError("center has the wrong dimension");
  }
  std::uniform_real_distribution<double> noise(-spread, spread);
  const Vec& lo = nlp.variable_lower();
  const Vec& hi = nlp.variable_upper();
  Vec x = center;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double v = center[j] + noise(rng);  // drawn even when fixed, keeps the stream aligned
    if (lo[j] == hi[j]) continue;
    const double pad = std::min(margin, 0.25 * (hi[j] - lo[j]));
    x[j] = std::clamp(v, lo[j] + pad, hi[j] - pad);
  }
  return x;
}

GradientSurvey survey_gradients(const NlpProblem& nlp, const Vec& center, int points,
                                std::uint64_t seed, double spread) {
  if (points < 1) throw InvalidArgumentError("need at least one gradient-check point");
  std::mt19937_64 rng(seed);
  GradientSurvey s;
  for (int i = 0; i < points; ++i) {
    const Vec x = random_interior_point(nlp, center, spread, rng);
    const GradientCheck g = check_gradients(nlp, x);
    s.per_point.push_back(g.max_relative_error);
    if (i == 0 || g.max_relative_error > s.worst_error) {
      s.worst_error = g.max_relative_error;
      s.worst = g;
    }
  }
  return s;
}

}  // namespace aaslip
