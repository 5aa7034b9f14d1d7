#pragma once

// Gait-level solve on top of the SQP: smoothing continuation, warm starts,
// perturbed retries and the derivative check harness.
//
// The objective's max(0, .) smoothing is nearly a kink at the nominal
// epsilon, and Newton steps crawl along it from a cold start. A cold solve
// therefore walks a short ladder of larger epsilons first, each stage warm
// starting the next, and finishes on the requested objective.

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "aaslip/sqp.hpp"
#include "aaslip/trajectory.hpp"
#include "aaslip/transcription.hpp"

namespace aaslip {

struct GaitSolveOptions {
  SolverOptions solver;
  // Smoothing values visited before the target; values at or below the
  // target are skipped.
  std::vector<double> continuation{1e-2, 1e-3, 1e-4, 1e-5};
  int stage_iterations = 60;
  double stage_optimality = 1e-4;
  // Iteration cap of the direct attempt made from a warm start before
  // falling back to the continuation ladder.
  int warm_iterations = 300;

  void validate() const;
};

struct GaitSolution {
  Eigen::VectorXd x;
  Trajectory trajectory;
  SolveReport report;  // objective_value is the cost of transport
  double energy = 0.0;
  double distance = 0.0;
  double cot = 0.0;
};

/// Solves `nlp` from `guess`. A cold start runs the continuation ladder; a
/// warm start first tries a direct solve. Failed attempts are retried from
/// uniformly perturbed guesses (solver.multistart times, magnitude
/// solver.perturbation, seeded by solver.seed). Returns the first converged
/// attempt or the least infeasible one. Throws InvalidArgumentError on a
/// dimension mismatch and EvaluationError when every attempt hits a
/// non-finite evaluation.
GaitSolution solve(const GaitNlp& nlp, const Eigen::VectorXd& guess,
                   const GaitSolveOptions& options = {}, bool warm = false);

/// Convenience: builds the NLP and solves from its own initial guess.
GaitSolution solve_gait(const GaitTask& task, const ModelParams& params,
                        const CostParams& cost, const TranscriptionConfig& config,
                        const GaitSolveOptions& options = {});

/// A point strictly inside the variable box: `center` plus uniform noise of
/// half-width `spread`, pulled back inside by `margin`. Fixed variables keep
/// their value.
Eigen::VectorXd random_interior_point(const NlpProblem& nlp,
                                      const Eigen::VectorXd& center, double spread,
                                      std::mt19937_64& rng, double margin = 1e-4);

struct GradientSurvey {
  double worst_error = 0.0;
  GradientCheck worst;
  std::vector<double> per_point;
};

/// check_gradients at `points` random interior points around `center`.
GradientSurvey survey_gradients(const NlpProblem& nlp, const Eigen::VectorXd& center,
                                int points, std::uint64_t seed, double spread = 0.05);

}  // namespace aaslip
