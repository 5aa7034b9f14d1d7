#include <random>
#include <vector>

#include <benchmark/benchmark.h>
#include <Eigen/SparseCore>

#include "aaslip/qp.hpp"
#include "aaslip/solver.hpp"
#include "aaslip/transcription.hpp"
#include "aaslip/verify.hpp"

namespace {

using namespace aaslip;

const GaitNlp& nominal_nlp() {
  static const GaitNlp nlp =
      build_nlp(GaitTask{}, ModelParams{}, CostParams{}, TranscriptionConfig{});
  return nlp;
}

void BM_Constraints(benchmark::State& state) {
  const GaitNlp& nlp = nominal_nlp();
  Eigen::VectorXd c(nlp.num_constraints());
  for (auto _ : state) {
    nlp.constraints(nlp.initial_guess(), c);
    benchmark::DoNotOptimize(c.data());
  }
}
BENCHMARK(BM_Constraints);

void BM_Jacobian(benchmark::State& state) {
  const GaitNlp& nlp = nominal_nlp();
  std::vector<double> v(nlp.jacobian_pattern().size());
  for (auto _ : state) {
    nlp.jacobian_values(nlp.initial_guess(), v);
    benchmark::DoNotOptimize(v.data());
  }
  state.counters["nnz"] = static_cast<double>(v.size());
}
BENCHMARK(BM_Jacobian);

void BM_Hessian(benchmark::State& state) {
  const GaitNlp& nlp = nominal_nlp();
  const Eigen::VectorXd lambda = Eigen::VectorXd::Ones(nlp.num_constraints());
  std::vector<double> v(nlp.hessian_pattern().size());
  for (auto _ : state) {
    nlp.hessian_values(nlp.initial_guess(), 1.0, lambda, v);
    benchmark::DoNotOptimize(v.data());
  }
  state.counters["nnz"] = static_cast<double>(v.size());
}
BENCHMARK(BM_Hessian);

// Random strictly convex QP with a banded Hessian, n/4 equalities and
// n/2 inequalities.
QpProblem random_qp(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  using Trip = Eigen::Triplet<double>;
  std::vector<Trip> h, a, g;
  for (int i = 0; i < n; ++i) {
    h.emplace_back(i, i, 4.0);
    if (i + 1 < n) {
      h.emplace_back(i, i + 1, 0.5);
      h.emplace_back(i + 1, i, 0.5);
    }
  }
  const int me = n / 4, mi = n / 2;
  for (int r = 0; r < me; ++r) {
    for (int k = 0; k < 4; ++k) a.emplace_back(r, (4 * r + k) % n, u(rng));
  }
  for (int r = 0; r < mi; ++r) {
    for (int k = 0; k < 3; ++k) g.emplace_back(r, (7 * r + 3 * k) % n, u(rng));
  }
  QpProblem qp;
  qp.hessian.resize(n, n);
  qp.hessian.setFromTriplets(h.begin(), h.end());
  qp.eq_matrix.resize(me, n);
  qp.eq_matrix.setFromTriplets(a.begin(), a.end());
  qp.ineq_matrix.resize(mi, n);
  qp.ineq_matrix.setFromTriplets(g.begin(), g.end());
  qp.linear = Eigen::VectorXd::NullaryExpr(n, [&] { return u(rng); });
  qp.eq_rhs = Eigen::VectorXd::Zero(me);
  qp.ineq_rhs = -Eigen::VectorXd::Ones(mi);
  return qp;
}

void BM_SolveQp(benchmark::State& state) {
  const QpProblem qp = random_qp(static_cast<int>(state.range(0)), 3);
  for (auto _ : state) {
    QpSolution s = solve_qp(qp);
    benchmark::DoNotOptimize(s.z.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SolveQp)->RangeMultiplier(2)->Range(64, 1024)->Complexity();

void BM_Reintegrate(benchmark::State& state) {
  const GaitNlp& nlp = nominal_nlp();
  const Trajectory t = nlp.layout().decode(nlp.initial_guess());
  for (auto _ : state) {
    DenseTrajectory d = integrate_stance(t, nlp.params(), static_cast<int>(state.range(0)));
    benchmark::DoNotOptimize(d.states.data());
  }
}
BENCHMARK(BM_Reintegrate)->Arg(25)->Arg(100)->Arg(400);

void BM_NominalSolve(benchmark::State& state) {
  for (auto _ : state) {
    GaitSolution s = solve_gait(GaitTask{}, ModelParams{}, CostParams{}, TranscriptionConfig{});
    benchmark::DoNotOptimize(s.x.data());
  }
}
BENCHMARK(BM_NominalSolve)->Unit(benchmark::kSecond)->Iterations(1);

}  // namespace

BENCHMARK_MAIN();
