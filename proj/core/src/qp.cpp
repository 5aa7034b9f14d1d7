#include "aaslip/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/SparseCholesky>

#include "aaslip/error.hpp"

namespace aaslip {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

double inf_norm(const Vec& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; }

// Reduced Newton system
//
//   [ H + G'DG   A' ] [ dz ]   [ r1 ]
//   [ A          0  ] [ v  ] = [ r2 ],    v = -dy,
//
// regularized into a quasi-definite matrix for the factorization and
// corrected back toward the exact system by iterative refinement.
class KktSystem {
 public:
  KktSystem(const QpProblem& qp, const QpOptions& options)
      : qp_(qp), options_(options), n_(qp.hessian.rows()),
        me_(qp.eq_matrix.rows()) {}

  QpStatus factor(const Vec& d) {
    const Vec sqrt_d = d.cwiseSqrt();
    const SpMat scaled = sqrt_d.asDiagonal() * qp_.ineq_matrix;
    reduced_ = qp_.hessian + SpMat(scaled.transpose()) * scaled;

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(reduced_.nonZeros() + qp_.eq_matrix.nonZeros() + n_ + me_);
    for (int col = 0; col < reduced_.outerSize(); ++col) {
      for (SpMat::InnerIterator it(reduced_, col); it; ++it) {
        if (it.row() >= col) triplets.emplace_back(it.row(), col, it.value());
      }
    }
    for (int i = 0; i < n_; ++i) {
      triplets.emplace_back(i, i, options_.primal_regularization);
    }
    for (int col = 0; col < qp_.eq_matrix.outerSize(); ++col) {
      for (SpMat::InnerIterator it(qp_.eq_matrix, col); it; ++it) {
        triplets.emplace_back(n_ + it.row(), col, it.value());
      }
    }
    for (int i = 0; i < me_; ++i) {
      triplets.emplace_back(n_ + i, n_ + i, -options_.dual_regularization);
    }
    SpMat kkt(n_ + me_, n_ + me_);
    kkt.setFromTriplets(triplets.begin(), triplets.end());
    if (!analyzed_ || kkt.nonZeros() != pattern_nnz_) {
      ldlt_.analyzePattern(kkt);
      analyzed_ = true;
      pattern_nnz_ = kkt.nonZeros();
    }
    ldlt_.factorize(kkt);
    if (ldlt_.info() != Eigen::Success) return QpStatus::kNumericalFailure;
    if (options_.check_inertia &&
        (ldlt_.vectorD().array() < 0.0).count() != me_) {
      return QpStatus::kNonconvex;
    }
    return QpStatus::kSolved;
  }

  void solve(const Vec& r1, const Vec& r2, Vec& dz, Vec& v) const {
    Vec rhs(n_ + me_);
    rhs << r1, r2;
    Vec sol = ldlt_.solve(rhs);
    for (int k = 0; k < options_.refinement_steps; ++k) {
      const Vec residual = rhs - apply_exact(sol);
      if (!residual.allFinite()) break;
      sol += ldlt_.solve(residual);
    }
    dz = sol.head(n_);
    v = sol.tail(me_);
  }

 private:
  Vec apply_exact(const Vec& sol) const {
    Vec out(n_ + me_);
    const auto dz = sol.head(n_);
    const auto v = sol.tail(me_);
    out.head(n_) = reduced_ * dz;
    if (me_ > 0) {
      out.head(n_) += qp_.eq_matrix.transpose() * v;
      out.tail(me_) = qp_.eq_matrix * dz;
    }
    return out;
  }

  const QpProblem& qp_;
  const QpOptions& options_;
  const int n_;
  const int me_;
  SpMat reduced_;
  Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
  bool analyzed_ = false;
  Eigen::Index pattern_nnz_ = 0;
};

// Largest alpha in (0, 1] keeping v + alpha * dv >= 0.
double max_step(const Vec& v, const Vec& dv) {
  double alpha = 1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (dv[i] < 0.0) alpha = std::min(alpha, -v[i] / dv[i]);
  }
  return alpha;
}

}  // namespace

std::string to_string(QpStatus status) {
  switch (status) {
    case QpStatus::kSolved: return "solved";
    case QpStatus::kMaxIterations: return "max-iterations";
    case QpStatus::kNumericalFailure: return "numerical-failure";
    case QpStatus::kNonconvex: return "nonconvex";
  }
  return "unknown";
}

QpSolution solve_qp(const QpProblem& qp, const QpOptions& options) {
  const Eigen::Index n = qp.hessian.rows();
  const Eigen::Index me = qp.eq_matrix.rows();
  const Eigen::Index mi = qp.ineq_matrix.rows();
  if (qp.hessian.cols() != n || qp.linear.size() != n ||
      qp.eq_matrix.cols() != n || qp.eq_rhs.size() != me ||
      qp.ineq_matrix.cols() != n || qp.ineq_rhs.size() != mi) {
    throw InvalidArgumentError("QP dimensions are inconsistent");
  }

  const SpMat& H = qp.hessian;
  const SpMat& A = qp.eq_matrix;
  const SpMat& G = qp.ineq_matrix;
  const Vec& b = qp.eq_rhs;
  const Vec& h = qp.ineq_rhs;

  QpSolution out;
  Vec z = Vec::Zero(n);
  Vec y = Vec::Zero(me);
  Vec s = (G * z - h).cwiseMax(1.0);
  // Duals sized to the linear term; elastic penalties dominate it.
  Vec w = Vec::Constant(mi, std::max(1.0, inf_norm(qp.linear)));

  const double scale_q = 1.0 + inf_norm(qp.linear);
  const double scale_b = 1.0 + inf_norm(b);
  const double scale_h = 1.0 + inf_norm(h);

  KktSystem kkt(qp, options);
  Vec rd, rp, rg, dz, v, dy, ds, dw;

  const auto direction = [&](const Vec& r_sw, const Vec& d) {
    const Vec r1 = -rd - G.transpose() * (r_sw.cwiseQuotient(s) + d.cwiseProduct(rg));
    const Vec r2 = -rp;
    kkt.solve(r1, r2, dz, v);
    dy = -v;
    ds = G * dz + rg;
    dw = -(r_sw + w.cwiseProduct(ds)).cwiseQuotient(s);
  };

  out.status = QpStatus::kMaxIterations;
  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    rd = H * z + qp.linear;
    if (me > 0) rd -= A.transpose() * y;
    if (mi > 0) rd -= G.transpose() * w;
    rp = A * z - b;
    rg = G * z - s - h;
    const double mu = mi > 0 ? s.dot(w) / static_cast<double>(mi) : 0.0;

    if (!rd.allFinite() || !rp.allFinite() || !rg.allFinite() ||
        !std::isfinite(mu)) {
      out.status = QpStatus::kNumericalFailure;
      break;
    }
    if (inf_norm(rd) <= options.tolerance * scale_q &&
        inf_norm(rp) <= options.tolerance * scale_b &&
        inf_norm(rg) <= options.tolerance * scale_h &&
        mu <= options.tolerance) {
      out.status = QpStatus::kSolved;
      break;
    }

    const Vec d = w.cwiseQuotient(s);
    if (const QpStatus st = kkt.factor(d); st != QpStatus::kSolved) {
      out.status = st;
      break;
    }

    // Predictor (affine scaling).
    direction(s.cwiseProduct(w), d);
    const double alpha_aff = std::min(max_step(s, ds), max_step(w, dw));
    double sigma = 0.0;
    if (mi > 0) {
      const double mu_aff =
          (s + alpha_aff * ds).dot(w + alpha_aff * dw) / static_cast<double>(mi);
      sigma = std::pow(std::max(mu_aff, 0.0) / mu, 3);
    }

    // Corrector with centering.
    const Vec r_sw = s.cwiseProduct(w) + ds.cwiseProduct(dw) -
                     Vec::Constant(mi, sigma * mu);
    direction(r_sw, d);
    if (!dz.allFinite() || !dw.allFinite()) {
      out.status = QpStatus::kNumericalFailure;
      break;
    }
    const double boundary = std::max(0.99, 1.0 - mu);
    const double alpha =
        std::min(1.0, boundary * std::min(max_step(s, ds), max_step(w, dw)));

    z += alpha * dz;
    y += alpha * dy;
    s += alpha * ds;
    w += alpha * dw;
    s = s.cwiseMax(std::numeric_limits<double>::min());
    w = w.cwiseMax(std::numeric_limits<double>::min());
  }

  out.iterations = iter;
  out.z = std::move(z);
  out.eq_multipliers = std::move(y);
  out.ineq_multipliers = std::move(w);
  out.slack = std::move(s);
  out.objective = 0.5 * out.z.dot(H * out.z) + qp.linear.dot(out.z);
  return out;
}

}  // namespace aaslip
