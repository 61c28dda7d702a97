#include "dhsqr/qp_lasso.hpp"

#include <cassert>
#include <cmath>

namespace dhsqr {

void PenalizedQuadratic::validate() const {
  if (A.rows() != A.cols() || A.rows() != a.size())
    throw ConfigError("PenalizedQuadratic: dimension mismatch");
  if (!(lambda >= 0.0)) throw ConfigError("PenalizedQuadratic: lambda must be nonnegative");
  const double asym = (A - A.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10) throw ConfigError("PenalizedQuadratic: A not symmetric");
}

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

namespace {
inline double penalty_at(const PenalizedQuadratic& q, Eigen::Index j) {
  return (j == 0 && !q.penalize_intercept) ? 0.0 : q.lambda;
}
}  // namespace

double objective_value(const PenalizedQuadratic& q, const CoefficientVector& beta) {
  double l1 = 0.0;
  for (Eigen::Index j = 0; j < beta.size(); ++j) l1 += penalty_at(q, j) * std::abs(beta[j]);
  return 0.5 * beta.dot(q.A * beta) - beta.dot(q.a) + l1;
}

double kkt_residual(const PenalizedQuadratic& q, const CoefficientVector& beta) {
  if (beta.size() != q.a.size()) throw ConfigError("kkt_residual: dimension mismatch");
  const Vector grad = q.A * beta - q.a;
  double worst = 0.0;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    const double lam = penalty_at(q, j);
    double r;
    if (beta[j] != 0.0)
      r = std::abs(grad[j] + (beta[j] > 0.0 ? lam : -lam));
    else
      r = std::max(0.0, std::abs(grad[j]) - lam);
    worst = std::max(worst, r);
  }
  return worst;
}

SolverReport solve(const PenalizedQuadratic& q, const CoefficientVector& beta_init,
                   const SolverOptions& opts) {
  q.validate();
  if (!(opts.tol > 0.0)) throw ConfigError("solve: tol must be positive");
  const Eigen::Index p1 = q.a.size();
  if (beta_init.size() != p1) throw ConfigError("solve: beta_init dimension mismatch");

  SolverReport rep;
  rep.beta = beta_init;
  Vector grad = q.A * rep.beta - q.a;

  // Coordinates with no curvature carry no information; pin them at zero.
  std::vector<bool> frozen(static_cast<std::size_t>(p1), false);
  for (Eigen::Index j = 0; j < p1; ++j) {
    if (q.A(j, j) < opts.diag_floor) {
      frozen[static_cast<std::size_t>(j)] = true;
      rep.frozen.push_back(static_cast<int>(j));
      if (rep.beta[j] != 0.0) {
        grad.noalias() -= rep.beta[j] * q.A.col(j);
        rep.beta[j] = 0.0;
      }
    }
  }

  const double kkt_tol = opts.tol * (1.0 + q.a.cwiseAbs().maxCoeff());
#ifndef NDEBUG
  double prev_obj = objective_value(q, rep.beta);
#endif

  for (long sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < p1; ++j) {
      if (frozen[static_cast<std::size_t>(j)]) continue;
      const double old = rep.beta[j];
      // c = a_j - sum_{k != j} A_jk beta_k, via the maintained grad = A beta - a.
      const double c = q.A(j, j) * old - grad[j];
      const double next = soft_threshold(c, penalty_at(q, j)) / q.A(j, j);
      if (next != old) {
        grad.noalias() += (next - old) * q.A.col(j);
        rep.beta[j] = next;
        max_change = std::max(max_change, std::abs(next - old));
      }
    }
    rep.iterations = sweep + 1;

    if (!rep.beta.allFinite() || !grad.allFinite())
      throw NumericalFailure("solve: non-finite arithmetic in coordinate descent");

#ifndef NDEBUG
    const double obj = objective_value(q, rep.beta);
    assert(obj <= prev_obj + 1e-10 * (1.0 + std::abs(prev_obj)));
    prev_obj = obj;
#endif

    if (max_change <= opts.tol) {
      // Refresh the gradient before certifying; the incremental one drifts.
      rep.kkt_residual = kkt_residual(q, rep.beta);
      if (rep.kkt_residual <= kkt_tol) {
        rep.converged = true;
        return rep;
      }
      grad = q.A * rep.beta - q.a;
    }
  }

  rep.kkt_residual = kkt_residual(q, rep.beta);
  rep.converged = rep.kkt_residual <= kkt_tol;
  return rep;
}

}  // namespace dhsqr
