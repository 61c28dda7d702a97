#include "dhsqr/qr_init.hpp"

#include <algorithm>
#include <cmath>

#include "dhsqr/qp_lasso.hpp"
#include "dhsqr/rng.hpp"

namespace dhsqr {

void SmoothedQRProblem::validate() const {
  if (shard == nullptr) throw ConfigError("SmoothedQRProblem: missing shard");
  if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("SmoothedQRProblem: tau outside (0,1)");
  if (!(h0 > 0.0)) throw ConfigError("SmoothedQRProblem: h0 must be positive");
  if (!(lambda0 >= 0.0)) throw ConfigError("SmoothedQRProblem: lambda0 must be nonnegative");
}

double check_loss(double u, double tau) {
  return u * (tau - (u <= 0.0 ? 1.0 : 0.0));
}

double smoothed_check_loss(double u, double tau, double h0) {
  const double t = u / h0;
  return h0 * normal_pdf(t) + u * (normal_cdf(t) - (1.0 - tau));
}

double smoothed_check_loss_deriv(double u, double tau, double h0) {
  return normal_cdf(u / h0) - (1.0 - tau);
}

double default_h0(long n, int s_eff) {
  const double raw =
      std::pow((s_eff + 1.0) * std::log(static_cast<double>(n)) / static_cast<double>(n), 0.4);
  return std::max(0.05, raw);
}

// Largest eigenvalue of X'X/n by power iteration; deterministic start.
double design_curvature(const Matrix& X) {
  const long n = X.rows();
  Vector v = Vector::Ones(X.cols()).normalized();
  double value = 1.0;
  for (int it = 0; it < 16; ++it) {
    Vector w = X.transpose() * (X * v) / static_cast<double>(n);
    value = w.norm();
    if (value <= 0.0) return 1.0;
    v = w / value;
  }
  return value;
}

namespace {

double smooth_objective(const SmoothedQRProblem& prob, const Vector& residuals) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < residuals.size(); ++i)
    acc += smoothed_check_loss(residuals[i], prob.tau, prob.h0);
  return acc / static_cast<double>(residuals.size());
}

double l1_penalty(const SmoothedQRProblem& prob, const CoefficientVector& beta) {
  double acc = 0.0;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    if (j == 0 && !prob.penalize_intercept) continue;
    acc += std::abs(beta[j]);
  }
  return prob.lambda0 * acc;
}

CoefficientVector prox_step(const SmoothedQRProblem& prob, const Vector& point,
                            const Vector& grad, double L) {
  CoefficientVector out(point.size());
  const double step = prob.lambda0 / L;
  for (Eigen::Index j = 0; j < point.size(); ++j) {
    const double raw = point[j] - grad[j] / L;
    out[j] = (j == 0 && !prob.penalize_intercept) ? raw : soft_threshold(raw, step);
  }
  return out;
}

}  // namespace

double lambda0_max(const DatasetShard& shard, double tau, double h0) {
  const long n = shard.rows();
  Vector deriv(n);
  for (long i = 0; i < n; ++i) deriv[i] = smoothed_check_loss_deriv(shard.y[i], tau, h0);
  const Vector grad = -(shard.X.transpose() * deriv) / static_cast<double>(n);
  return grad.cwiseAbs().maxCoeff();
}

double pivotal_lambda0(const DatasetShard& shard, double tau, std::uint64_t seed, int rounds,
                       double quantile, double scale) {
  const long n = shard.rows();
  Rng rng(seed, 0x70697674);  // dedicated stream for the pivotal simulation
  std::vector<double> maxima(static_cast<std::size_t>(rounds));
  Vector score(n);
  for (int r = 0; r < rounds; ++r) {
    for (long i = 0; i < n; ++i)
      score[i] = tau - (rng.next_uniform() <= tau ? 1.0 : 0.0);
    const Vector g = (shard.X.transpose() * score) / static_cast<double>(n);
    maxima[static_cast<std::size_t>(r)] = g.cwiseAbs().maxCoeff();
  }
  std::sort(maxima.begin(), maxima.end());
  const std::size_t idx = std::min<std::size_t>(
      maxima.size() - 1, static_cast<std::size_t>(quantile * maxima.size()));
  return scale * maxima[idx];
}

InitialFitReport fit_initial(const SmoothedQRProblem& problem, double tol, long max_iter,
                             const CoefficientVector* warm_start) {
  problem.validate();
  const DatasetShard& shard = *problem.shard;
  const long n = shard.rows();
  const Eigen::Index p1 = shard.dim();

  InitialFitReport rep;
  rep.beta = (warm_start != nullptr && warm_start->size() == p1)
                 ? *warm_start
                 : CoefficientVector::Zero(p1);
  CoefficientVector momentum = rep.beta;

  // Smooth-part Lipschitz bound: lambda_max(X'X/n) * max l'' with
  // max l'' = phi(0)/h0. Backtracking corrects any underestimate.
  const double curvature =
      problem.curvature_hint > 0.0 ? problem.curvature_hint : design_curvature(shard.X);
  double L = curvature * normal_pdf(0.0) / problem.h0;
  if (!(L > 0.0)) L = 1.0;
  double t_mom = 1.0;

  Vector residuals = shard.y - shard.X * rep.beta;
  double obj = smooth_objective(problem, residuals) + l1_penalty(problem, rep.beta);

  for (long it = 0; it < max_iter; ++it) {
    const Vector r_v = shard.y - shard.X * momentum;
    Vector deriv(n);
    for (long i = 0; i < n; ++i)
      deriv[i] = smoothed_check_loss_deriv(r_v[i], problem.tau, problem.h0);
    const Vector grad = -(shard.X.transpose() * deriv) / static_cast<double>(n);
    const double f_v = smooth_objective(problem, r_v);

    CoefficientVector next;
    double f_next = 0.0;
    for (;;) {
      next = prox_step(problem, momentum, grad, L);
      const Vector r_next = shard.y - shard.X * next;
      f_next = smooth_objective(problem, r_next);
      const Vector d = next - momentum;
      const double quad = f_v + grad.dot(d) + 0.5 * L * d.squaredNorm();
      if (f_next <= quad + 1e-12 * (1.0 + std::abs(quad))) break;
      L *= 2.0;
      if (!(L < 1e18)) throw NumericalFailure("fit_initial: backtracking diverged");
    }

    rep.grad_map_norm = L * (momentum - next).norm();
    rep.iterations = it + 1;

    const double obj_next = f_next + l1_penalty(problem, next);
    if (obj_next > obj + 1e-12 * (1.0 + std::abs(obj))) {
      // Momentum overshot; restart from the last accepted iterate.
      t_mom = 1.0;
      momentum = rep.beta;
      continue;
    }

    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_mom * t_mom));
    momentum = next + ((t_mom - 1.0) / t_next) * (next - rep.beta);
    t_mom = t_next;
    rep.beta = next;
    obj = obj_next;

    if (rep.grad_map_norm <= tol) {
      rep.converged = true;
      break;
    }
    L *= 0.95;  // adapt back down; backtracking restores safety
  }

  rep.objective = obj;
  return rep;
}

}  // namespace dhsqr
