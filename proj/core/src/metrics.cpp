#include "dhsqr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "dhsqr/qr_init.hpp"

namespace dhsqr {

double l2_error(const CoefficientVector& beta_hat, const CoefficientVector& beta_true) {
  if (beta_hat.size() != beta_true.size()) throw ConfigError("l2_error: length mismatch");
  return (beta_hat - beta_true).norm();
}

SupportMetrics support_metrics(const CoefficientVector& beta_hat,
                               const std::vector<int>& true_support, double zero_tol) {
  const std::set<int> truth(true_support.begin(), true_support.end());
  if (!truth.empty() && (*truth.begin() < 1 || *truth.rbegin() >= beta_hat.size()))
    throw ConfigError("support_metrics: true support outside 1..p");

  SupportMetrics out;
  int estimated = 0;
  for (Eigen::Index j = 1; j < beta_hat.size(); ++j) {
    const bool in_est = std::abs(beta_hat[j]) > zero_tol;
    const bool in_true = truth.count(static_cast<int>(j)) > 0;
    if (in_est) ++estimated;
    if (in_est && in_true) ++out.tp;
    else if (in_est && !in_true) ++out.fp;
    else if (!in_est && in_true) ++out.fn;
  }

  if (estimated == 0)
    out.precision = truth.empty() ? 1.0 : 0.0;
  else
    out.precision = static_cast<double>(out.tp) / (out.tp + out.fp);

  if (truth.empty())
    out.recall = 1.0;
  else
    out.recall = static_cast<double>(out.tp) / (out.tp + out.fn);

  if (out.precision > 0.0 && out.recall > 0.0)
    out.f1 = 2.0 / (1.0 / out.recall + 1.0 / out.precision);
  else
    out.f1 = 0.0;
  return out;
}

double check_loss_eval(const CoefficientVector& beta, const Matrix& X, const Vector& y,
                       double tau) {
  if (X.cols() != beta.size() || X.rows() != y.size())
    throw ConfigError("check_loss_eval: dimension mismatch");
  const Vector residuals = y - X * beta;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < residuals.size(); ++i) acc += check_loss(residuals[i], tau);
  return acc / static_cast<double>(residuals.size());
}

double pqe(const CoefficientVector& beta, const Matrix& X_test, const Vector& y_test,
           double tau) {
  if (X_test.cols() != beta.size() || X_test.rows() != y_test.size())
    throw ConfigError("pqe: dimension mismatch");
  const Vector residuals = y_test - X_test * beta;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < residuals.size(); ++i) acc += check_loss(residuals[i], tau);
  return acc;
}

}  // namespace dhsqr
