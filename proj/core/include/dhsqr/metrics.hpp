#pragma once

#include <vector>

#include "dhsqr/types.hpp"

namespace dhsqr {

struct SupportMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  int tp = 0;
  int fp = 0;
  int fn = 0;
};

// Euclidean norm of the difference over all p+1 coordinates.
double l2_error(const CoefficientVector& beta_hat, const CoefficientVector& beta_true);

// Support over indices 1..p only; intercept excluded. Degenerate cases:
// empty estimate against nonempty truth scores 0/0/0, and both empty score
// 1/1/1 (nothing to find, nothing found).
SupportMetrics support_metrics(const CoefficientVector& beta_hat,
                               const std::vector<int>& true_support,
                               double zero_tol = 1e-8);

// (1/n) sum rho_tau(y_i - x_i' beta).
double check_loss_eval(const CoefficientVector& beta, const Matrix& X, const Vector& y,
                       double tau);

// Predicted quantile error: the SUM of check losses over the test set.
double pqe(const CoefficientVector& beta, const Matrix& X_test, const Vector& y_test,
           double tau);

}  // namespace dhsqr
