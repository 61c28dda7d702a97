#pragma once

#include <vector>

#include "dhsqr/types.hpp"

namespace dhsqr {

// min_beta  1/2 beta' A beta - beta' a + lambda |beta|_1,
// A symmetric positive semidefinite. The intercept (index 0) is penalized
// by default, matching the central optimization as written; support metrics
// never count it either way.
struct PenalizedQuadratic {
  Matrix A;
  Vector a;
  double lambda = 0.0;
  bool penalize_intercept = true;

  void validate() const;
};

struct SolverReport {
  CoefficientVector beta;
  long iterations = 0;  // completed sweeps
  double kkt_residual = 0.0;
  bool converged = false;
  std::vector<int> frozen;  // coordinates pinned at 0 for lack of curvature
};

struct SolverOptions {
  double tol = 1e-7;          // max coordinate change per sweep
  long max_sweeps = 10000;
  double diag_floor = 1e-12;  // below this A_jj the coordinate is frozen
};

double soft_threshold(double z, double t);

double objective_value(const PenalizedQuadratic& q, const CoefficientVector& beta);

// Stationarity violation: per coordinate |grad_j + lambda_j sign(beta_j)|
// where beta_j != 0, and max(0, |grad_j| - lambda_j) where beta_j = 0;
// returns the max. Zero iff beta is exactly optimal.
double kkt_residual(const PenalizedQuadratic& q, const CoefficientVector& beta);

// Cyclic coordinate descent, ascending index order, warm-startable.
SolverReport solve(const PenalizedQuadratic& q, const CoefficientVector& beta_init,
                   const SolverOptions& opts = {});

}  // namespace dhsqr
