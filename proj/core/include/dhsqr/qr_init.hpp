#pragma once

#include "dhsqr/types.hpp"

namespace dhsqr {

// l1-penalized quantile regression on one shard, solved through a
// Gaussian-convolution smoothing of the check loss (the objective becomes
// differentiable, so proximal gradient applies).
struct SmoothedQRProblem {
  const DatasetShard* shard = nullptr;
  double tau = 0.5;
  double lambda0 = 0.0;
  double h0 = 0.1;  // smoothing bandwidth, > 0
  bool penalize_intercept = true;
  double curvature_hint = 0.0;  // lambda_max(X'X/n) if known; 0 recomputes

  void validate() const;
};

struct InitialFitReport {
  CoefficientVector beta;
  long iterations = 0;
  double grad_map_norm = 0.0;
  double objective = 0.0;
  bool converged = false;
};

// rho_tau(u) = u (tau - I(u<=0)).
double check_loss(double u, double tau);

// (rho_tau * K_h0)(u) for the Gaussian kernel:
//   l(u) = h0 phi(u/h0) + u (Phi(u/h0) - (1 - tau)).
double smoothed_check_loss(double u, double tau, double h0);

// l'(u) = Phi(u/h0) - (1 - tau).
double smoothed_check_loss_deriv(double u, double tau, double h0);

// Default smoothing bandwidth, max(0.05, ((s+1) log n / n)^{0.4}).
double default_h0(long n, int s_eff);

// Proximal gradient with FISTA momentum, backtracking line search from the
// Lipschitz estimate |X|_F^2/(n h0), restart on objective increase.
// Terminates when the proximal-gradient-mapping norm drops below tol.
// warm_start, when given, seeds the iteration (used along lambda0 grids).
InitialFitReport fit_initial(const SmoothedQRProblem& problem, double tol = 1e-6,
                             long max_iter = 2000,
                             const CoefficientVector* warm_start = nullptr);

// Largest lambda0 for which beta = 0 is a fixed point (intercept penalized).
double lambda0_max(const DatasetShard& shard, double tau, double h0);

// Pivotal penalty level for l1 quantile regression: scale times the
// (1 - alpha) quantile of max_j |(1/n) sum_i x_ij (tau - I(U_i <= tau))|
// over simulated uniform draws. Anything below it lets pure noise into the
// support, so validation-selected lambda0 grids are floored here.
double pivotal_lambda0(const DatasetShard& shard, double tau, std::uint64_t seed,
                       int rounds = 100, double quantile = 0.9, double scale = 1.1);

// Largest eigenvalue of X'X/n by power iteration (Lipschitz ingredient).
double design_curvature(const Matrix& X);

}  // namespace dhsqr
