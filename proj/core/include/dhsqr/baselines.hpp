#pragma once

#include <vector>

#include "dhsqr/dist_engine.hpp"
#include "dhsqr/types.hpp"

namespace dhsqr {

enum class BaselineMethod { AvgDC, PooledDHSQR };

struct BaselineResult {
  BaselineMethod method = BaselineMethod::AvgDC;
  CoefficientVector beta;
  std::vector<CoefficientVector> per_machine_betas;  // AvgDC diagnostics
  std::vector<int> failed_machines;                  // local fits that did not converge
  long comm_values = 0;
  RunResult engine;  // populated for PooledDHSQR
};

struct AvgDcOptions {
  double tau = 0.5;
  double lambda0 = -1.0;       // < 0: per-machine grid on an internal split
  double val_fraction = 0.10;  // internal 90/10 split of each shard
  double h0 = 0.0;             // <= 0: default_h0(local n, s_eff)
  int s_eff = 1;
  int init_grid_size = 12;
  double init_grid_decades = 3.0;
  double init_tol = 1e-5;
  long init_max_iter = 1200;
  bool penalize_intercept = true;
  int threads = 1;
};

// One-shot divide and conquer: every machine fits its own l1-penalized
// smoothed quantile regression (tuning on a held split of its own rows, no
// cross-machine traffic), the center averages the coefficient vectors.
BaselineResult avg_dc(const std::vector<DatasetShard>& shards, const AvgDcOptions& opts);

// The single-machine estimator: delegates to run_dhsqr with one shard and
// b = h, which is the engine's pooled-equivalence invariant.
BaselineResult pooled_dhsqr(const Matrix& X, const Vector& y, const ValidationSet& validation,
                            EngineOptions opts);

}  // namespace dhsqr
