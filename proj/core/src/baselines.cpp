#include "dhsqr/baselines.hpp"

#include <cmath>

#include "dhsqr/metrics.hpp"
#include "dhsqr/parallel.hpp"
#include "dhsqr/qr_init.hpp"

namespace dhsqr {

namespace {

struct LocalFit {
  CoefficientVector beta;
  bool converged = false;
};

LocalFit fit_one_machine(const DatasetShard& shard, const AvgDcOptions& opts) {
  const long n = shard.rows();
  long n_val = static_cast<long>(std::llround(opts.val_fraction * static_cast<double>(n)));
  n_val = std::max(1L, std::min(n_val, n - 1));
  const long n_train = n - n_val;

  DatasetShard train;
  train.shard_id = shard.shard_id;
  train.X = shard.X.topRows(n_train);
  train.y = shard.y.head(n_train);
  const Matrix X_val = shard.X.bottomRows(n_val);
  const Vector y_val = shard.y.tail(n_val);

  const double h0 = opts.h0 > 0.0 ? opts.h0 : default_h0(n_train, std::max(1, opts.s_eff));

  SmoothedQRProblem prob;
  prob.shard = &train;
  prob.tau = opts.tau;
  prob.h0 = h0;
  prob.penalize_intercept = opts.penalize_intercept;
  prob.curvature_hint = design_curvature(train.X);

  if (opts.lambda0 >= 0.0) {
    prob.lambda0 = opts.lambda0;
    InitialFitReport rep = fit_initial(prob, opts.init_tol, opts.init_max_iter);
    return {rep.beta, rep.converged};
  }

  // Local tuning is a plain validation argmin on the machine's own split;
  // the per-machine winners carry small spurious coordinates, and the
  // average of m such supports is dense. That is the documented behavior
  // of this baseline, not a defect.
  const double lmax = lambda0_max(train, opts.tau, h0);
  const int size = std::max(2, opts.init_grid_size);
  CoefficientVector warm = CoefficientVector::Zero(train.dim());
  LocalFit best;
  double best_loss = 0.0;
  bool have_best = false;
  for (int i = 0; i < size; ++i) {
    const double frac = static_cast<double>(i) / (size - 1);
    prob.lambda0 = lmax * std::pow(10.0, -opts.init_grid_decades * frac);
    InitialFitReport rep = fit_initial(prob, opts.init_tol, opts.init_max_iter, &warm);
    warm = rep.beta;
    const double loss = check_loss_eval(rep.beta, X_val, y_val, opts.tau);
    if (!have_best || loss < best_loss) {
      best = {rep.beta, rep.converged};
      best_loss = loss;
      have_best = true;
    }
  }
  return best;
}

}  // namespace

BaselineResult avg_dc(const std::vector<DatasetShard>& shards, const AvgDcOptions& opts) {
  if (shards.empty()) throw ConfigError("avg_dc: no shards");
  const int m = static_cast<int>(shards.size());
  const Eigen::Index p1 = shards.front().dim();

  BaselineResult out;
  out.method = BaselineMethod::AvgDC;
  out.per_machine_betas.resize(static_cast<std::size_t>(m));
  std::vector<char> ok(static_cast<std::size_t>(m), 0);

  parallel_for(m, opts.threads, [&](long k) {
    const LocalFit fit = fit_one_machine(shards[static_cast<std::size_t>(k)], opts);
    out.per_machine_betas[static_cast<std::size_t>(k)] = fit.beta;
    ok[static_cast<std::size_t>(k)] = fit.converged ? 1 : 0;
  });

  // Mean over converged fits; fall back to all fits if none converged.
  CoefficientVector sum = CoefficientVector::Zero(p1);
  int used = 0;
  for (int k = 0; k < m; ++k) {
    if (ok[static_cast<std::size_t>(k)]) {
      sum += out.per_machine_betas[static_cast<std::size_t>(k)];
      ++used;
    } else {
      out.failed_machines.push_back(k);
    }
  }
  if (used == 0) {
    for (int k = 0; k < m; ++k) sum += out.per_machine_betas[static_cast<std::size_t>(k)];
    used = m;
  }
  out.beta = sum / static_cast<double>(used);
  out.comm_values = static_cast<long>(m - 1) * p1;  // each remote machine ships its beta once
  return out;
}

BaselineResult pooled_dhsqr(const Matrix& X, const Vector& y, const ValidationSet& validation,
                            EngineOptions opts) {
  std::vector<DatasetShard> single(1);
  single[0].shard_id = 0;
  single[0].X = X;
  single[0].y = y;

  // Pooled problem: one machine holding everything, local bandwidth pinned
  // to the global one.
  opts.plan.N = X.rows();
  opts.plan.n = X.rows();
  const double h = opts.h_override > 0.0 ? opts.h_override : global_bandwidth(opts.plan);
  opts.h_override = h;
  opts.b_override = h;

  BaselineResult out;
  out.method = BaselineMethod::PooledDHSQR;
  out.engine = run_dhsqr(single, validation, opts);
  out.beta = out.engine.final_beta();
  out.comm_values = 0;
  return out;
}

}  // namespace dhsqr
