#include "dhsqr/dist_engine.hpp"

#include <algorithm>
#include <cmath>

#include "dhsqr/metrics.hpp"
#include "dhsqr/parallel.hpp"

namespace dhsqr {

namespace {

class LocalBus final : public Transport {
 public:
  void begin_iteration() override {
    ledger_.iterations.push_back({});
    pending_.clear();
  }

  void broadcast(const BroadcastMsg& msg, int n_remote_workers) override {
    current_ = msg;
    auto& it = ledger_.iterations.back();
    const long values = static_cast<long>(n_remote_workers) * msg.beta.size();
    it.broadcast_values += values;
    it.messages += n_remote_workers;
    ledger_.total_broadcast += values;
    ledger_.total_messages += n_remote_workers;
  }

  const BroadcastMsg& current_broadcast() const override { return current_; }

  void send_summary(SummaryMsg msg) override {
    auto& it = ledger_.iterations.back();
    const long values = msg.z.size() + msg.g.size();
    it.upload_values += values;
    it.messages += 1;
    ledger_.total_upload += values;
    ledger_.total_messages += 1;
    pending_.push_back(std::move(msg));
  }

  std::vector<SummaryMsg> collect_summaries(int expected) override {
    if (static_cast<int>(pending_.size()) != expected)
      throw ProtocolViolation("local bus: summary count mismatch");
    return std::move(pending_);
  }

  const CommLedger& ledger() const override { return ledger_; }

 private:
  BroadcastMsg current_;
  std::vector<SummaryMsg> pending_;
  CommLedger ledger_;
};

double validation_check_loss(const ValidationSet& validation, const CoefficientVector& beta,
                             double tau) {
  return check_loss_eval(beta, validation.X, validation.y, tau);
}

Vector per_row_losses(const ValidationSet& validation, const CoefficientVector& beta,
                      double tau) {
  const Vector residuals = validation.y - validation.X * beta;
  Vector losses(residuals.size());
  for (Eigen::Index i = 0; i < residuals.size(); ++i)
    losses[i] = check_loss(residuals[i], tau);
  return losses;
}

// Selects among candidates by mean validation loss. With the one-SE rule the
// pick is the largest lambda whose PAIRED loss difference against the argmin
// is within one standard error; candidate losses share validation rows, so
// only the paired spread is the right noise scale.
std::size_t pick_candidate(const std::vector<Vector>& losses, bool one_se_rule) {
  std::vector<double> means(losses.size());
  for (std::size_t i = 0; i < losses.size(); ++i) means[i] = losses[i].mean();
  std::size_t arg_min = 0;
  for (std::size_t i = 1; i < losses.size(); ++i)
    if (means[i] < means[arg_min]) arg_min = i;
  if (!one_se_rule) return arg_min;

  for (std::size_t i = 0; i < arg_min; ++i) {
    const Vector diff = losses[i] - losses[arg_min];
    const long n = diff.size();
    if (n < 2) break;
    const double mean_diff = diff.mean();
    double ss = 0.0;
    for (long j = 0; j < n; ++j) ss += (diff[j] - mean_diff) * (diff[j] - mean_diff);
    const double se = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
    if (mean_diff <= se) return i;
  }
  return arg_min;
}

}  // namespace

std::unique_ptr<Transport> make_local_bus() { return std::make_unique<LocalBus>(); }

double kappa_rate(double a, double b, int g, int s_eff, long N, long n) {
  const double s = static_cast<double>(s_eff);
  const double log_n = std::log(static_cast<double>(n));
  const double log_N = std::log(static_cast<double>(N));
  const double first = std::pow(s, a) * std::pow(log_n / n, (2.0 * g + 3.0) / 6.0);
  const double second = std::pow(s, b) * std::pow(log_N / n, (g + 1.0) / 2.0);
  return std::max(first, second);
}

double lambda_shape(int t, int s_eff, long N, long n) {
  const double base = std::sqrt(std::log(static_cast<double>(N)) / static_cast<double>(N));
  return base + kappa_rate(5.0 * t / 6.0, t, t, s_eff, N, n);
}

double fixed_lambda(const LambdaSchedule& schedule, int t, int s_eff, long N, long n) {
  if (!schedule.fixed_values.empty()) {
    if (t < 1 || t > static_cast<int>(schedule.fixed_values.size()))
      throw ConfigError("fixed lambda schedule shorter than iteration count");
    return schedule.fixed_values[static_cast<std::size_t>(t - 1)];
  }
  return schedule.fixed_C * lambda_shape(t, s_eff, N, n);
}

WorkerSummary worker_step(const DatasetShard& shard, const CoefficientVector& beta_prev,
                          double tau, double h) {
  const PseudoAggregates agg = shard_aggregates(shard, beta_prev, tau, h, false);
  WorkerSummary summary;
  summary.shard_id = shard.shard_id;
  summary.z_nk = agg.z;
  summary.g_k = agg.g;
  return summary;
}

PenalizedQuadratic coordinator_assemble(const std::vector<WorkerSummary>& summaries,
                                        const DatasetShard& central,
                                        const CoefficientVector& beta_prev, double tau,
                                        double h, double b, double lambda) {
  (void)h;  // summaries were produced at h; assembly itself only needs b
  const int m = static_cast<int>(summaries.size());
  if (m == 0) throw ProtocolViolation("coordinator_assemble: no summaries");
  const Eigen::Index p1 = beta_prev.size();

  std::vector<const WorkerSummary*> ordered(static_cast<std::size_t>(m), nullptr);
  for (const WorkerSummary& s : summaries) {
    if (s.shard_id < 0 || s.shard_id >= m)
      throw ProtocolViolation("coordinator_assemble: shard_id out of range");
    if (ordered[static_cast<std::size_t>(s.shard_id)] != nullptr)
      throw ProtocolViolation("coordinator_assemble: duplicate shard_id");
    if (s.z_nk.size() != p1 || s.g_k.size() != p1)
      throw ProtocolViolation("coordinator_assemble: summary dimension mismatch");
    ordered[static_cast<std::size_t>(s.shard_id)] = &s;
  }

  Vector z_N = Vector::Zero(p1);
  Vector g_bar = Vector::Zero(p1);
  for (const WorkerSummary* s : ordered) {
    z_N += s->z_nk;
    g_bar += s->g_k;
  }
  z_N /= static_cast<double>(m);
  g_bar /= static_cast<double>(m);

  PenalizedQuadratic q;
  q.A = shard_aggregates(central, beta_prev, tau, b, true).G;
  q.a = z_N + q.A * beta_prev - g_bar;
  q.lambda = lambda;
  return q;
}

GridSelection select_lambda_on_grid(const PenalizedQuadratic& base,
                                    const CoefficientVector& warm_start,
                                    const ValidationSet& validation, double tau,
                                    const LambdaSchedule& schedule,
                                    const SolverOptions& solver_opts, long grid_max_sweeps,
                                    double lambda_floor) {
  if (validation.empty())
    throw ConfigError("lambda grid selection requires a validation set");

  const double lambda_max = base.a.cwiseAbs().maxCoeff();
  GridSelection best;
  if (lambda_max <= 0.0) {
    PenalizedQuadratic q = base;
    q.lambda = 0.0;
    best.report = solve(q, warm_start, solver_opts);
    best.validation_loss = validation_check_loss(validation, best.report.beta, tau);
    return best;
  }

  SolverOptions grid_opts = solver_opts;
  grid_opts.max_sweeps = grid_max_sweeps;

  const int size = std::max(2, schedule.grid_size);
  std::vector<double> lambdas;
  std::vector<SolverReport> reports;
  std::vector<Vector> losses;
  lambdas.reserve(static_cast<std::size_t>(size));
  CoefficientVector warm = warm_start;
  for (int i = 0; i < size; ++i) {
    const double frac = static_cast<double>(i) / (size - 1);
    double lambda = lambda_max * std::pow(10.0, -schedule.grid_decades * frac);
    const bool floored = lambda_floor > 0.0 && lambda < lambda_floor && lambda_floor < lambda_max;
    if (floored) lambda = lambda_floor;
    PenalizedQuadratic q = base;
    q.lambda = lambda;
    SolverReport rep = solve(q, warm, grid_opts);
    warm = rep.beta;
    lambdas.push_back(lambda);
    losses.push_back(per_row_losses(validation, rep.beta, tau));
    reports.push_back(std::move(rep));
    if (floored) break;  // everything below collapses onto the floor
  }

  const std::size_t chosen = pick_candidate(losses, schedule.one_se_rule);
  best.lambda = lambdas[chosen];
  best.report = std::move(reports[chosen]);
  best.validation_loss = losses[chosen].mean();

  // Re-certify the winner at the full sweep budget.
  if (!best.report.converged) {
    PenalizedQuadratic q = base;
    q.lambda = best.lambda;
    best.report = solve(q, best.report.beta, solver_opts);
    best.validation_loss = validation_check_loss(validation, best.report.beta, tau);
  }
  return best;
}

namespace {

// Post-selection refit: unpenalized smoothed QR on the selected support.
// Removes the l1 shrinkage bias from the initial estimate without touching
// its support, which tightens the Newton correction at t = 1.
void refit_on_support(const DatasetShard& central, const EngineOptions& opts, double h0,
                      InitialFitReport* fit) {
  std::vector<Eigen::Index> keep{0};
  for (Eigen::Index j = 1; j < fit->beta.size(); ++j)
    if (fit->beta[j] != 0.0) keep.push_back(j);
  if (keep.size() <= 1 || static_cast<long>(keep.size()) >= central.rows()) return;

  DatasetShard restricted;
  restricted.shard_id = central.shard_id;
  restricted.X.resize(central.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c)
    restricted.X.col(static_cast<Eigen::Index>(c)) = central.X.col(keep[c]);
  restricted.y = central.y;

  SmoothedQRProblem prob;
  prob.shard = &restricted;
  prob.tau = opts.tau;
  prob.h0 = h0;
  prob.lambda0 = 0.0;
  prob.penalize_intercept = opts.penalize_intercept;
  CoefficientVector warm(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c)
    warm[static_cast<Eigen::Index>(c)] = fit->beta[keep[c]];
  const InitialFitReport refit =
      fit_initial(prob, opts.init_tol, opts.init_max_iter, &warm);
  if (!refit.beta.allFinite()) return;

  fit->beta.setZero();
  for (std::size_t c = 0; c < keep.size(); ++c)
    fit->beta[keep[c]] = refit.beta[static_cast<Eigen::Index>(c)];
  fit->grad_map_norm = refit.grad_map_norm;
  fit->objective = refit.objective;
}

InitialFitReport fit_initial_with_selection(const DatasetShard& central,
                                            const ValidationSet& validation,
                                            const EngineOptions& opts, double h0,
                                            double* lambda0_used) {
  SmoothedQRProblem prob;
  prob.shard = &central;
  prob.tau = opts.tau;
  prob.h0 = h0;
  prob.penalize_intercept = opts.penalize_intercept;
  prob.curvature_hint = design_curvature(central.X);

  if (opts.lambda0 >= 0.0) {
    prob.lambda0 = opts.lambda0;
    *lambda0_used = opts.lambda0;
    InitialFitReport fit = fit_initial(prob, opts.init_tol, opts.init_max_iter);
    refit_on_support(central, opts, h0, &fit);
    return fit;
  }

  if (validation.empty())
    throw ConfigError("run_dhsqr: lambda0 selection requires a validation set");

  const double lmax = lambda0_max(central, opts.tau, h0);
  const double floor0 = pivotal_lambda0(central, opts.tau, opts.seed);
  const int size = std::max(2, opts.init_grid_size);
  std::vector<double> lambdas;
  std::vector<InitialFitReport> reports;
  std::vector<Vector> losses;
  CoefficientVector warm = CoefficientVector::Zero(central.dim());
  for (int i = 0; i < size; ++i) {
    const double frac = static_cast<double>(i) / (size - 1);
    double lambda0 = lmax * std::pow(10.0, -opts.init_grid_decades * frac);
    const bool floored = lambda0 < floor0 && floor0 < lmax;
    if (floored) lambda0 = floor0;
    prob.lambda0 = lambda0;
    InitialFitReport rep = fit_initial(prob, opts.init_tol, opts.init_max_iter, &warm);
    warm = rep.beta;
    lambdas.push_back(lambda0);
    losses.push_back(per_row_losses(validation, rep.beta, opts.tau));
    reports.push_back(std::move(rep));
    if (floored) break;
  }

  const std::size_t chosen = pick_candidate(losses, opts.schedule.one_se_rule);
  *lambda0_used = lambdas[chosen];
  InitialFitReport fit = std::move(reports[chosen]);
  refit_on_support(central, opts, h0, &fit);
  return fit;
}

}  // namespace

RunResult run_dhsqr(const std::vector<DatasetShard>& shards, const ValidationSet& validation,
                    const EngineOptions& opts) {
  if (shards.empty()) throw ConfigError("run_dhsqr: no shards");
  if (opts.T < 1) throw ConfigError("run_dhsqr: T must be >= 1");
  const int m = static_cast<int>(shards.size());
  const Eigen::Index p1 = shards.front().dim();
  for (const DatasetShard& s : shards) {
    if (s.dim() != p1) throw ConfigError("run_dhsqr: inconsistent shard dimensions");
    if (s.rows() < 1 || !(s.X.col(0).array() == 1.0).all())
      throw ConfigError("run_dhsqr: shard design must carry an all-ones intercept column");
  }

  RunResult result;
  result.seed = opts.seed;

  BandwidthPlan plan = opts.plan;
  if (plan.N <= 0) {
    long total = 0;
    for (const DatasetShard& s : shards) total += s.rows();
    plan.N = total;
  }
  if (plan.n <= 0) plan.n = shards.front().rows();
  plan.s_eff = std::max(1, plan.s_eff);

  result.h_used = opts.h_override > 0.0 ? opts.h_override : global_bandwidth(plan);
  result.b_used = opts.b_override > 0.0 ? opts.b_override : local_bandwidth(plan);
  result.bandwidth_inverted = result.b_used < result.h_used;

  const double h0 = opts.h0 > 0.0 ? opts.h0 : default_h0(shards.front().rows(), plan.s_eff);
  result.initial_report =
      fit_initial_with_selection(shards.front(), validation, opts, h0, &result.lambda0_used);
  result.beta_initial = result.initial_report.beta;

  auto bus = make_local_bus();
  CoefficientVector beta = result.beta_initial;
  result.traces.reserve(static_cast<std::size_t>(opts.T));
  double anchor_c0 = 0.0;

  // Pivotal lower scale for the central lasso: the coordinator simulates
  // max_j |(1/n) sum x_ij (tau - I(U_i <= tau))| on its own rows and
  // rescales to the global sample size. Candidates below this level admit
  // coordinates driven by indicator noise alone.
  const double lambda_floor =
      opts.schedule.floor_c > 0.0
          ? opts.schedule.floor_c * pivotal_lambda0(shards.front(), opts.tau, opts.seed) *
                std::sqrt(static_cast<double>(shards.front().rows()) /
                          static_cast<double>(plan.N))
          : 0.0;

  for (int t = 1; t <= opts.T; ++t) {
    bus->begin_iteration();
    bus->broadcast(BroadcastMsg{t, beta}, m - 1);

    // Remote workers read the broadcast and reply through the bus; the
    // coordinator's own summary stays local.
    std::vector<SummaryMsg> remote(static_cast<std::size_t>(std::max(0, m - 1)));
    parallel_for(m - 1, opts.threads, [&](long idx) {
      const DatasetShard& shard = shards[static_cast<std::size_t>(idx + 1)];
      const WorkerSummary s =
          worker_step(shard, bus->current_broadcast().beta, opts.tau, result.h_used);
      remote[static_cast<std::size_t>(idx)] = SummaryMsg{t, s.shard_id, s.z_nk, s.g_k};
    });
    for (SummaryMsg& msg : remote) bus->send_summary(std::move(msg));

    std::vector<WorkerSummary> summaries;
    summaries.reserve(static_cast<std::size_t>(m));
    summaries.push_back(worker_step(shards.front(), beta, opts.tau, result.h_used));
    for (SummaryMsg& msg : bus->collect_summaries(m - 1))
      summaries.push_back(WorkerSummary{msg.shard_id, std::move(msg.z), std::move(msg.g)});

    PenalizedQuadratic q = coordinator_assemble(summaries, shards.front(), beta, opts.tau,
                                                result.h_used, result.b_used, 0.0);
    q.penalize_intercept = opts.penalize_intercept;

    const bool grid_now =
        opts.schedule.mode == LambdaSchedule::Mode::ValidationGrid ||
        (opts.schedule.mode == LambdaSchedule::Mode::AnchoredValidation && t == 1);

    IterationTrace trace;
    trace.t = t;
    try {
      if (grid_now) {
        GridSelection sel = select_lambda_on_grid(q, beta, validation, opts.tau, opts.schedule,
                                                  opts.solver, opts.grid_max_sweeps, lambda_floor);
        trace.lambda_used = sel.lambda;
        trace.solver = std::move(sel.report);
        trace.validation_loss = sel.validation_loss;
        if (opts.schedule.mode == LambdaSchedule::Mode::AnchoredValidation)
          anchor_c0 = sel.lambda / lambda_shape(1, plan.s_eff, plan.N, plan.n);
      } else {
        if (opts.schedule.mode == LambdaSchedule::Mode::AnchoredValidation)
          q.lambda = std::max(anchor_c0 * lambda_shape(t, plan.s_eff, plan.N, plan.n),
                              lambda_floor);
        else
          q.lambda = fixed_lambda(opts.schedule, t, plan.s_eff, plan.N, plan.n);
        trace.lambda_used = q.lambda;
        trace.solver = solve(q, beta, opts.solver);
        if (!validation.empty())
          trace.validation_loss = validation_check_loss(validation, trace.solver.beta, opts.tau);
      }
    } catch (const NumericalFailure& failure) {
      // Abort with the partial trace; completed iterations stay valid.
      result.abort_reason = failure.what();
      break;
    }

    const CoefficientVector prev = beta;
    beta = trace.solver.beta;

    // Safeguarded accept: a kernel-Newton step can overshoot when the
    // residual scale collapses below the bandwidth (degenerate designs).
    // The update is discarded only when it is significantly worse than the
    // previous iterate, one paired standard error on the shared validation
    // rows; noise-level differences always pass.
    if (!validation.empty()) {
      const Vector prev_losses = per_row_losses(validation, prev, opts.tau);
      const Vector new_losses = per_row_losses(validation, beta, opts.tau);
      const Vector diff = new_losses - prev_losses;
      const long nv = diff.size();
      const double mean_diff = diff.mean();
      double se = 0.0;
      if (nv > 1) {
        double ss = 0.0;
        for (long i = 0; i < nv; ++i) ss += (diff[i] - mean_diff) * (diff[i] - mean_diff);
        se = std::sqrt(ss / static_cast<double>(nv - 1) / static_cast<double>(nv));
      }
      if (mean_diff > se) {
        beta = prev;
        trace.kept_previous = true;
        trace.validation_loss = prev_losses.mean();
      }
    }

    trace.beta = beta;
    if (opts.beta_true != nullptr)
      trace.l2_error_vs_truth = (beta - *opts.beta_true).norm();
    result.traces.push_back(std::move(trace));

    if (opts.early_stop && (beta - prev).norm() <= opts.early_stop_tol) break;
  }

  result.ledger = bus->ledger();
  return result;
}

bool ledger_check(const CommLedger& ledger, int m, int p, int T) {
  if (static_cast<int>(ledger.iterations.size()) != T) return false;
  const long per_upload = static_cast<long>(m - 1) * 2 * (p + 1);
  const long per_broadcast = static_cast<long>(m - 1) * (p + 1);
  for (const auto& it : ledger.iterations) {
    if (it.upload_values != per_upload) return false;
    if (it.broadcast_values != per_broadcast) return false;
  }
  const long expected_total = static_cast<long>(T) * (m - 1) * 3 * (p + 1);
  return ledger.total_values() == expected_total;
}

}  // namespace dhsqr
