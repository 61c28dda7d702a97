#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "dhsqr/kernel.hpp"
#include "dhsqr/qp_lasso.hpp"
#include "dhsqr/qr_init.hpp"
#include "dhsqr/transform.hpp"
#include "dhsqr/types.hpp"

namespace dhsqr {

// The two (p+1)-vectors a worker uploads per iteration. Workers never form
// or ship a (p+1)x(p+1) matrix; this type is the whole upstream payload.
struct WorkerSummary {
  int shard_id = 0;
  Vector z_nk;  // (1/n) sum x_tilde y_tilde, division-free form
  Vector g_k;   // D_hat_{k,h} beta_prev
};

// Logical wire format for a future transport; one float64 per value.
struct BroadcastMsg {
  int t = 0;
  Vector beta;
};
struct SummaryMsg {
  int t = 0;
  int shard_id = 0;
  Vector z;
  Vector g;
};

struct CommLedger {
  struct PerIteration {
    long broadcast_values = 0;
    long upload_values = 0;
    long messages = 0;
  };
  std::vector<PerIteration> iterations;
  long total_broadcast = 0;
  long total_upload = 0;
  long total_messages = 0;

  long total_values() const { return total_broadcast + total_upload; }
};

// In-process bus with the exact value accounting a network transport would
// incur. The coordinator's own summary never crosses the bus (no
// self-message). A socket transport could implement the same interface
// without touching the algorithm.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual void broadcast(const BroadcastMsg& msg, int n_remote_workers) = 0;
  virtual const BroadcastMsg& current_broadcast() const = 0;
  virtual void send_summary(SummaryMsg msg) = 0;
  virtual std::vector<SummaryMsg> collect_summaries(int expected) = 0;
  virtual void begin_iteration() = 0;
  virtual const CommLedger& ledger() const = 0;
};

std::unique_ptr<Transport> make_local_bus();

struct IterationTrace {
  int t = 0;
  CoefficientVector beta;
  double lambda_used = 0.0;
  SolverReport solver;
  double l2_error_vs_truth = -1.0;  // negative when no truth supplied
  double validation_loss = -1.0;    // negative when no validation set
  // Safeguarded accept: the update was discarded because it scored worse
  // than beta_{t-1} on the validation set, and the previous iterate was
  // carried forward.
  bool kept_previous = false;
};

struct LambdaSchedule {
  // ValidationGrid: free per-iteration grid search.
  // AnchoredValidation: grid search at t=1 only; the winner pins the
  //   constant C0 and later iterations follow lambda_t = C0 * shape(t)
  //   of the theoretical rate (one validated constant, decaying path).
  // Fixed: user-supplied constant or explicit values, no validation.
  enum class Mode { ValidationGrid, AnchoredValidation, Fixed };
  Mode mode = Mode::AnchoredValidation;

  // Validation grid: lambda in logspace(|a|_inf .. |a|_inf * 10^-decades),
  // warm-started descending, scored by mean check loss on the held-out set.
  int grid_size = 30;
  double grid_decades = 3.0;
  // Paired one-standard-error rule on the grid: prefer the largest lambda
  // whose loss is within one SE of the minimizer's, judged per shared
  // validation row.
  bool one_se_rule = false;

  // Validated candidates never drop below floor_c * sqrt(log N / N), the
  // lower lambda scale of the convergence theory. Going beneath it admits
  // spurious coordinates that the shifted-loss correction then re-injects
  // on every later iteration. 0 disables the floor.
  double floor_c = 1.0;

  // Fixed mode, the theoretical rate shape with a user-supplied constant:
  //   lambda_t = C (sqrt(log N / N) + kappa(5t/6, t, t)).
  double fixed_C = 1.0;
  // Explicit per-iteration values (1-based t); overrides the shape if set.
  std::vector<double> fixed_values;
};

// kappa(a, b, g) = max{ s^a (log n / n)^{(2g+3)/6}, s^b (log N / n)^{(g+1)/2} }.
double kappa_rate(double a, double b, int g, int s_eff, long N, long n);

// The theoretical lambda shape at iteration t (C = 1):
//   sqrt(log N / N) + kappa(5t/6, t, t).
double lambda_shape(int t, int s_eff, long N, long n);

double fixed_lambda(const LambdaSchedule& schedule, int t, int s_eff, long N, long n);

struct ValidationSet {
  Matrix X;
  Vector y;
  bool empty() const { return y.size() == 0; }
};

struct EngineOptions {
  double tau = 0.5;
  int T = 10;
  BandwidthPlan plan;      // resolved against training sizes by run_dhsqr
  double h_override = 0.0; // > 0 forces the global bandwidth
  double b_override = 0.0; // > 0 forces the local bandwidth
  LambdaSchedule schedule;

  // Initial estimator controls. lambda0 < 0 selects by grid + validation.
  double lambda0 = -1.0;
  double h0 = 0.0;  // <= 0 uses default_h0(n_central, s_eff)
  int init_grid_size = 12;
  double init_grid_decades = 3.0;
  double init_tol = 1e-5;
  long init_max_iter = 1200;

  SolverOptions solver;
  long grid_max_sweeps = 600;  // sweep cap while scanning the lambda grid
  bool penalize_intercept = true;

  bool early_stop = false;
  double early_stop_tol = 1e-8;

  std::uint64_t seed = 0;  // recorded in results; the engine is deterministic
  const CoefficientVector* beta_true = nullptr;
  int threads = 1;
};

struct RunResult {
  std::vector<IterationTrace> traces;
  CommLedger ledger;
  CoefficientVector beta_initial;
  InitialFitReport initial_report;
  double lambda0_used = 0.0;
  double h_used = 0.0;
  double b_used = 0.0;
  bool bandwidth_inverted = false;  // b < h at these sizes
  std::uint64_t seed = 0;
  // Nonempty when a central solve failed numerically; traces up to the
  // failed iteration are retained.
  std::string abort_reason;

  const CoefficientVector& final_beta() const {
    return traces.empty() ? beta_initial : traces.back().beta;
  }
};

// One worker's iteration: pseudo-aggregate the shard at bandwidth h against
// the broadcast estimate. Pure; safe to run shards concurrently.
WorkerSummary worker_step(const DatasetShard& shard, const CoefficientVector& beta_prev,
                          double tau, double h);

// Central assembly of the iteration's penalized quadratic:
//   A = D_hat_{1,b},  a = z_N + A beta_prev - (1/m) sum_k g_k,
// aggregating summaries in ascending shard_id order. Throws
// ProtocolViolation on missing or duplicated shard ids.
PenalizedQuadratic coordinator_assemble(const std::vector<WorkerSummary>& summaries,
                                        const DatasetShard& central,
                                        const CoefficientVector& beta_prev, double tau,
                                        double h, double b, double lambda);

// The full iterative procedure: initial fit on the central shard, then T
// rounds of broadcast / summarize / assemble / solve, with the
// communication ledger kept exactly.
RunResult run_dhsqr(const std::vector<DatasetShard>& shards, const ValidationSet& validation,
                    const EngineOptions& opts);

// Contract: per iteration upload = (m-1)*2*(p+1) and broadcast = (m-1)*(p+1);
// totals = T*(m-1)*3*(p+1).
bool ledger_check(const CommLedger& ledger, int m, int p, int T);

// Lambda selection on an assembled problem (exposed for tests): solves the
// warm-started descending grid, scores candidates on the validation set,
// returns the winner's (lambda, solution report).
struct GridSelection {
  double lambda = 0.0;
  SolverReport report;
  double validation_loss = 0.0;
};
GridSelection select_lambda_on_grid(const PenalizedQuadratic& base,
                                    const CoefficientVector& warm_start,
                                    const ValidationSet& validation, double tau,
                                    const LambdaSchedule& schedule,
                                    const SolverOptions& solver_opts, long grid_max_sweeps,
                                    double lambda_floor = 0.0);

}  // namespace dhsqr
