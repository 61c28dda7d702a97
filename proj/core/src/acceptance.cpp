#include "dhsqr/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "dhsqr/baselines.hpp"
#include "dhsqr/datagen.hpp"
#include "dhsqr/dist_engine.hpp"
#include "dhsqr/experiment.hpp"
#include "dhsqr/kernel.hpp"
#include "dhsqr/metrics.hpp"
#include "dhsqr/parallel.hpp"
#include "dhsqr/qp_lasso.hpp"
#include "dhsqr/qr_init.hpp"
#include "dhsqr/rng.hpp"
#include "dhsqr/transform.hpp"

namespace dhsqr {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

struct Check {
  bool ok = true;
  std::ostringstream detail;

  void expect(bool cond, const std::string& msg) {
    if (!cond) {
      ok = false;
      if (detail.tellp() > 0) detail << "; ";
      detail << msg;
    }
  }
  void note(const std::string& msg) {
    if (detail.tellp() > 0) detail << "; ";
    detail << msg;
  }
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

// ---------------------------------------------------------------------------
// Criterion 1: coordinate descent vs an independent brute-force oracle.
// The oracle only evaluates the objective: coarse grid over [-5,5]^d, then
// coordinate pattern search with shrinking steps.

double oracle_objective_min(const Matrix& A, const Vector& a, double lambda) {
  const int d = static_cast<int>(a.size());
  auto f = [&](const Vector& beta) {
    return 0.5 * beta.dot(A * beta) - beta.dot(a) + lambda * beta.cwiseAbs().sum();
  };

  Vector best = Vector::Zero(d);
  double best_val = f(best);
  const double lo = -5.0, hi = 5.0, coarse = 0.25;
  const int grid_n = static_cast<int>(std::lround((hi - lo) / coarse)) + 1;
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  Vector point(d);
  for (;;) {
    for (int j = 0; j < d; ++j) point[j] = lo + coarse * idx[static_cast<std::size_t>(j)];
    const double val = f(point);
    if (val < best_val) {
      best_val = val;
      best = point;
    }
    int j = 0;
    while (j < d && ++idx[static_cast<std::size_t>(j)] == grid_n) {
      idx[static_cast<std::size_t>(j)] = 0;
      ++j;
    }
    if (j == d) break;
  }

  double step = coarse;
  while (step > 1e-10) {
    bool improved = false;
    for (int j = 0; j < d; ++j) {
      for (double sgn : {1.0, -1.0}) {
        for (;;) {
          Vector cand = best;
          cand[j] += sgn * step;
          const double val = f(cand);
          if (val < best_val) {
            best_val = val;
            best = cand;
            improved = true;
          } else {
            break;
          }
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return best_val;
}

CriterionResult criterion_solver_oracle() {
  Check chk;
  Rng rng(711, 1);
  double worst_gap = 0.0, worst_kkt = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 2 + static_cast<int>(rng.next_u64() % 3);  // p+1 in {2,3,4}
    Matrix B(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) B(i, j) = rng.next_normal();
    Matrix A = (B.transpose() * B) / d;
    A.diagonal().array() += 0.3 + 0.7 * rng.next_uniform();
    A = 0.5 * (A + A.transpose()).eval();
    Vector a(d);
    for (int j = 0; j < d; ++j) a[j] = 2.0 * rng.next_uniform() - 1.0;
    const double lambda = 0.6 * rng.next_uniform() * a.cwiseAbs().maxCoeff();

    PenalizedQuadratic q{A, a, lambda, true};
    SolverOptions opts;
    opts.tol = 1e-10;
    const SolverReport rep = solve(q, Vector::Zero(d), opts);
    const double cd_obj = objective_value(q, rep.beta);
    const double oracle = oracle_objective_min(A, a, lambda);
    const double gap = cd_obj - oracle;
    worst_gap = std::max(worst_gap, std::abs(gap));
    if (rep.converged) worst_kkt = std::max(worst_kkt, rep.kkt_residual);
    chk.expect(std::abs(gap) <= 1e-6, "objective gap " + fmt(gap) + " on trial " +
                                          std::to_string(trial));
    chk.expect(rep.converged, "solver did not converge on trial " + std::to_string(trial));
  }
  chk.expect(worst_kkt <= 1e-8, "worst KKT residual " + fmt(worst_kkt));
  chk.note("worst objective gap " + fmt(worst_gap) + ", worst KKT " + fmt(worst_kkt));
  return {1, "solver oracle equivalence (100 random instances)", chk.ok, chk.detail.str(), 0};
}

// ---------------------------------------------------------------------------
// Criterion 2: run_dhsqr(m=1, b=h) vs pooled_dhsqr, 1e-12 per coordinate.

CriterionResult criterion_pooled_equivalence() {
  Check chk;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    ModelSpec spec;
    spec.model = trial % 2 == 0 ? ModelKind::Homoscedastic : ModelKind::Heteroscedastic;
    spec.noise = NoiseLaw::Normal;
    spec.p = 20;
    spec.beta_base = ModelSpec::default_beta(spec.p);
    const Dataset data = gen_dataset(spec, 200, 9000 + static_cast<std::uint64_t>(trial));
    SplitSpec split;
    split.mode = SplitSpec::Mode::Carve;
    split.val_fraction = 0.10;
    PreparedData prep = prepare_shards(data, 1, split, 77);

    EngineOptions opts;
    opts.tau = 0.5;
    opts.T = 5;
    opts.plan.s_eff = 5;
    opts.plan.N = prep.N_train;
    opts.plan.n = prep.N_train;
    const double h = global_bandwidth(opts.plan);
    opts.h_override = h;
    opts.b_override = h;

    const RunResult direct = run_dhsqr(prep.shards, prep.validation, opts);
    const BaselineResult pooled =
        pooled_dhsqr(prep.shards[0].X, prep.shards[0].y, prep.validation, opts);

    chk.expect(direct.traces.size() == pooled.engine.traces.size(), "trace length mismatch");
    for (std::size_t t = 0; t < direct.traces.size(); ++t) {
      const double diff =
          (direct.traces[t].beta - pooled.engine.traces[t].beta).cwiseAbs().maxCoeff();
      worst = std::max(worst, diff);
      chk.expect(diff <= 1e-12, "iteration " + std::to_string(t + 1) + " differs by " +
                                    fmt(diff) + " on trial " + std::to_string(trial));
    }
  }
  chk.note("worst per-coordinate difference " + fmt(worst));
  return {2, "pooled equivalence (20 datasets, n=200, p=20, T=5)", chk.ok, chk.detail.str(), 0};
}

// ---------------------------------------------------------------------------
// Criterion 3: division-free aggregates match pseudo-pair products.

CriterionResult criterion_division_free() {
  Check chk;
  Rng rng(314159, 5);
  const int p = 6;
  long tested = 0, skipped = 0;
  double worst = 0.0;
  for (long trial = 0; trial < 10000; ++trial) {
    Vector x(p + 1);
    x[0] = 1.0;
    for (int j = 1; j <= p; ++j) x[j] = rng.next_normal();
    CoefficientVector beta(p + 1);
    for (int j = 0; j <= p; ++j) beta[j] = rng.next_normal();
    const double y = x.dot(beta) + 3.0 * rng.next_normal();
    const double tau = 0.2 + 0.6 * rng.next_uniform();
    const double h = 0.3 + 1.7 * rng.next_uniform();

    const double e = y - x.dot(beta);
    if (scaled_kernel(e, h) < kKernelFloor) {
      ++skipped;
      continue;
    }
    ++tested;
    const auto [x_tilde, y_tilde] = pseudo_pair(x, y, beta, tau, h);

    DatasetShard row;
    row.X = x.transpose();
    row.y = Vector::Constant(1, y);
    const PseudoAggregates agg = shard_aggregates(row, beta, tau, h, false);

    const double dz = (agg.z - x_tilde * y_tilde).cwiseAbs().maxCoeff();
    const double dg = (agg.g - x_tilde * (x_tilde.dot(beta))).cwiseAbs().maxCoeff();
    worst = std::max(worst, std::max(dz, dg));
    chk.expect(dz <= 1e-10 && dg <= 1e-10,
               "row " + std::to_string(trial) + " differs by " + fmt(std::max(dz, dg)));
  }
  chk.note(std::to_string(tested) + " rows tested, " + std::to_string(skipped) +
           " below kernel floor, worst " + fmt(worst));
  return {3, "division-free identity (1e4 random rows)", chk.ok, chk.detail.str(), 0};
}

// ---------------------------------------------------------------------------
// Criterion 4: merged-shard aggregates equal size-weighted per-shard means.

CriterionResult criterion_aggregation_linearity() {
  Check chk;
  Rng rng(6171, 9);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int p = 4 + static_cast<int>(rng.next_u64() % 5);
    const long n1 = 3 + static_cast<long>(rng.next_u64() % 40);
    const long n2 = 3 + static_cast<long>(rng.next_u64() % 40);
    auto draw_shard = [&](long n, int id) {
      DatasetShard s;
      s.shard_id = id;
      s.X.resize(n, p + 1);
      s.y.resize(n);
      for (long i = 0; i < n; ++i) {
        s.X(i, 0) = 1.0;
        for (int j = 1; j <= p; ++j) s.X(i, j) = rng.next_normal();
        s.y[i] = rng.next_normal() * 2.0;
      }
      return s;
    };
    const DatasetShard s1 = draw_shard(n1, 0);
    const DatasetShard s2 = draw_shard(n2, 1);
    DatasetShard merged;
    merged.shard_id = 0;
    merged.X.resize(n1 + n2, p + 1);
    merged.X << s1.X, s2.X;
    merged.y.resize(n1 + n2);
    merged.y << s1.y, s2.y;

    CoefficientVector beta(p + 1);
    for (int j = 0; j <= p; ++j) beta[j] = rng.next_normal();
    const double tau = 0.2 + 0.6 * rng.next_uniform();
    const double h = 0.4 + rng.next_uniform();

    const PseudoAggregates a1 = shard_aggregates(s1, beta, tau, h, true);
    const PseudoAggregates a2 = shard_aggregates(s2, beta, tau, h, true);
    const PseudoAggregates am = shard_aggregates(merged, beta, tau, h, true);
    const double w1 = static_cast<double>(n1) / (n1 + n2);
    const double w2 = static_cast<double>(n2) / (n1 + n2);

    const double dz = (am.z - (w1 * a1.z + w2 * a2.z)).cwiseAbs().maxCoeff();
    const double dg = (am.g - (w1 * a1.g + w2 * a2.g)).cwiseAbs().maxCoeff();
    const double dG = (am.G - (w1 * a1.G + w2 * a2.G)).cwiseAbs().maxCoeff();
    worst = std::max({worst, dz, dg, dG});
    chk.expect(dz <= 1e-12 && dg <= 1e-12 && dG <= 1e-12,
               "trial " + std::to_string(trial) + " differs by " + fmt(std::max({dz, dg, dG})));
  }
  chk.note("worst difference " + fmt(worst));
  return {4, "aggregation linearity (50 randomized merges)", chk.ok, chk.detail.str(), 0};
}

// ---------------------------------------------------------------------------
// Criterion 5: exact communication ledger for required (m, p, T) tuples.

CriterionResult criterion_ledger(int threads) {
  Check chk;
  const struct {
    int m, p, T;
  } tuples[] = {{2, 10, 3}, {5, 500, 10}, {40, 500, 10}};
  for (const auto& tp : tuples) {
    ModelSpec spec;
    spec.p = tp.p;
    spec.beta_base = ModelSpec::default_beta(tp.p);
    const long n_local = 20;
    const Dataset data = gen_dataset(spec, tp.m * n_local, 4242);
    std::vector<DatasetShard> shards = shard_dataset(data.X, data.y, tp.m, 4242);

    EngineOptions opts;
    opts.tau = 0.5;
    opts.T = tp.T;
    opts.plan.s_eff = 5;
    opts.lambda0 = 1.0;
    opts.init_max_iter = 60;
    opts.schedule.mode = LambdaSchedule::Mode::Fixed;
    opts.schedule.fixed_values.assign(static_cast<std::size_t>(tp.T), 1.0);
    opts.threads = threads;

    const RunResult run = run_dhsqr(shards, ValidationSet{}, opts);
    const long expected = static_cast<long>(tp.T) * (tp.m - 1) * 3 * (tp.p + 1);
    chk.expect(run.ledger.total_values() == expected,
               "(m=" + std::to_string(tp.m) + ",p=" + std::to_string(tp.p) +
                   ",T=" + std::to_string(tp.T) + ") total " +
                   std::to_string(run.ledger.total_values()) + " != " +
                   std::to_string(expected));
    chk.expect(ledger_check(run.ledger, tp.m, tp.p, tp.T), "per-iteration contract violated");
  }
  chk.note("totals 99 / 60120 / 586170 values");
  return {5, "communication ledger exactness", chk.ok, chk.detail.str(), 0};
}

// ---------------------------------------------------------------------------
// Criterion 6: smoothed-loss derivative vs central finite differences.

CriterionResult criterion_smoothed_gradient() {
  Check chk;
  double worst = 0.0;
  for (double h0 : {0.05, 0.5, 2.0}) {
    for (double tau : {0.3, 0.5, 0.7}) {
      const double root = h0 * normal_quantile(1.0 - tau);  // where l' vanishes
      for (int i = 0; i <= 200; ++i) {
        const double u = -5.0 * h0 + 10.0 * h0 * i / 200.0;
        if (std::abs(u - root) < 0.05 * h0) continue;  // relative error undefined at the zero
        const double delta = 1e-4 * h0;
        const double fd = (smoothed_check_loss(u + delta, tau, h0) -
                           smoothed_check_loss(u - delta, tau, h0)) /
                          (2.0 * delta);
        const double an = smoothed_check_loss_deriv(u, tau, h0);
        const double rel = std::abs(fd - an) / std::abs(an);
        worst = std::max(worst, rel);
        chk.expect(rel <= 1e-6, "rel err " + fmt(rel) + " at u=" + fmt(u) + ", h0=" + fmt(h0) +
                                    ", tau=" + fmt(tau));
      }
    }
  }
  chk.note("worst relative error " + fmt(worst));
  return {6, "smoothed-loss gradient vs finite differences", chk.ok, chk.detail.str(), 0};
}

// ---------------------------------------------------------------------------
// Criterion 7: identical config + seed twice -> bit-identical trace CSVs.

std::string slurp(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

CriterionResult criterion_determinism(const std::string& scratch, int threads) {
  Check chk;
  ExperimentConfig config;
  config.model = ModelKind::Heteroscedastic;
  config.noise = NoiseLaw::Normal;
  config.p = 20;
  config.taus = {0.5};
  config.Ns = {400};
  config.ns = {100};
  config.T = 3;
  config.replicates = 2;
  config.seed = 555;
  config.methods = {"dhsqr"};
  config.threads = threads;
  config.write_traces = true;

  const fs::path dir_a = fs::path(scratch) / "determinism_a";
  const fs::path dir_b = fs::path(scratch) / "determinism_b";
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
  config.out_dir = dir_a.string();
  run_experiment_grid(config);
  config.out_dir = dir_b.string();
  run_experiment_grid(config);

  int compared = 0;
  for (const auto& entry : fs::directory_iterator(dir_a)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("trace_", 0) != 0) continue;
    ++compared;
    chk.expect(fs::exists(dir_b / name), "missing " + name + " in second run");
    if (fs::exists(dir_b / name))
      chk.expect(slurp(entry.path()) == slurp(dir_b / name), name + " differs between runs");
  }
  chk.expect(compared > 0, "no trace files produced");
  chk.note(std::to_string(compared) + " trace files compared byte-for-byte");
  return {7, "determinism of trace CSVs", chk.ok, chk.detail.str(), 0};
}

// ---------------------------------------------------------------------------
// Desk-scale reproduction cells (criteria 8-13).

struct CellStats {
  std::vector<double> l2_dhsqr, f1_dhsqr;
  std::vector<double> l2_pooled;
  std::vector<double> f1_avgdc;
  std::vector<std::vector<double>> dhsqr_traces;  // per replicate l2 per iteration
  bool all_finite = true;
};

CellStats run_cell(ModelKind model, NoiseLaw noise, double tau, long N, long n,
                   const std::vector<std::string>& methods, int replicates,
                   std::uint64_t seed, int threads) {
  ExperimentConfig config;
  config.model = model;
  config.noise = noise;
  config.p = 500;
  config.taus = {tau};
  config.Ns = {N};
  config.ns = {n};
  config.T = 10;
  config.replicates = replicates;
  config.seed = seed;
  config.methods = methods;
  config.write_traces = false;

  CellStats stats;
  std::vector<ReplicateOutcome> outcomes(static_cast<std::size_t>(replicates));
  parallel_for(replicates, threads, [&](long rep) {
    outcomes[static_cast<std::size_t>(rep)] =
        run_replicate(config, tau, N, n, 0, static_cast<int>(rep));
  });

  for (const ReplicateOutcome& out : outcomes) {
    for (const RunRecord& rec : out.records) {
      if (!std::isfinite(rec.l2_error) || !std::isfinite(rec.f1)) stats.all_finite = false;
      if (rec.method == "dhsqr") {
        stats.l2_dhsqr.push_back(rec.l2_error);
        stats.f1_dhsqr.push_back(rec.f1);
      } else if (rec.method == "pooled") {
        stats.l2_pooled.push_back(rec.l2_error);
      } else if (rec.method == "avgdc") {
        stats.f1_avgdc.push_back(rec.f1);
      }
    }
    const auto it = out.traces.find("dhsqr");
    if (it != out.traces.end()) {
      std::vector<double> l2s;
      for (const IterationTrace& tr : it->second) {
        l2s.push_back(tr.l2_error_vs_truth);
        if (!std::isfinite(tr.l2_error_vs_truth)) stats.all_finite = false;
      }
      stats.dhsqr_traces.push_back(std::move(l2s));
    }
  }
  return stats;
}

std::vector<double> median_trace(const std::vector<std::vector<double>>& traces) {
  std::vector<double> out;
  if (traces.empty()) return out;
  const std::size_t T = traces.front().size();
  for (std::size_t t = 0; t < T; ++t) {
    std::vector<double> vals;
    for (const auto& tr : traces)
      if (t < tr.size()) vals.push_back(tr[t]);
    out.push_back(median(vals));
  }
  return out;
}

}  // namespace

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts) {
  const int threads = opts.threads > 0 ? opts.threads : default_thread_count();
  std::vector<CriterionResult> results;

  auto add = [&](CriterionResult r, const Clock::time_point& start) {
    r.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    results.push_back(std::move(r));
  };

  if (!opts.repro_only) {
    auto t0 = Clock::now();
    add(criterion_solver_oracle(), t0);
    t0 = Clock::now();
    add(criterion_pooled_equivalence(), t0);
    t0 = Clock::now();
    add(criterion_division_free(), t0);
    t0 = Clock::now();
    add(criterion_aggregation_linearity(), t0);
    t0 = Clock::now();
    add(criterion_ledger(threads), t0);
    t0 = Clock::now();
    add(criterion_smoothed_gradient(), t0);
    t0 = Clock::now();
    add(criterion_determinism(opts.scratch_dir, threads), t0);
  }

  if (opts.fast_only) return results;

  const int R = opts.replicates;

  // Cell A: heteroscedastic normal, tau=0.5, N=20000, n=500 (criteria 8, 9, 11).
  auto tA = Clock::now();
  const CellStats cellA = run_cell(ModelKind::Heteroscedastic, NoiseLaw::Normal, 0.5, 20000,
                                   500, {"dhsqr", "pooled", "avgdc"}, R, 814001, threads);
  {
    Check chk;
    const double med_l2 = median(cellA.l2_dhsqr);
    const double med_f1 = median(cellA.f1_dhsqr);
    chk.expect(med_l2 <= 0.12, "median l2 " + fmt(med_l2) + " > 0.12");
    chk.expect(med_f1 >= 0.90, "median F1 " + fmt(med_f1) + " < 0.90");
    chk.note("median l2 " + fmt(med_l2) + ", median F1 " + fmt(med_f1) + " (reference regime 0.055 / 0.991)");
    add({8, "table cell: het normal tau=0.5 N=20000 n=500", chk.ok, chk.detail.str(), 0}, tA);
  }
  {
    auto t0 = Clock::now();
    Check chk;
    const double med_avg = median(cellA.f1_avgdc);
    const double med_dhsqr = median(cellA.f1_dhsqr);
    chk.expect(med_avg <= 0.30, "median Avg-DC F1 " + fmt(med_avg) + " > 0.30");
    chk.expect(med_dhsqr - med_avg >= 0.5,
               "support-recovery gap " + fmt(med_dhsqr - med_avg) + " < 0.5");
    chk.note("Avg-DC median F1 " + fmt(med_avg) + ", gap " + fmt(med_dhsqr - med_avg));
    add({9, "Avg-DC support-recovery failure and gap", chk.ok, chk.detail.str(), 0}, t0);
  }

  // Cell B: same design at N=5000 (criterion 10).
  {
    auto t0 = Clock::now();
    const CellStats cellB = run_cell(ModelKind::Heteroscedastic, NoiseLaw::Normal, 0.5, 5000,
                                     500, {"dhsqr"}, R, 814002, threads);
    Check chk;
    const double med_small = median(cellB.l2_dhsqr);
    const double med_large = median(cellA.l2_dhsqr);
    chk.expect(med_large < med_small, "l2 at N=20000 (" + fmt(med_large) +
                                          ") not below l2 at N=5000 (" + fmt(med_small) + ")");
    chk.note("median l2: N=5000 " + fmt(med_small) + " -> N=20000 " + fmt(med_large) +
             " (reference 0.126 -> 0.055)");
    add({10, "sample-size monotonicity N=5000 vs N=20000", chk.ok, chk.detail.str(), 0}, t0);
  }

  // Criterion 11: iteration trend from cell A plus pooled comparison.
  {
    auto t0 = Clock::now();
    Check chk;
    const std::vector<double> med_tr = median_trace(cellA.dhsqr_traces);
    chk.expect(med_tr.size() >= 10, "trace shorter than T=10");
    // med_tr[i] is iteration i+1; non-increasing (10% slack) from iteration 3 on.
    for (std::size_t i = 2; i + 1 < med_tr.size(); ++i)
      chk.expect(med_tr[i + 1] <= 1.10 * med_tr[i],
                 "median trace rose >10% at iteration " + std::to_string(i + 2));
    const double final_dhsqr = med_tr.empty() ? 1e9 : med_tr.back();
    const double final_pooled = median(cellA.l2_pooled);
    chk.expect(final_dhsqr <= 1.5 * final_pooled,
               "T=10 l2 " + fmt(final_dhsqr) + " > 1.5 x pooled " + fmt(final_pooled));
    chk.note("median trace tail " + fmt(final_dhsqr) + ", pooled " + fmt(final_pooled));
    add({11, "iteration convergence trend and pooled gap", chk.ok, chk.detail.str(), 0}, t0);
  }

  // Criterion 12: Cauchy noise robustness.
  {
    auto t0 = Clock::now();
    const CellStats cellC = run_cell(ModelKind::Homoscedastic, NoiseLaw::Cauchy, 0.5, 10000,
                                     500, {"dhsqr"}, R, 814003, threads);
    Check chk;
    chk.expect(cellC.all_finite, "non-finite metric under Cauchy noise");
    const double med_f1 = median(cellC.f1_dhsqr);
    chk.expect(med_f1 >= 0.8, "median F1 " + fmt(med_f1) + " < 0.8");
    chk.note("median F1 " + fmt(med_f1) + ", all metrics finite across " +
             std::to_string(R) + " replicates");
    add({12, "heavy-tail robustness (Cauchy, hom, N=10000)", chk.ok, chk.detail.str(), 0}, t0);
  }

  // Criterion 13: quantile level tau=0.7.
  {
    auto t0 = Clock::now();
    const CellStats cellD = run_cell(ModelKind::Heteroscedastic, NoiseLaw::Normal, 0.7, 20000,
                                     500, {"dhsqr"}, R, 814004, threads);
    Check chk;
    const double med_l2 = median(cellD.l2_dhsqr);
    const double med_f1 = median(cellD.f1_dhsqr);
    chk.expect(med_l2 <= 0.25, "median l2 " + fmt(med_l2) + " > 0.25");
    chk.expect(med_f1 >= 0.90, "median F1 " + fmt(med_f1) + " < 0.90");
    chk.note("median l2 " + fmt(med_l2) + ", median F1 " + fmt(med_f1) +
             " (reference regime 0.117 / ~0.998)");
    add({13, "quantile-level coverage tau=0.7", chk.ok, chk.detail.str(), 0}, t0);
  }

  return results;
}

bool print_acceptance_report(const std::vector<CriterionResult>& results, std::ostream& os) {
  bool all = true;
  for (const CriterionResult& r : results) {
    all = all && r.passed;
    os << (r.passed ? "[PASS] " : "[FAIL] ") << "criterion " << r.id << ": " << r.name;
    if (!r.detail.empty()) os << " | " << r.detail;
    os << " (" << static_cast<long>(r.seconds * 1000) << " ms)\n";
  }
  os << (all ? "ACCEPTANCE: all criteria passed\n" : "ACCEPTANCE: FAILURES present\n");
  return all;
}

}  // namespace dhsqr
