#include "dhsqr/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dhsqr/parallel.hpp"
#include "dhsqr/rng.hpp"

namespace dhsqr {

namespace fs = std::filesystem;
using nlohmann::json;

void ExperimentConfig::validate() const {
  if (p < 1) throw ConfigError("config: p must be >= 1");
  if (replicates < 1) throw ConfigError("config: replicates must be >= 1");
  if (T < 1) throw ConfigError("config: T must be >= 1");
  if (taus.empty() || Ns.empty() || ns.empty())
    throw ConfigError("config: tau/N/n lists must be nonempty");
  for (double tau : taus)
    if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("config: tau outside (0,1)");
  for (long N : Ns)
    for (long n : ns)
      if (n < 2 || N % n != 0)
        throw ConfigError("config: every N must be divisible by every n");
  if (lambda_mode != "anchored" && lambda_mode != "grid")
    throw ConfigError("config: lambda_mode must be anchored|grid");
  if (!(lambda_floor_c >= 0.0)) throw ConfigError("config: lambda_floor_c must be >= 0");
  if (!(noise_scale >= 0.0)) throw ConfigError("config: noise_scale must be >= 0");
  if (val_mode != "extra" && val_mode != "carve")
    throw ConfigError("config: val_mode must be 'extra' or 'carve'");
  if (val_mode == "extra" && val_size < 1)
    throw ConfigError("config: val_size must be >= 1 in extra mode");
  if (!(val_fraction >= 0.0 && val_fraction < 1.0))
    throw ConfigError("config: val_fraction outside [0,1)");
  if (!(test_fraction >= 0.0 && test_fraction < 1.0))
    throw ConfigError("config: test_fraction outside [0,1)");
  for (const std::string& mth : methods)
    if (mth != "dhsqr" && mth != "pooled" && mth != "avgdc")
      throw ConfigError("config: unknown method '" + mth + "'");
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

PreparedData prepare_shards(const Dataset& data, int m, const SplitSpec& split,
                            std::uint64_t seed) {
  PreparedData out;
  long train_rows = data.X.rows();
  if (split.mode == SplitSpec::Mode::Extra) {
    if (split.extra_rows >= data.X.rows())
      throw ConfigError("prepare_shards: extra validation rows exhaust the dataset");
    train_rows = data.X.rows() - split.extra_rows;
    if (split.extra_rows > 0) {
      out.validation.X = data.X.bottomRows(split.extra_rows);
      out.validation.y = data.y.tail(split.extra_rows);
    }
    out.shards = shard_dataset(data.X.topRows(train_rows), data.y.head(train_rows), m, seed);
  } else {
    out.shards = shard_dataset(data.X, data.y, m, seed);
  }

  DatasetShard& central = out.shards.front();
  const long n = central.rows();
  long n_val = 0;
  if (split.mode == SplitSpec::Mode::Carve && split.val_fraction > 0.0)
    n_val = std::max(
        1L, static_cast<long>(std::llround(split.val_fraction * static_cast<double>(n))));
  const long n_test =
      static_cast<long>(std::llround(split.test_fraction * static_cast<double>(n)));
  if (n_val + n_test >= n) throw ConfigError("prepare_shards: held-out rows exhaust shard 0");

  if (n_val > 0 || n_test > 0) {
    const long n_train = n - n_val - n_test;
    if (n_val > 0) {
      out.validation.X = central.X.bottomRows(n_val);
      out.validation.y = central.y.tail(n_val);
    }
    if (n_test > 0) {
      out.X_test = central.X.middleRows(n_train, n_test);
      out.y_test = central.y.segment(n_train, n_test);
    }
    central.X = central.X.topRows(n_train).eval();
    central.y = central.y.head(n_train).eval();
  }

  out.N_train = 0;
  for (const DatasetShard& s : out.shards) out.N_train += s.rows();
  return out;
}

std::uint64_t replicate_seed(std::uint64_t base_seed, long cell_index, int replicate) {
  const std::uint64_t k = static_cast<std::uint64_t>(cell_index) * 1000003ULL +
                          static_cast<std::uint64_t>(replicate);
  return mix64(mix64(base_seed ^ 0xD1B54A32D192ED03ULL) + k);
}

namespace {

EngineOptions engine_options(const ExperimentConfig& config, double tau, long n_workers_size,
                             long N_train, const CoefficientVector* beta_true, int s_eff) {
  EngineOptions opts;
  opts.tau = tau;
  opts.T = config.T;
  opts.plan.c_h = config.c_h;
  opts.plan.c_b = config.c_b;
  opts.plan.rule = config.bandwidth_rule;
  opts.plan.s_eff = std::max(1, s_eff);
  opts.plan.N = N_train;
  opts.plan.n = n_workers_size;
  opts.schedule.mode = config.lambda_mode == "grid"
                           ? LambdaSchedule::Mode::ValidationGrid
                           : LambdaSchedule::Mode::AnchoredValidation;
  opts.schedule.grid_size = config.lambda_grid.size;
  opts.schedule.grid_decades = config.lambda_grid.decades;
  opts.schedule.one_se_rule = config.one_se_rule;
  opts.schedule.floor_c = config.lambda_floor_c;
  opts.init_grid_size = config.init_grid_size;
  opts.init_grid_decades = config.init_grid_decades;
  opts.init_tol = config.init_tol;
  opts.init_max_iter = config.init_max_iter;
  opts.solver.tol = config.solver_tol;
  opts.solver.max_sweeps = config.solver_max_sweeps;
  opts.grid_max_sweeps = config.grid_max_sweeps;
  opts.penalize_intercept = config.penalize_intercept;
  opts.early_stop = config.early_stop;
  opts.early_stop_tol = config.early_stop_tol;
  opts.beta_true = beta_true;
  return opts;
}

RunRecord base_record(const ExperimentConfig& config, const std::string& method, double tau,
                      long N, long n, std::uint64_t seed) {
  RunRecord rec;
  rec.method = method;
  rec.model = to_string(config.model);
  rec.noise = to_string(config.noise);
  rec.tau = tau;
  rec.N = N;
  rec.n = n;
  rec.m = static_cast<int>(N / n);
  rec.T = config.T;
  rec.seed = seed;
  return rec;
}

void fill_metrics(RunRecord& rec, const CoefficientVector& beta,
                  const CoefficientVector& beta_true, const std::vector<int>& true_support,
                  double zero_tol) {
  rec.l2_error = l2_error(beta, beta_true);
  const SupportMetrics sm = support_metrics(beta, true_support, zero_tol);
  rec.precision = sm.precision;
  rec.recall = sm.recall;
  rec.f1 = sm.f1;
}

double elapsed_ms(const std::chrono::steady_clock::time_point& start) {
  const auto d = std::chrono::steady_clock::now() - start;
  return std::chrono::duration<double, std::milli>(d).count();
}

}  // namespace

ReplicateOutcome run_replicate(const ExperimentConfig& config, double tau, long N, long n,
                               long cell_index, int replicate) {
  config.validate();
  const std::uint64_t seed = replicate_seed(config.seed, cell_index, replicate);
  const int m = static_cast<int>(N / n);

  ModelSpec spec;
  spec.model = config.model;
  spec.noise = config.noise;
  spec.p = config.p;
  spec.ar_rho = config.ar_rho;
  spec.beta_base =
      config.beta_base.size() == config.p + 1 ? config.beta_base : ModelSpec::default_beta(config.p);

  ReplicateOutcome out;
  out.beta_true = true_quantile_coeffs(spec, tau);
  const std::vector<int> true_support = support_of(out.beta_true, 1e-12);
  const int s_eff = static_cast<int>(true_support.size());

  SplitSpec split;
  split.mode = config.val_mode == "extra" ? SplitSpec::Mode::Extra : SplitSpec::Mode::Carve;
  split.extra_rows = config.val_size;
  split.val_fraction = config.val_fraction;
  split.test_fraction = config.test_fraction;
  const long n_rows = split.mode == SplitSpec::Mode::Extra ? N + config.val_size : N;
  const Dataset data = gen_dataset(spec, n_rows, seed, config.noise_scale);
  PreparedData prepared = prepare_shards(data, m, split, seed);

  for (const std::string& method : config.methods) {
    RunRecord rec = base_record(config, method, tau, N, n, seed);
    const auto start = std::chrono::steady_clock::now();
    try {
      if (method == "dhsqr") {
        EngineOptions opts =
            engine_options(config, tau, n, prepared.N_train, &out.beta_true, s_eff);
        opts.seed = seed;
        RunResult run = run_dhsqr(prepared.shards, prepared.validation, opts);
        rec.runtime_ms = elapsed_ms(start);
        fill_metrics(rec, run.final_beta(), out.beta_true, true_support, config.zero_tol);
        rec.comm_values = run.ledger.total_values();
        rec.converged = run.abort_reason.empty() && !run.traces.empty() &&
                        run.traces.back().solver.converged;
        out.initial_l2 = (run.beta_initial - out.beta_true).norm();
        out.bandwidth_inverted = run.bandwidth_inverted;
        out.traces[method] = run.traces;
        out.betas[method] = run.final_beta();
      } else if (method == "pooled") {
        Matrix X_all(prepared.N_train, config.p + 1);
        Vector y_all(prepared.N_train);
        long at = 0;
        for (const DatasetShard& s : prepared.shards) {
          X_all.middleRows(at, s.rows()) = s.X;
          y_all.segment(at, s.rows()) = s.y;
          at += s.rows();
        }
        EngineOptions opts =
            engine_options(config, tau, prepared.N_train, prepared.N_train, &out.beta_true, s_eff);
        opts.seed = seed;
        BaselineResult res = pooled_dhsqr(X_all, y_all, prepared.validation, opts);
        rec.runtime_ms = elapsed_ms(start);
        fill_metrics(rec, res.beta, out.beta_true, true_support, config.zero_tol);
        rec.comm_values = res.comm_values;
        rec.converged = res.engine.abort_reason.empty() && !res.engine.traces.empty() &&
                        res.engine.traces.back().solver.converged;
        out.traces[method] = res.engine.traces;
        out.betas[method] = res.beta;
      } else {  // avgdc
        AvgDcOptions opts;
        opts.tau = tau;
        opts.s_eff = s_eff;
        opts.init_grid_size = config.init_grid_size;
        opts.init_grid_decades = config.init_grid_decades;
        opts.init_tol = config.init_tol;
        opts.init_max_iter = config.init_max_iter;
        opts.penalize_intercept = config.penalize_intercept;
        BaselineResult res = avg_dc(prepared.shards, opts);
        rec.runtime_ms = elapsed_ms(start);
        fill_metrics(rec, res.beta, out.beta_true, true_support, config.zero_tol);
        rec.comm_values = res.comm_values;
        rec.converged = res.failed_machines.empty();
        out.betas[method] = res.beta;
      }
    } catch (const std::exception&) {
      rec.runtime_ms = elapsed_ms(start);
      rec.converged = false;
      rec.l2_error = std::numeric_limits<double>::quiet_NaN();
    }
    out.records.push_back(std::move(rec));
  }
  return out;
}

namespace {

const char* kRunsHeader =
    "method,model,noise,tau,N,n,m,T,seed,l2_error,precision,recall,f1,runtime_ms,"
    "comm_values,converged";

std::string record_row(const RunRecord& r) {
  std::ostringstream os;
  os << r.method << ',' << r.model << ',' << r.noise << ',' << format_double(r.tau) << ','
     << r.N << ',' << r.n << ',' << r.m << ',' << r.T << ',' << r.seed << ','
     << format_double(r.l2_error) << ',' << format_double(r.precision) << ','
     << format_double(r.recall) << ',' << format_double(r.f1) << ','
     << format_double(r.runtime_ms) << ',' << r.comm_values << ','
     << (r.converged ? 1 : 0);
  return os.str();
}

void write_trace_csv(const std::string& path, const std::vector<IterationTrace>& traces,
                     double initial_l2) {
  std::ofstream f(path);
  f << "t,lambda,l2_error,validation_loss,kkt_residual,sweeps,converged\n";
  f << "0,," << format_double(initial_l2) << ",,,,\n";
  for (const IterationTrace& tr : traces) {
    f << tr.t << ',' << format_double(tr.lambda_used) << ','
      << format_double(tr.l2_error_vs_truth) << ',' << format_double(tr.validation_loss)
      << ',' << format_double(tr.solver.kkt_residual) << ',' << tr.solver.iterations << ','
      << (tr.solver.converged ? 1 : 0) << '\n';
  }
}

struct CellKey {
  double tau;
  long N;
  long n;
};

struct Accumulator {
  std::vector<double> l2, precision, recall, f1, runtime;
};

std::string trim_float(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

std::vector<RunRecord> run_experiment_grid(const ExperimentConfig& config) {
  config.validate();
  fs::create_directories(config.out_dir);

  struct Item {
    long cell_index;
    int ti, Ni, ni, rep;
  };
  std::vector<Item> items;
  long cell_index = 0;
  for (std::size_t ti = 0; ti < config.taus.size(); ++ti)
    for (std::size_t Ni = 0; Ni < config.Ns.size(); ++Ni)
      for (std::size_t ni = 0; ni < config.ns.size(); ++ni) {
        for (int rep = 0; rep < config.replicates; ++rep)
          items.push_back({cell_index, static_cast<int>(ti), static_cast<int>(Ni),
                           static_cast<int>(ni), rep});
        ++cell_index;
      }

  const int pool = config.threads > 0 ? config.threads : default_thread_count();
  std::vector<ReplicateOutcome> outcomes(items.size());
  parallel_for(static_cast<long>(items.size()), pool, [&](long i) {
    const Item& it = items[static_cast<std::size_t>(i)];
    outcomes[static_cast<std::size_t>(i)] =
        run_replicate(config, config.taus[static_cast<std::size_t>(it.ti)],
                      config.Ns[static_cast<std::size_t>(it.Ni)],
                      config.ns[static_cast<std::size_t>(it.ni)], it.cell_index, it.rep);
  });

  // Long CSV, rows in (cell, replicate, method) order.
  std::vector<RunRecord> records;
  std::ofstream runs(fs::path(config.out_dir) / "runs.csv");
  runs << kRunsHeader << '\n';
  for (std::size_t i = 0; i < items.size(); ++i) {
    for (const RunRecord& rec : outcomes[i].records) {
      runs << record_row(rec) << '\n';
      records.push_back(rec);
    }
    if (config.write_traces) {
      const Item& it = items[i];
      for (const auto& [method, traces] : outcomes[i].traces) {
        std::ostringstream name;
        name << "trace_" << method << "_tau" << trim_float(config.taus[it.ti]) << "_N"
             << config.Ns[it.Ni] << "_n" << config.ns[it.ni] << "_rep" << it.rep << ".csv";
        write_trace_csv((fs::path(config.out_dir) / name.str()).string(), traces,
                        outcomes[i].initial_l2);
      }
    }
  }
  runs.close();

  // Summary CSV: mean and sd per (cell, method).
  std::map<std::string, Accumulator> cells;
  std::vector<std::string> cell_order;
  for (const RunRecord& rec : records) {
    std::ostringstream key;
    key << rec.method << ',' << trim_float(rec.tau) << ',' << rec.N << ',' << rec.n;
    auto [it, inserted] = cells.try_emplace(key.str());
    if (inserted) cell_order.push_back(key.str());
    it->second.l2.push_back(rec.l2_error);
    it->second.precision.push_back(rec.precision);
    it->second.recall.push_back(rec.recall);
    it->second.f1.push_back(rec.f1);
    it->second.runtime.push_back(rec.runtime_ms);
  }
  // cell_order comes from record order, which is already deterministic.
  auto mean_of = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  auto sd_of = [&](const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double mu = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - mu) * (x - mu);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
  };
  std::ofstream summary(fs::path(config.out_dir) / "summary.csv");
  summary << "method,tau,N,n,replicates,l2_mean,l2_sd,precision_mean,precision_sd,"
             "recall_mean,recall_sd,f1_mean,f1_sd,runtime_ms_mean,runtime_ms_sd\n";
  for (const std::string& key : cell_order) {
    const Accumulator& acc = cells.at(key);
    summary << key << ',' << acc.l2.size() << ',' << format_double(mean_of(acc.l2)) << ','
            << format_double(sd_of(acc.l2)) << ',' << format_double(mean_of(acc.precision))
            << ',' << format_double(sd_of(acc.precision)) << ','
            << format_double(mean_of(acc.recall)) << ',' << format_double(sd_of(acc.recall))
            << ',' << format_double(mean_of(acc.f1)) << ',' << format_double(sd_of(acc.f1))
            << ',' << format_double(mean_of(acc.runtime)) << ','
            << format_double(sd_of(acc.runtime)) << '\n';
  }
  summary.close();

  // Metadata: config echo plus the fixed RNG algorithm.
  json meta;
  meta["version"] = kVersion;
  meta["rng"] = "splitmix64 counter streams; normal/t3/cauchy by inverse CDF";
  meta["config"] = {
      {"model", to_string(config.model)},
      {"noise", to_string(config.noise)},
      {"p", config.p},
      {"ar_rho", config.ar_rho},
      {"taus", config.taus},
      {"Ns", config.Ns},
      {"ns", config.ns},
      {"T", config.T},
      {"replicates", config.replicates},
      {"seed", config.seed},
      {"methods", config.methods},
      {"c_h", config.c_h},
      {"c_b", config.c_b},
      {"bandwidth_rule",
       config.bandwidth_rule == BandwidthRule::Simulation ? "simulation" : "theorem"},
      {"lambda_mode", config.lambda_mode},
      {"lambda_floor_c", config.lambda_floor_c},
      {"lambda_grid_size", config.lambda_grid.size},
      {"lambda_grid_decades", config.lambda_grid.decades},
      {"val_mode", config.val_mode},
      {"val_size", config.val_size},
      {"val_fraction", config.val_fraction},
      {"one_se_rule", config.one_se_rule},
      {"test_fraction", config.test_fraction},
      {"zero_tol", config.zero_tol},
      {"penalize_intercept", config.penalize_intercept},
  };
  std::ofstream meta_out(fs::path(config.out_dir) / "meta.json");
  meta_out << meta.dump(2) << '\n';

  return records;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file: " + path);
  json j;
  f >> j;

  ExperimentConfig config;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };

  if (j.contains("model")) {
    const std::string v = j.at("model").get<std::string>();
    if (v == "hom") config.model = ModelKind::Homoscedastic;
    else if (v == "het") config.model = ModelKind::Heteroscedastic;
    else throw ConfigError("config: model must be 'hom' or 'het'");
  }
  if (j.contains("noise")) {
    const std::string v = j.at("noise").get<std::string>();
    if (v == "normal") config.noise = NoiseLaw::Normal;
    else if (v == "t3") config.noise = NoiseLaw::StudentT3;
    else if (v == "cauchy") config.noise = NoiseLaw::Cauchy;
    else throw ConfigError("config: noise must be normal|t3|cauchy");
  }
  get("p", config.p);
  get("ar_rho", config.ar_rho);
  get("noise_scale", config.noise_scale);
  get("taus", config.taus);
  get("Ns", config.Ns);
  get("ns", config.ns);
  get("T", config.T);
  get("replicates", config.replicates);
  get("seed", config.seed);
  get("methods", config.methods);
  get("c_h", config.c_h);
  get("c_b", config.c_b);
  if (j.contains("bandwidth_rule")) {
    const std::string v = j.at("bandwidth_rule").get<std::string>();
    if (v == "simulation") config.bandwidth_rule = BandwidthRule::Simulation;
    else if (v == "theorem") config.bandwidth_rule = BandwidthRule::Theorem;
    else throw ConfigError("config: bandwidth_rule must be simulation|theorem");
  }
  get("lambda_mode", config.lambda_mode);
  get("lambda_floor_c", config.lambda_floor_c);
  if (config.lambda_mode != "anchored" && config.lambda_mode != "grid")
    throw ConfigError("config: lambda_mode must be anchored|grid");
  if (j.contains("lambda_grid")) {
    const json& g = j.at("lambda_grid");
    if (g.contains("size")) config.lambda_grid.size = g.at("size").get<int>();
    if (g.contains("decades")) config.lambda_grid.decades = g.at("decades").get<double>();
  }
  get("init_grid_size", config.init_grid_size);
  get("init_grid_decades", config.init_grid_decades);
  get("init_tol", config.init_tol);
  get("init_max_iter", config.init_max_iter);
  get("solver_tol", config.solver_tol);
  get("solver_max_sweeps", config.solver_max_sweeps);
  get("grid_max_sweeps", config.grid_max_sweeps);
  get("penalize_intercept", config.penalize_intercept);
  get("early_stop", config.early_stop);
  get("early_stop_tol", config.early_stop_tol);
  get("val_mode", config.val_mode);
  get("val_size", config.val_size);
  get("val_fraction", config.val_fraction);
  get("one_se_rule", config.one_se_rule);
  get("test_fraction", config.test_fraction);
  get("zero_tol", config.zero_tol);
  get("out_dir", config.out_dir);
  get("write_traces", config.write_traces);
  get("threads", config.threads);
  if (j.contains("beta_base")) {
    const auto vals = j.at("beta_base").get<std::vector<double>>();
    config.beta_base = Eigen::Map<const Vector>(vals.data(), static_cast<long>(vals.size()));
  }

  config.validate();
  return config;
}

namespace csv {

int Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  throw ConfigError("csv: missing column " + name);
}

Table read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("csv: cannot open " + path);
  Table t;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream is(s);
    while (std::getline(is, field, ',')) out.push_back(field);
    if (!s.empty() && s.back() == ',') out.emplace_back();
    return out;
  };
  if (std::getline(f, line)) t.header = split(line);
  while (std::getline(f, line))
    if (!line.empty()) t.rows.push_back(split(line));
  return t;
}

}  // namespace csv

}  // namespace dhsqr
