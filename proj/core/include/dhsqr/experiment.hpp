#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dhsqr/baselines.hpp"
#include "dhsqr/datagen.hpp"
#include "dhsqr/dist_engine.hpp"
#include "dhsqr/metrics.hpp"
#include "dhsqr/types.hpp"

namespace dhsqr {

struct LambdaGridParams {
  int size = 30;
  double decades = 3.0;
};

// Full grid specification: one (model, noise) pair crossed over tau, N, n.
// N must be divisible by n in every combination; m = N / n.
struct ExperimentConfig {
  ModelKind model = ModelKind::Homoscedastic;
  NoiseLaw noise = NoiseLaw::Normal;
  int p = 500;
  double ar_rho = 0.5;
  double noise_scale = 1.0;  // test hook; 0 makes y = X beta exactly
  CoefficientVector beta_base;  // empty -> default (1,1,2,3,4,5,0,...)

  std::vector<double> taus = {0.5};
  std::vector<long> Ns = {20000};
  std::vector<long> ns = {500};
  int T = 10;
  int replicates = 1;
  std::uint64_t seed = 1;

  std::vector<std::string> methods = {"dhsqr"};  // dhsqr | pooled | avgdc

  double c_h = 5.0;
  double c_b = 0.53;
  BandwidthRule bandwidth_rule = BandwidthRule::Simulation;
  std::string lambda_mode = "anchored";  // anchored | grid
  double lambda_floor_c = 1.0;           // floor_c for validated candidates
  LambdaGridParams lambda_grid;
  int init_grid_size = 12;
  double init_grid_decades = 3.0;
  double init_tol = 1e-5;
  long init_max_iter = 1200;
  double solver_tol = 1e-7;
  long solver_max_sweeps = 10000;
  long grid_max_sweeps = 600;
  bool penalize_intercept = true;
  bool early_stop = false;
  double early_stop_tol = 1e-8;

  // Coordinator-held validation set for lambda selection. "extra" draws
  // val_size dedicated rows alongside the training data (the real-data
  // protocol's scale); "carve" holds out val_fraction of shard 0 instead.
  std::string val_mode = "extra";
  long val_size = 300;
  double val_fraction = 0.10;
  bool one_se_rule = false;
  double test_fraction = 0.0;  // test rows carved from shard 0
  double zero_tol = 1e-8;

  std::string out_dir = "results";
  bool write_traces = true;
  int threads = 0;  // 0 -> DHSQR_THREADS or hardware concurrency

  void validate() const;
};

// One long-format CSV row.
struct RunRecord {
  std::string method;
  std::string model;
  std::string noise;
  double tau = 0.0;
  long N = 0;
  long n = 0;
  int m = 0;
  int T = 0;
  std::uint64_t seed = 0;
  double l2_error = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double runtime_ms = 0.0;
  long comm_values = 0;
  bool converged = false;
};

// Training shards plus the coordinator's held-out splits.
struct PreparedData {
  std::vector<DatasetShard> shards;  // shard 0 trimmed when rows are carved
  ValidationSet validation;
  Matrix X_test;
  Vector y_test;
  long N_train = 0;  // rows actually used for training statistics
};

struct SplitSpec {
  enum class Mode { Extra, Carve };
  Mode mode = Mode::Extra;
  long extra_rows = 300;       // Extra: trailing rows of the dataset
  double val_fraction = 0.10;  // Carve: tail fraction of shard 0
  double test_fraction = 0.0;  // carved from shard 0 in both modes
};

// Extra mode expects data to carry split.extra_rows validation rows after
// the first m*n training rows.
PreparedData prepare_shards(const Dataset& data, int m, const SplitSpec& split,
                            std::uint64_t seed);

struct ReplicateOutcome {
  std::vector<RunRecord> records;  // one per requested method
  std::map<std::string, std::vector<IterationTrace>> traces;
  std::map<std::string, CoefficientVector> betas;
  CoefficientVector beta_true;
  double initial_l2 = -1.0;  // DHSQR initial estimator error
  bool bandwidth_inverted = false;
};

// Deterministic per-replicate seed derivation.
std::uint64_t replicate_seed(std::uint64_t base_seed, long cell_index, int replicate);

ReplicateOutcome run_replicate(const ExperimentConfig& config, double tau, long N, long n,
                               long cell_index, int replicate);

// Runs every cell and replicate, writes runs.csv, summary.csv, meta.json
// and per-replicate trace CSVs under config.out_dir, and returns the
// records in (cell, replicate, method) order. Failures inside a cell are
// recorded (converged = false) and the grid continues.
std::vector<RunRecord> run_experiment_grid(const ExperimentConfig& config);

ExperimentConfig load_config(const std::string& path);

// float64 -> shortest text that round-trips exactly (17 significant digits).
std::string format_double(double v);

namespace csv {
// Minimal reader for the files this module writes: header + comma rows,
// no quoting (none of our fields contain commas).
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  int column(const std::string& name) const;
};
Table read_file(const std::string& path);
}  // namespace csv

}  // namespace dhsqr
