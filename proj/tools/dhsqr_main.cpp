#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dhsqr/acceptance.hpp"
#include "dhsqr/experiment.hpp"
#include "dhsqr/parallel.hpp"

namespace {

int cmd_run(const std::string& config_path) {
  const dhsqr::ExperimentConfig config = dhsqr::load_config(config_path);
  const auto records = dhsqr::run_experiment_grid(config);
  long failed = 0;
  for (const auto& rec : records)
    if (!rec.converged) ++failed;
  std::cout << records.size() << " runs written to " << config.out_dir << "/runs.csv";
  if (failed > 0) std::cout << " (" << failed << " unconverged)";
  std::cout << "\n";
  return failed == 0 ? 0 : 1;
}

int cmd_demo(const std::string& model, const std::string& noise, double tau, long N, long n,
             int T, std::uint64_t seed, bool one_se, const std::string& lambda_mode,
             double floor_c) {
  dhsqr::ExperimentConfig config;
  config.model = model == "het" ? dhsqr::ModelKind::Heteroscedastic
                                : dhsqr::ModelKind::Homoscedastic;
  if (noise == "normal") config.noise = dhsqr::NoiseLaw::Normal;
  else if (noise == "t3") config.noise = dhsqr::NoiseLaw::StudentT3;
  else config.noise = dhsqr::NoiseLaw::Cauchy;
  config.taus = {tau};
  config.Ns = {N};
  config.ns = {n};
  config.T = T;
  config.seed = seed;
  config.replicates = 1;
  config.methods = {"dhsqr"};
  config.one_se_rule = one_se;
  config.lambda_mode = lambda_mode;
  config.lambda_floor_c = floor_c;
  config.validate();

  std::cout << "demo: model=" << model << " noise=" << noise << " tau=" << tau << " N=" << N
            << " n=" << n << " m=" << N / n << " T=" << T << " seed=" << seed << "\n";
  const dhsqr::ReplicateOutcome out = dhsqr::run_replicate(config, tau, N, n, 0, 0);

  std::cout << "  initial estimator l2 error: " << out.initial_l2 << "\n";
  if (out.bandwidth_inverted)
    std::cout << "  note: local bandwidth b < global bandwidth h at these sizes\n";
  const auto it = out.traces.find("dhsqr");
  if (it != out.traces.end()) {
    for (const auto& tr : it->second)
      std::cout << "  t=" << tr.t << "  lambda=" << tr.lambda_used
                << "  l2=" << tr.l2_error_vs_truth << "  sweeps=" << tr.solver.iterations
                << (tr.solver.converged ? "" : "  [unconverged]")
                << (tr.kept_previous ? "  [kept previous]" : "") << "\n";
  }
  for (const auto& rec : out.records) {
    std::cout << rec.method << ": l2=" << rec.l2_error << " precision=" << rec.precision
              << " recall=" << rec.recall << " f1=" << rec.f1
              << " comm_values=" << rec.comm_values << " runtime_ms=" << rec.runtime_ms
              << "\n";
  }
  return 0;
}

int cmd_verify(bool fast_only, bool repro_only, int replicates, const std::string& scratch) {
  dhsqr::AcceptanceOptions opts;
  opts.fast_only = fast_only;
  opts.repro_only = repro_only;
  opts.replicates = replicates;
  opts.scratch_dir = scratch;
  const auto results = dhsqr::run_acceptance(opts);
  return dhsqr::print_acceptance_report(results, std::cout) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed high-dimensional sparse quantile regression engine"};
  app.require_subcommand(1);

  std::string config_path;
  CLI::App* run = app.add_subcommand("run", "Run an experiment grid from a JSON config");
  run->add_option("--config", config_path, "Path to the JSON config")->required();

  std::string model = "hom", noise = "normal";
  double tau = 0.5;
  long N = 5000, n = 500;
  int T = 10;
  std::uint64_t seed = 1;
  CLI::App* demo = app.add_subcommand("demo", "Single replicate with per-iteration output");
  demo->add_option("--model", model, "hom|het")->check(CLI::IsMember({"hom", "het"}));
  demo->add_option("--noise", noise, "normal|t3|cauchy")
      ->check(CLI::IsMember({"normal", "t3", "cauchy"}));
  demo->add_option("--tau", tau, "quantile level in (0,1)");
  demo->add_option("--N", N, "total sample size");
  demo->add_option("--n", n, "local sample size (must divide N)");
  demo->add_option("--T", T, "iterations");
  demo->add_option("--seed", seed, "rng seed");
  bool demo_one_se = false;
  demo->add_flag("--one-se", demo_one_se, "paired one-SE rule for lambda selection");
  std::string demo_lambda_mode = "anchored";
  demo->add_option("--lambda-mode", demo_lambda_mode, "anchored|grid")
      ->check(CLI::IsMember({"anchored", "grid"}));
  double demo_floor_c = 1.0;
  demo->add_option("--floor-c", demo_floor_c, "lambda floor constant (0 disables)");

  bool fast_only = false, repro_only = false;
  int replicates = 10;
  std::string scratch = "acceptance_scratch";
  CLI::App* verify = app.add_subcommand("verify", "Run the acceptance criteria");
  verify->add_flag("--fast", fast_only, "property/oracle criteria only (1-7)");
  verify->add_flag("--repro", repro_only, "reproduction criteria only (8-13)");
  verify->add_option("--replicates", replicates, "replicates for criteria 8-13");
  verify->add_option("--scratch", scratch, "scratch directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path);
    if (demo->parsed())
      return cmd_demo(model, noise, tau, N, n, T, seed, demo_one_se, demo_lambda_mode,
                      demo_floor_c);
    return cmd_verify(fast_only, repro_only, replicates, scratch);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
