#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dhsqr/baselines.hpp"
#include "dhsqr/datagen.hpp"
#include "dhsqr/experiment.hpp"
#include "dhsqr/kernel.hpp"
#include "dhsqr/metrics.hpp"

using namespace dhsqr;

TEST_CASE("avg_dc with one machine equals its own local fit") {
  ModelSpec spec;
  spec.p = 10;
  spec.beta_base = ModelSpec::default_beta(spec.p);
  const Dataset d = gen_dataset(spec, 100, 31);
  std::vector<DatasetShard> shards{DatasetShard{d.X, d.y, 0}};

  AvgDcOptions opts;
  opts.s_eff = 5;
  const BaselineResult res = avg_dc(shards, opts);
  REQUIRE(res.per_machine_betas.size() == 1);
  CHECK((res.beta.array() == res.per_machine_betas[0].array()).all());
  CHECK(res.comm_values == 0);
}

TEST_CASE("avg_dc over identical machines equals either fit") {
  ModelSpec spec;
  spec.p = 8;
  spec.beta_base = ModelSpec::default_beta(spec.p);
  const Dataset d = gen_dataset(spec, 120, 32);
  DatasetShard a{d.X, d.y, 0};
  DatasetShard b{d.X, d.y, 1};

  AvgDcOptions opts;
  opts.s_eff = 5;
  opts.lambda0 = 0.05;  // fixed so both machines solve the same problem
  const BaselineResult res = avg_dc({a, b}, opts);
  CHECK((res.per_machine_betas[0].array() == res.per_machine_betas[1].array()).all());
  CHECK((res.beta - res.per_machine_betas[0]).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(res.comm_values == 9);  // one (p+1)-vector from the non-central machine
}

TEST_CASE("avg_dc goes dense while the local fits are sparse-ish") {
  ModelSpec spec;
  spec.p = 60;
  spec.beta_base = ModelSpec::default_beta(spec.p);
  const Dataset d = gen_dataset(spec, 8 * 150, 33);
  const auto shards = shard_dataset(d.X, d.y, 8, 33);

  AvgDcOptions opts;
  opts.s_eff = 5;
  const BaselineResult res = avg_dc(shards, opts);
  const std::size_t avg_support = support_of(res.beta, 1e-8).size();
  // Averaging unions the per-machine supports; it should far exceed s = 5.
  CHECK(avg_support > 10);
}

TEST_CASE("pooled delegation is bit-identical to the single-shard engine run") {
  ModelSpec spec;
  spec.p = 15;
  spec.beta_base = ModelSpec::default_beta(spec.p);
  const Dataset d = gen_dataset(spec, 360, 34);
  SplitSpec split;
  split.mode = SplitSpec::Mode::Extra;
  split.extra_rows = 60;
  const PreparedData prep = prepare_shards(d, 1, split, 7);

  EngineOptions opts;
  opts.tau = 0.5;
  opts.T = 4;
  opts.plan.s_eff = 5;
  opts.plan.N = prep.N_train;
  opts.plan.n = prep.N_train;
  const double h = global_bandwidth(opts.plan);
  opts.h_override = h;
  opts.b_override = h;

  const RunResult direct = run_dhsqr(prep.shards, prep.validation, opts);
  const BaselineResult pooled =
      pooled_dhsqr(prep.shards[0].X, prep.shards[0].y, prep.validation, opts);

  REQUIRE(direct.traces.size() == pooled.engine.traces.size());
  for (std::size_t t = 0; t < direct.traces.size(); ++t)
    CHECK((direct.traces[t].beta.array() == pooled.engine.traces[t].beta.array()).all());
  CHECK(pooled.comm_values == 0);
}

TEST_CASE("pooled fit on zero-noise data is nearly exact") {
  ModelSpec spec;
  spec.p = 20;
  spec.beta_base = ModelSpec::default_beta(spec.p);
  const Dataset d = gen_dataset(spec, 2100, 35, 0.0);
  SplitSpec split;
  split.mode = SplitSpec::Mode::Extra;
  split.extra_rows = 100;
  const PreparedData prep = prepare_shards(d, 1, split, 3);

  EngineOptions opts;
  opts.tau = 0.5;
  opts.T = 5;
  opts.plan.s_eff = 5;
  const BaselineResult pooled =
      pooled_dhsqr(prep.shards[0].X, prep.shards[0].y, prep.validation, opts);
  CHECK(l2_error(pooled.beta, spec.beta_base) <= 1e-2);
}
