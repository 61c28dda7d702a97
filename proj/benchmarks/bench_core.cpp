#include <benchmark/benchmark.h>

#include "dhsqr/datagen.hpp"
#include "dhsqr/qp_lasso.hpp"
#include "dhsqr/qr_init.hpp"
#include "dhsqr/transform.hpp"

namespace {

using namespace dhsqr;

DatasetShard make_shard(long n, int p, std::uint64_t seed) {
  ModelSpec spec;
  spec.p = p;
  spec.beta_base = ModelSpec::default_beta(p);
  const Dataset data = gen_dataset(spec, n, seed);
  DatasetShard shard;
  shard.X = data.X;
  shard.y = data.y;
  return shard;
}

void BM_shard_aggregates(benchmark::State& state) {
  const long n = state.range(0);
  const int p = static_cast<int>(state.range(1));
  const DatasetShard shard = make_shard(n, p, 11);
  const CoefficientVector beta = ModelSpec::default_beta(p);
  for (auto _ : state) {
    auto agg = shard_aggregates(shard, beta, 0.5, 1.5, false);
    benchmark::DoNotOptimize(agg.z);
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_shard_aggregates)->Args({500, 500})->Args({2000, 500})->Args({500, 100});

void BM_central_gram(benchmark::State& state) {
  const long n = state.range(0);
  const int p = static_cast<int>(state.range(1));
  const DatasetShard shard = make_shard(n, p, 12);
  const CoefficientVector beta = ModelSpec::default_beta(p);
  for (auto _ : state) {
    auto agg = shard_aggregates(shard, beta, 0.5, 0.21, true);
    benchmark::DoNotOptimize(agg.G);
  }
}
BENCHMARK(BM_central_gram)->Args({450, 500})->Args({2000, 500});

void BM_cd_solve(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const DatasetShard shard = make_shard(2 * p, p, 13);
  const CoefficientVector beta = ModelSpec::default_beta(p);
  const PseudoAggregates agg = shard_aggregates(shard, beta, 0.5, 0.5, true);
  PenalizedQuadratic q{agg.G, agg.z, 0.05, true};
  const CoefficientVector zero = CoefficientVector::Zero(p + 1);
  for (auto _ : state) {
    auto rep = solve(q, zero);
    benchmark::DoNotOptimize(rep.beta);
  }
}
BENCHMARK(BM_cd_solve)->Arg(100)->Arg(500);

void BM_smoothed_fit(benchmark::State& state) {
  const long n = state.range(0);
  const int p = static_cast<int>(state.range(1));
  const DatasetShard shard = make_shard(n, p, 14);
  SmoothedQRProblem prob;
  prob.shard = &shard;
  prob.tau = 0.5;
  prob.lambda0 = 0.02;
  prob.h0 = default_h0(n, 5);
  for (auto _ : state) {
    auto rep = fit_initial(prob, 1e-5, 400);
    benchmark::DoNotOptimize(rep.beta);
  }
}
BENCHMARK(BM_smoothed_fit)->Args({450, 500});

}  // namespace

BENCHMARK_MAIN();
