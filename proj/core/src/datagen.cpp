#include "dhsqr/datagen.hpp"

#include <cmath>
#include <numeric>

#include "dhsqr/rng.hpp"

namespace dhsqr {

namespace {
// Fixed stream ids so each purpose has its own counter-based substream.
constexpr std::uint64_t kStreamCovariates = 1;
constexpr std::uint64_t kStreamNoise = 2;
constexpr std::uint64_t kStreamShuffle = 3;
}  // namespace

CoefficientVector ModelSpec::default_beta(int p) {
  CoefficientVector beta = CoefficientVector::Zero(p + 1);
  const double head[6] = {1, 1, 2, 3, 4, 5};
  for (int j = 0; j <= 5 && j <= p; ++j) beta[j] = head[j];
  return beta;
}

void ModelSpec::validate() const {
  if (p < 1) throw ConfigError("ModelSpec: p must be >= 1");
  if (!(ar_rho > 0.0 && ar_rho < 1.0))
    throw ConfigError("ModelSpec: ar_rho must lie strictly inside (0,1)");
  if (beta_base.size() != p + 1)
    throw ConfigError("ModelSpec: beta_base must have length p+1");
}

Matrix gen_covariates(long n, int p, double ar_rho, std::uint64_t seed) {
  if (n < 1 || p < 1) throw ConfigError("gen_covariates: need n >= 1 and p >= 1");
  if (!(ar_rho > 0.0 && ar_rho < 1.0))
    throw ConfigError("gen_covariates: ar_rho must lie strictly inside (0,1)");

  Matrix X(n, p + 1);
  X.col(0).setOnes();
  Rng rng(seed, kStreamCovariates);
  const double innov = std::sqrt(1.0 - ar_rho * ar_rho);
  for (long i = 0; i < n; ++i) {
    double prev = rng.next_normal();
    X(i, 1) = prev;
    for (int j = 2; j <= p; ++j) {
      prev = ar_rho * prev + innov * rng.next_normal();
      X(i, j) = prev;
    }
  }
  return X;
}

double noise_quantile(NoiseLaw noise, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw DomainError("noise_quantile: tau outside (0,1)");
  switch (noise) {
    case NoiseLaw::Normal: return normal_quantile(tau);
    case NoiseLaw::StudentT3: return student_t3_quantile(tau);
    default: return cauchy_quantile(tau);
  }
}

CoefficientVector true_quantile_coeffs(const ModelSpec& spec, double tau) {
  spec.validate();
  if (!(tau > 0.0 && tau < 1.0)) throw DomainError("true_quantile_coeffs: tau outside (0,1)");
  const double q = noise_quantile(spec.noise, tau);
  CoefficientVector beta = spec.beta_base;
  beta[0] += q;
  if (spec.model == ModelKind::Heteroscedastic && spec.p >= 1) {
    beta[1] += 0.4 * q;
    if (beta[1] == 0.0 && spec.beta_base[1] != 0.0)
      throw ConfigError("true_quantile_coeffs: x1 adjustment cancels a true coefficient");
  }
  return beta;
}

Dataset gen_dataset(const ModelSpec& spec, long n_total, std::uint64_t seed,
                    double noise_scale) {
  spec.validate();
  if (n_total < 1) throw ConfigError("gen_dataset: n_total must be >= 1");

  Dataset data;
  data.X = gen_covariates(n_total, spec.p, spec.ar_rho, seed);
  data.y = data.X * spec.beta_base;

  Rng rng(seed, kStreamNoise);
  for (long i = 0; i < n_total; ++i) {
    double eps;
    switch (spec.noise) {
      case NoiseLaw::Normal: eps = rng.next_normal(); break;
      case NoiseLaw::StudentT3: eps = rng.next_student_t3(); break;
      default: eps = rng.next_cauchy(); break;
    }
    eps *= noise_scale;
    if (spec.model == ModelKind::Heteroscedastic)
      eps *= 1.0 + 0.4 * data.X(i, 1);  // can be negative; applied literally
    data.y[i] += eps;
  }
  return data;
}

std::vector<DatasetShard> shard_dataset(const Matrix& X, const Vector& y, int m,
                                        std::uint64_t seed) {
  const long n_total = X.rows();
  if (m < 1) throw ConfigError("shard_dataset: m must be >= 1");
  if (n_total % m != 0)
    throw ConfigError("shard_dataset: machine count must divide the sample size");

  std::vector<long> order(static_cast<std::size_t>(n_total));
  std::iota(order.begin(), order.end(), 0L);
  Rng rng(seed, kStreamShuffle);
  for (long i = n_total - 1; i > 0; --i) {
    const long j = static_cast<long>(rng.next_u64() % static_cast<std::uint64_t>(i + 1));
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }

  const long n = n_total / m;
  std::vector<DatasetShard> shards(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) {
    DatasetShard& s = shards[static_cast<std::size_t>(k)];
    s.shard_id = k;
    s.X.resize(n, X.cols());
    s.y.resize(n);
    for (long r = 0; r < n; ++r) {
      const long src = order[static_cast<std::size_t>(k * n + r)];
      s.X.row(r) = X.row(src);
      s.y[r] = y[src];
    }
  }
  return shards;
}

std::vector<int> support_of(const CoefficientVector& beta, double zero_tol) {
  std::vector<int> s;
  for (Eigen::Index j = 1; j < beta.size(); ++j)
    if (std::abs(beta[j]) > zero_tol) s.push_back(static_cast<int>(j));
  return s;
}

}  // namespace dhsqr
