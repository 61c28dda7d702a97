#pragma once

#include <cstdint>
#include <vector>

#include "dhsqr/types.hpp"

namespace dhsqr {

// Synthetic design for the two simulation models: AR(1) covariates,
// y = X beta + eps (homoscedastic) or y = X beta + (1 + 0.4 x1) eps
// (heteroscedastic). beta_base is the tau-independent parameter; the
// tau-level ground truth comes from true_quantile_coeffs.
struct ModelSpec {
  ModelKind model = ModelKind::Homoscedastic;
  int p = 500;
  CoefficientVector beta_base;  // length p+1, intercept first
  NoiseLaw noise = NoiseLaw::Normal;
  double ar_rho = 0.5;

  // (1, 1, 2, 3, 4, 5, 0, ..., 0) — the default simulation parameter.
  static CoefficientVector default_beta(int p);
  void validate() const;
};

// n x (p+1) design: column 0 all ones, columns 1..p stationary AR(1) with
// correlation ar_rho^{|i-j|} (equal in law to the Toeplitz Cholesky draw,
// but O(np)).
Matrix gen_covariates(long n, int p, double ar_rho, std::uint64_t seed);

// F^{-1}(tau) for the standard form of the law.
double noise_quantile(NoiseLaw noise, double tau);

// Ground-truth coefficients at quantile level tau.
//
// Derivation: with q = F^{-1}(tau), Q_tau(Y|X) = X^T beta_base + q for
// model 1, and X^T beta_base + q + 0.4 q x1 for model 2 (exact wherever the
// scale 1 + 0.4 x1 is positive; the generator applies the model formula
// literally, so rows with negative scale keep the paper's convention).
CoefficientVector true_quantile_coeffs(const ModelSpec& spec, double tau);

// Full dataset draw; deterministic in (spec, n_total, seed).
// noise_scale is a test hook (1 = the model as written, 0 = exact fit).
Dataset gen_dataset(const ModelSpec& spec, long n_total, std::uint64_t seed,
                    double noise_scale = 1.0);

// Random permutation split into m equal contiguous blocks; shard 0 is the
// central machine. m must divide the row count.
std::vector<DatasetShard> shard_dataset(const Matrix& X, const Vector& y, int m,
                                        std::uint64_t seed);

}  // namespace dhsqr
