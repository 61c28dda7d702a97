#pragma once

#include <utility>

#include "dhsqr/kernel.hpp"
#include "dhsqr/types.hpp"

namespace dhsqr {

// Per-shard first/second moments of the kernel-transformed sample, all
// computed without forming sqrt(K_h) or its reciprocal:
//   z = (1/n) sum_i [K_h(e_i) x_i (x_i' beta) - x_i (I(e_i<=0) - tau)]
//   g = (1/n) sum_i  K_h(e_i) x_i (x_i' beta)
//   G = (1/n) sum_i  K_h(e_i) x_i x_i'          (central machine only)
struct PseudoAggregates {
  Vector z;
  Vector g;
  Matrix G;  // empty unless requested
  bool has_gram = false;
};

// Kernel weights below this floor make the explicit pseudo-response
// division meaningless; the aggregate path never divides, this floor only
// guards the inspection routine below.
inline constexpr double kKernelFloor = 1e-12;

// The explicit transformed pair (x_tilde, y_tilde). Exists for tests and
// inspection; production statistics go through shard_aggregates.
std::pair<Vector, double> pseudo_pair(const Vector& x, double y,
                                      const CoefficientVector& beta, double tau,
                                      double h, double kernel_floor = kKernelFloor,
                                      KernelFunction kernel = gaussian_kernel);

PseudoAggregates shard_aggregates(const DatasetShard& shard,
                                  const CoefficientVector& beta, double tau,
                                  double h, bool with_gram = false,
                                  KernelFunction kernel = gaussian_kernel);

// v' G v.
double gram_quadratic_form(const Matrix& G, const Vector& v);

}  // namespace dhsqr
