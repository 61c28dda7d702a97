#include "dhsqr/transform.hpp"

#include <cmath>

#include "dhsqr/kernel.hpp"

namespace dhsqr {

std::pair<Vector, double> pseudo_pair(const Vector& x, double y,
                                      const CoefficientVector& beta, double tau,
                                      double h, double kernel_floor, KernelFunction kernel) {
  if (x.size() != beta.size()) throw ConfigError("pseudo_pair: dimension mismatch");
  const double e = y - x.dot(beta);
  const double k = scaled_kernel(e, h, kernel);
  if (k < kernel_floor)
    throw KernelUnderflow("pseudo_pair: kernel weight below floor, residual too far in the tail");
  const double root = std::sqrt(k);
  Vector x_tilde = root * x;
  const double indicator = e <= 0.0 ? 1.0 : 0.0;
  const double y_tilde = x_tilde.dot(beta) - (indicator - tau) / root;
  return {std::move(x_tilde), y_tilde};
}

PseudoAggregates shard_aggregates(const DatasetShard& shard,
                                  const CoefficientVector& beta, double tau,
                                  double h, bool with_gram, KernelFunction kernel) {
  if (!(h > 0.0)) throw DomainError("shard_aggregates: bandwidth must be positive");
  if (shard.X.cols() != beta.size()) throw ConfigError("shard_aggregates: dimension mismatch");

  const long n = shard.rows();
  const Vector fitted = shard.X * beta;
  Vector weights(n);       // K_h(e_i)
  Vector z_scalar(n);      // K_h(e_i)(x_i'beta) - (I(e_i<=0)-tau)
  for (long i = 0; i < n; ++i) {
    const double e = shard.y[i] - fitted[i];
    const double k = scaled_kernel(e, h, kernel);
    weights[i] = k;
    const double indicator = e <= 0.0 ? 1.0 : 0.0;
    z_scalar[i] = k * fitted[i] - (indicator - tau);
  }

  PseudoAggregates out;
  const double inv_n = 1.0 / static_cast<double>(n);
  out.z = inv_n * (shard.X.transpose() * z_scalar);
  out.g = inv_n * (shard.X.transpose() * weights.cwiseProduct(fitted));
  if (with_gram) {
    Matrix Xw = weights.asDiagonal() * shard.X;
    out.G = inv_n * (shard.X.transpose() * Xw);
    out.G = 0.5 * (out.G + out.G.transpose()).eval();  // exact symmetry
    out.has_gram = true;
  }
  return out;
}

double gram_quadratic_form(const Matrix& G, const Vector& v) {
  if (G.rows() != G.cols() || G.cols() != v.size())
    throw ConfigError("gram_quadratic_form: dimension mismatch");
  return v.dot(G * v);
}

}  // namespace dhsqr
