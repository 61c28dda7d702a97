#include "dhsqr/kernel.hpp"

#include <cmath>

namespace dhsqr {

double gaussian_kernel(double u) {
  static const double inv_sqrt_2pi = 0.3989422804014326779;
  return inv_sqrt_2pi * std::exp(-0.5 * u * u);
}

double scaled_kernel(double u, double h) {
  if (!(h > 0.0)) throw DomainError("scaled_kernel: bandwidth must be positive");
  return gaussian_kernel(u / h) / h;
}

double scaled_kernel(double u, double h, KernelFunction kernel) {
  if (!(h > 0.0)) throw DomainError("scaled_kernel: bandwidth must be positive");
  return kernel(u / h) / h;
}

namespace {
void check_plan(const BandwidthPlan& plan) {
  if (plan.s_eff < 1) throw ConfigError("bandwidth plan: s_eff must be >= 1");
  if (plan.n < 2) throw ConfigError("bandwidth plan: n must be >= 2");
  if (plan.N < plan.n) throw ConfigError("bandwidth plan: N must be >= n");
  if (!(plan.c_h > 0.0) || !(plan.c_b > 0.0))
    throw ConfigError("bandwidth plan: scale constants must be positive");
}
}  // namespace

double global_bandwidth(const BandwidthPlan& plan) {
  check_plan(plan);
  const double denom =
      plan.rule == BandwidthRule::Simulation ? static_cast<double>(plan.n)
                                             : static_cast<double>(plan.N);
  return plan.c_h * std::cbrt(plan.s_eff * std::log(static_cast<double>(plan.N)) / denom);
}

double local_bandwidth(const BandwidthPlan& plan) {
  check_plan(plan);
  const double n = static_cast<double>(plan.n);
  return plan.c_b * std::cbrt(plan.s_eff * std::log(n) / n);
}

bool bandwidths_inverted(const BandwidthPlan& plan) {
  return local_bandwidth(plan) < global_bandwidth(plan);
}

}  // namespace dhsqr
