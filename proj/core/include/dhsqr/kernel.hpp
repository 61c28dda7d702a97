#pragma once

#include "dhsqr/types.hpp"

namespace dhsqr {

// Which denominator the global-bandwidth formula uses. The theory rate
// divides by N, the simulation setting divides by n; the simulation rule is
// the one the reported tables were produced with, so it is the default.
enum class BandwidthRule { Simulation, Theorem };

struct BandwidthPlan {
  double c_h = 5.0;    // global scale
  double c_b = 0.53;   // local scale
  int s_eff = 1;       // sparsity plugged into the formulas, floored at 1
  long N = 0;          // total training samples
  long n = 0;          // local training samples
  BandwidthRule rule = BandwidthRule::Simulation;
};

// A kernel usable here must be symmetric, nonnegative, bounded and
// integrate to one. Only the Gaussian ships; the transform entry points
// accept alternatives through this signature.
using KernelFunction = double (*)(double);

// Standard Gaussian kernel, (2*pi)^{-1/2} exp(-u^2/2).
double gaussian_kernel(double u);

// K(u/h)/h. h must be positive.
double scaled_kernel(double u, double h);
double scaled_kernel(double u, double h, KernelFunction kernel);

// h = c_h * (s log N / n)^{1/3} under the simulation rule,
// h = c_h * (s log N / N)^{1/3} under the theorem rule.
double global_bandwidth(const BandwidthPlan& plan);

// b = c_b * (s log n / n)^{1/3}.
double local_bandwidth(const BandwidthPlan& plan);

// The theory assumes b >= h; with the default constants that fails at
// finite sizes. Returns true when b < h so callers can warn, not abort.
bool bandwidths_inverted(const BandwidthPlan& plan);

}  // namespace dhsqr
