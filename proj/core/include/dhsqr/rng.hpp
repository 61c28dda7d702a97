#pragma once

#include <cstdint>

namespace dhsqr {

// Counter-based splitmix64 stream. A draw is a pure function of
// (seed, stream, counter), so independent streams can be handed to
// workers/replicates without shared state. The algorithm is fixed here and
// recorded in run metadata; identical seeds reproduce identical data on any
// platform with IEEE-754 doubles.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();

  // Uniform on the open interval (0,1); never returns an endpoint, so
  // inverse-CDF transforms stay finite.
  double next_uniform();

  double next_normal();
  double next_student_t3();
  double next_cauchy();

  // Derives an independent child seed; used to split streams per shard,
  // per replicate, per purpose.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream);

 private:
  std::uint64_t state_;
};

// Bit-mixing finalizer shared with seed derivation.
std::uint64_t mix64(std::uint64_t z);

// Standard normal pdf/cdf and quantile. The quantile is a rational
// approximation polished by one Halley step on erfc, accurate to ~1e-15;
// it doubles as the inversion routine for normal noise sampling.
double normal_pdf(double x);
double normal_cdf(double x);
double normal_quantile(double tau);

// Student t with 3 df: closed-form cdf, quantile by monotone inversion.
double student_t3_cdf(double x);
double student_t3_quantile(double tau);

double cauchy_quantile(double tau);

}  // namespace dhsqr
