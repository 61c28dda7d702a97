#include "dhsqr/rng.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dhsqr {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream) : state_(derive(seed, stream)) {}

std::uint64_t Rng::derive(std::uint64_t seed, std::uint64_t stream) {
  return mix64(seed + kGolden * (stream + 1));
}

std::uint64_t Rng::next_u64() {
  state_ += kGolden;
  return mix64(state_);
}

double Rng::next_uniform() {
  // 53 mantissa bits, recentred to (0,1).
  const std::uint64_t bits = next_u64() >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double Rng::next_normal() { return normal_quantile(next_uniform()); }
double Rng::next_student_t3() { return student_t3_quantile(next_uniform()); }
double Rng::next_cauchy() { return cauchy_quantile(next_uniform()); }

double normal_pdf(double x) {
  static const double inv_sqrt_2pi = 0.3989422804014326779;
  return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

double normal_cdf(double x) {
  static const double inv_sqrt2 = 0.7071067811865475244;
  return 0.5 * std::erfc(-x * inv_sqrt2);
}

double normal_quantile(double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw std::domain_error("normal_quantile: tau outside (0,1)");

  // Acklam's rational approximation, then one Halley polish step.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (tau < plow) {
    const double q = std::sqrt(-2.0 * std::log(tau));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (tau <= 1.0 - plow) {
    const double q = tau - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - tau));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  const double e = normal_cdf(x) - tau;
  const double u = e / normal_pdf(x);
  x -= u / (1.0 + 0.5 * x * u);  // Halley
  return x;
}

double student_t3_cdf(double x) {
  static const double inv_sqrt3 = 0.5773502691896257645;
  static const double inv_pi = 0.3183098861837906715;
  const double u = x * inv_sqrt3;
  return 0.5 + inv_pi * (std::atan(u) + u / (1.0 + u * u));
}

double student_t3_quantile(double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw std::domain_error("student_t3_quantile: tau outside (0,1)");
  if (tau == 0.5) return 0.0;

  // Monotone CDF: bracket then bisect/Newton. The pdf is available in
  // closed form, so Newton converges fast once bracketed.
  double lo = -1.0, hi = 1.0;
  while (student_t3_cdf(lo) > tau) lo *= 2.0;
  while (student_t3_cdf(hi) < tau) hi *= 2.0;
  double x = 0.5 * (lo + hi);
  static const double two_over_pi_sqrt3 = 0.3675525969478613994;  // 2/(pi*sqrt(3))
  for (int it = 0; it < 200; ++it) {
    const double f = student_t3_cdf(x) - tau;
    if (f > 0.0) hi = x; else lo = x;
    const double q = 1.0 + x * x / 3.0;
    const double pdf = two_over_pi_sqrt3 / (q * q);
    double step = f / pdf;
    double next = x - step;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-15 * (1.0 + std::abs(x))) return next;
    x = next;
  }
  return x;
}

double cauchy_quantile(double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw std::domain_error("cauchy_quantile: tau outside (0,1)");
  static const double pi = 3.14159265358979323846;
  return std::tan(pi * (tau - 0.5));
}

}  // namespace dhsqr
