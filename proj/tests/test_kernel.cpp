#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dhsqr/kernel.hpp"
#include "dhsqr/rng.hpp"

using namespace dhsqr;

TEST_CASE("gaussian kernel values") {
  CHECK(gaussian_kernel(0.0) == doctest::Approx(0.3989422804014327).epsilon(1e-12));
  CHECK(gaussian_kernel(1.3) == gaussian_kernel(-1.3));

  // Quadrature oracle: trapezoid over [-8, 8], step 1e-3, must integrate to 1.
  const double step = 1e-3;
  double integral = 0.5 * (gaussian_kernel(-8.0) + gaussian_kernel(8.0));
  for (long i = 1; i < 16000; ++i) integral += gaussian_kernel(-8.0 + step * i);
  integral *= step;
  CHECK(integral == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("gaussian kernel is finite and nonnegative") {
  Rng rng(99, 0);
  for (int i = 0; i < 1000; ++i) {
    const double u = 40.0 * (rng.next_uniform() - 0.5);
    const double v = gaussian_kernel(u);
    CHECK(std::isfinite(v));
    CHECK(v >= 0.0);
  }
}

TEST_CASE("scaled kernel") {
  CHECK(scaled_kernel(0.0, 2.0) == doctest::Approx(0.19947114020071635).epsilon(1e-12));
  CHECK(scaled_kernel(1.0, 0.5) == doctest::Approx(2.0 * gaussian_kernel(2.0)).epsilon(1e-14));
  Rng rng(7, 0);
  for (int i = 0; i < 200; ++i) {
    const double u = 10.0 * (rng.next_uniform() - 0.5);
    CHECK(scaled_kernel(u, 1.0) == doctest::Approx(gaussian_kernel(u)).epsilon(1e-15));
    const double h = 0.05 + 3.0 * rng.next_uniform();
    CHECK(scaled_kernel(u, h) * h ==
          doctest::Approx(gaussian_kernel(u / h)).epsilon(1e-14));
  }
  CHECK_THROWS_AS(scaled_kernel(1.0, 0.0), DomainError);
  CHECK_THROWS_AS(scaled_kernel(1.0, -2.0), DomainError);
}

TEST_CASE("bandwidth formulas match direct arithmetic") {
  BandwidthPlan plan;
  plan.c_h = 5.0;
  plan.c_b = 0.53;
  plan.s_eff = 5;
  plan.N = 20000;
  plan.n = 500;

  const double h = global_bandwidth(plan);
  const double h_direct = 5.0 * std::cbrt(5.0 * std::log(20000.0) / 500.0);
  CHECK(h == doctest::Approx(h_direct).epsilon(1e-14));
  CHECK(h == doctest::Approx(2.314).epsilon(1e-3));

  const double b = local_bandwidth(plan);
  const double b_direct = 0.53 * std::cbrt(5.0 * std::log(500.0) / 500.0);
  CHECK(b == doctest::Approx(b_direct).epsilon(1e-14));
  CHECK(b == doctest::Approx(0.2100).epsilon(1e-3));

  CHECK(bandwidths_inverted(plan));  // b < h at the default constants

  plan.rule = BandwidthRule::Theorem;
  CHECK(global_bandwidth(plan) ==
        doctest::Approx(5.0 * std::cbrt(5.0 * std::log(20000.0) / 20000.0)).epsilon(1e-14));
}

TEST_CASE("h equals b when constants and sizes coincide") {
  BandwidthPlan plan;
  plan.c_h = 0.7;
  plan.c_b = 0.7;
  plan.s_eff = 3;
  plan.N = 1000;
  plan.n = 1000;
  CHECK(global_bandwidth(plan) == doctest::Approx(local_bandwidth(plan)).epsilon(1e-15));
}

TEST_CASE("bandwidths decrease in n for fixed s, N, constants") {
  BandwidthPlan plan;
  plan.s_eff = 5;
  plan.N = 50000;
  double prev_h = 1e300, prev_b = 1e300;
  for (long n : {100L, 200L, 500L, 1000L, 5000L, 20000L}) {
    plan.n = n;
    const double h = global_bandwidth(plan);
    const double b = local_bandwidth(plan);
    CHECK(h < prev_h);
    CHECK(b < prev_b);
    prev_h = h;
    prev_b = b;
  }
}

TEST_CASE("bandwidth plan rejects bad configuration") {
  BandwidthPlan plan;
  plan.N = 100;
  plan.n = 50;
  plan.s_eff = 0;
  CHECK_THROWS_AS(global_bandwidth(plan), ConfigError);
  plan.s_eff = 2;
  plan.n = 1;
  CHECK_THROWS_AS(local_bandwidth(plan), ConfigError);
  plan.n = 200;  // n > N
  CHECK_THROWS_AS(global_bandwidth(plan), ConfigError);
}
