#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "dhsqr/datagen.hpp"
#include "dhsqr/rng.hpp"

using namespace dhsqr;

namespace {

// Independent inversion oracle: bisection on a callable CDF.
template <typename Cdf>
double bisect_quantile(Cdf cdf, double tau, double lo, double hi) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (cdf(mid) < tau) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

double cauchy_cdf(double x) { return 0.5 + std::atan(x) / 3.14159265358979323846; }

}  // namespace

TEST_CASE("noise quantiles against inversion oracles") {
  CHECK(noise_quantile(NoiseLaw::Normal, 0.5) == doctest::Approx(0.0).epsilon(1e-14));

  const double cauchy_expected = bisect_quantile(cauchy_cdf, 0.3, -1e8, 1e8);
  CHECK(noise_quantile(NoiseLaw::Cauchy, 0.3) ==
        doctest::Approx(cauchy_expected).epsilon(1e-10));
  CHECK(noise_quantile(NoiseLaw::Cauchy, 0.3) == doctest::Approx(-0.7265425).epsilon(1e-6));

  const double normal_expected = bisect_quantile(normal_cdf, 0.7, -40.0, 40.0);
  CHECK(noise_quantile(NoiseLaw::Normal, 0.7) ==
        doctest::Approx(normal_expected).epsilon(1e-12));
  CHECK(noise_quantile(NoiseLaw::Normal, 0.7) == doctest::Approx(0.5244005).epsilon(1e-6));

  const double t3_expected = bisect_quantile(student_t3_cdf, 0.9, -1e6, 1e6);
  CHECK(noise_quantile(NoiseLaw::StudentT3, 0.9) ==
        doctest::Approx(t3_expected).epsilon(1e-10));

  CHECK_THROWS_AS(noise_quantile(NoiseLaw::Normal, 0.0), DomainError);
  CHECK_THROWS_AS(noise_quantile(NoiseLaw::Normal, 1.0), DomainError);
}

TEST_CASE("quantile round trips through the cdf") {
  for (double tau : {0.001, 0.05, 0.3, 0.5, 0.7, 0.95, 0.999}) {
    CHECK(normal_cdf(normal_quantile(tau)) == doctest::Approx(tau).epsilon(1e-12));
    CHECK(student_t3_cdf(student_t3_quantile(tau)) == doctest::Approx(tau).epsilon(1e-12));
  }
}

TEST_CASE("rng streams are deterministic and distinct") {
  Rng a(42, 0), b(42, 0), c(42, 1);
  for (int i = 0; i < 100; ++i) {
    const std::uint64_t va = a.next_u64();
    CHECK(va == b.next_u64());
    CHECK(va != c.next_u64());
  }
  Rng u(5, 2);
  for (int i = 0; i < 10000; ++i) {
    const double x = u.next_uniform();
    CHECK(x > 0.0);
    CHECK(x < 1.0);
  }
}

TEST_CASE("ar(1) covariates: unit marginals and lag correlations") {
  const long n = 100000;
  const Matrix X = gen_covariates(n, 4, 0.5, 2024);

  REQUIRE(X.cols() == 5);
  CHECK((X.col(0).array() == 1.0).all());

  auto corr = [&](int i, int j) {
    const Vector xi = X.col(i).array() - X.col(i).mean();
    const Vector xj = X.col(j).array() - X.col(j).mean();
    return xi.dot(xj) / std::sqrt(xi.squaredNorm() * xj.squaredNorm());
  };
  const double var1 = (X.col(1).array() - X.col(1).mean()).square().sum() / (n - 1);
  CHECK(var1 == doctest::Approx(1.0).epsilon(0.02));
  CHECK(corr(1, 2) == doctest::Approx(0.5).epsilon(0.04));       // 0.5 +- 0.02
  CHECK(corr(1, 4) == doctest::Approx(0.125).scale(1.0).epsilon(0.16));  // 0.125 +- 0.02

  CHECK_THROWS_AS(gen_covariates(10, 3, 1.0, 1), ConfigError);
  CHECK_THROWS_AS(gen_covariates(0, 3, 0.5, 1), ConfigError);
}

TEST_CASE("true quantile coefficients") {
  ModelSpec spec;
  spec.p = 10;
  spec.beta_base = ModelSpec::default_beta(spec.p);

  SUBCASE("median of symmetric noise leaves beta unchanged") {
    spec.model = ModelKind::Homoscedastic;
    spec.noise = NoiseLaw::Normal;
    CHECK((true_quantile_coeffs(spec, 0.5) - spec.beta_base).cwiseAbs().maxCoeff() < 1e-14);
    spec.model = ModelKind::Heteroscedastic;
    spec.noise = NoiseLaw::Cauchy;
    CHECK((true_quantile_coeffs(spec, 0.5) - spec.beta_base).cwiseAbs().maxCoeff() < 1e-14);
  }

  SUBCASE("heteroscedastic shift at tau=0.7") {
    spec.model = ModelKind::Heteroscedastic;
    spec.noise = NoiseLaw::Normal;
    const double q = normal_quantile(0.7);
    const CoefficientVector beta = true_quantile_coeffs(spec, 0.7);
    CHECK(beta[0] == doctest::Approx(1.0 + q).epsilon(1e-14));
    CHECK(beta[0] == doctest::Approx(1.52440).epsilon(1e-5));
    CHECK(beta[1] == doctest::Approx(1.0 + 0.4 * q).epsilon(1e-14));
    CHECK(beta[1] == doctest::Approx(1.20976).epsilon(1e-5));
    for (int j = 2; j <= spec.p; ++j) CHECK(beta[j] == spec.beta_base[j]);
  }

  SUBCASE("support stays {1..5} across models, laws, levels") {
    for (auto model : {ModelKind::Homoscedastic, ModelKind::Heteroscedastic})
      for (auto law : {NoiseLaw::Normal, NoiseLaw::StudentT3, NoiseLaw::Cauchy})
        for (double tau : {0.3, 0.5, 0.7}) {
          spec.model = model;
          spec.noise = law;
          const std::vector<int> s = support_of(true_quantile_coeffs(spec, tau), 1e-12);
          CHECK(s == std::vector<int>{1, 2, 3, 4, 5});
        }
  }
}

TEST_CASE("gen_dataset basics") {
  ModelSpec spec;
  spec.p = 8;
  spec.beta_base = ModelSpec::default_beta(spec.p);

  SUBCASE("zero noise interpolates exactly") {
    const Dataset d = gen_dataset(spec, 50, 11, 0.0);
    CHECK((d.y - d.X * spec.beta_base).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("check-loss-minimizing intercept near beta0 at tau=0.5") {
    const long n = 100000;
    const Dataset d = gen_dataset(spec, n, 12);
    Vector others = d.y - d.X * spec.beta_base + Vector::Constant(n, spec.beta_base[0]);
    std::sort(others.data(), others.data() + n);
    const double med = 0.5 * (others[n / 2 - 1] + others[n / 2]);
    CHECK(med == doctest::Approx(1.0).epsilon(0.02));
  }

  SUBCASE("heteroscedastic residual scale grows like |1 + 0.4 x1|") {
    spec.model = ModelKind::Heteroscedastic;
    const long n = 200000;
    const Dataset d = gen_dataset(spec, n, 13);
    const Vector resid = d.y - d.X * spec.beta_base;
    for (double c : {0.0, 1.0}) {
      double ss = 0.0;
      long cnt = 0;
      for (long i = 0; i < n; ++i) {
        if (std::abs(d.X(i, 1) - c) < 0.05) {
          ss += resid[i] * resid[i];
          ++cnt;
        }
      }
      REQUIRE(cnt > 200);
      const double sd = std::sqrt(ss / cnt);
      CHECK(sd == doctest::Approx(1.0 + 0.4 * c).epsilon(0.05));
    }
  }

  SUBCASE("bit-for-bit reproducible, negative scale rows included") {
    spec.model = ModelKind::Heteroscedastic;
    const Dataset d1 = gen_dataset(spec, 5000, 14);
    const Dataset d2 = gen_dataset(spec, 5000, 14);
    CHECK((d1.y.array() == d2.y.array()).all());
    CHECK((d1.X.array() == d2.X.array()).all());
    bool has_negative_scale = false;
    for (long i = 0; i < d1.X.rows(); ++i)
      if (1.0 + 0.4 * d1.X(i, 1) < 0.0) has_negative_scale = true;
    CHECK(has_negative_scale);
  }
}

TEST_CASE("shard_dataset") {
  ModelSpec spec;
  spec.p = 4;
  spec.beta_base = ModelSpec::default_beta(spec.p);
  const Dataset d = gen_dataset(spec, 20, 55);

  SUBCASE("m=1 keeps the dataset up to row order") {
    const auto shards = shard_dataset(d.X, d.y, 1, 9);
    REQUIRE(shards.size() == 1);
    std::multiset<double> orig(d.y.data(), d.y.data() + 20);
    std::multiset<double> got(shards[0].y.data(), shards[0].y.data() + 20);
    CHECK(orig == got);
  }

  SUBCASE("m=4 splits into equal shards covering all rows") {
    const auto shards = shard_dataset(d.X, d.y, 4, 9);
    REQUIRE(shards.size() == 4);
    std::multiset<double> got;
    for (const auto& s : shards) {
      CHECK(s.rows() == 5);
      for (long i = 0; i < 5; ++i) got.insert(s.y[i]);
    }
    std::multiset<double> orig(d.y.data(), d.y.data() + 20);
    CHECK(orig == got);
  }

  SUBCASE("same seed, same assignment") {
    const auto a = shard_dataset(d.X, d.y, 4, 123);
    const auto b = shard_dataset(d.X, d.y, 4, 123);
    for (int k = 0; k < 4; ++k) CHECK((a[k].y.array() == b[k].y.array()).all());
  }

  SUBCASE("m must divide the sample size") {
    CHECK_THROWS_AS(shard_dataset(d.X, d.y, 3, 1), ConfigError);
  }
}
