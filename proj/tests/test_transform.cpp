#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "dhsqr/datagen.hpp"
#include "dhsqr/kernel.hpp"
#include "dhsqr/rng.hpp"
#include "dhsqr/transform.hpp"

using namespace dhsqr;

TEST_CASE("pseudo pair worked example") {
  Vector x(2);
  x << 1.0, 2.0;
  const CoefficientVector beta = CoefficientVector::Zero(2);
  const auto [x_tilde, y_tilde] = pseudo_pair(x, 0.5, beta, 0.5, 1.0);

  const double k = scaled_kernel(0.5, 1.0);
  CHECK(k == doctest::Approx(0.35207).epsilon(1e-5));
  CHECK(x_tilde[0] == doctest::Approx(0.59336).epsilon(1e-5));
  CHECK(x_tilde[1] == doctest::Approx(1.18672).epsilon(1e-5));
  CHECK(y_tilde == doctest::Approx(0.84266).epsilon(1e-5));
}

TEST_CASE("pseudo pair at zero residual uses the left indicator") {
  Vector x(3);
  x << 1.0, -0.7, 0.4;
  CoefficientVector beta(3);
  beta << 0.5, 1.0, -2.0;
  const double y = x.dot(beta);  // e = 0
  const double tau = 0.3, h = 0.8;
  const auto [x_tilde, y_tilde] = pseudo_pair(x, y, beta, tau, h);
  const double root = std::sqrt(scaled_kernel(0.0, h));
  CHECK(y_tilde ==
        doctest::Approx(x_tilde.dot(beta) - (1.0 - tau) / root).epsilon(1e-14));
}

TEST_CASE("pseudo pair underflow guard") {
  Vector x(2);
  x << 1.0, 0.0;
  const CoefficientVector beta = CoefficientVector::Zero(2);
  CHECK_THROWS_AS(pseudo_pair(x, 100.0, beta, 0.5, 0.5), KernelUnderflow);
}

TEST_CASE("division-free identity on random rows") {
  Rng rng(88, 3);
  for (int trial = 0; trial < 2000; ++trial) {
    const int p = 5;
    Vector x(p + 1);
    x[0] = 1.0;
    for (int j = 1; j <= p; ++j) x[j] = rng.next_normal();
    CoefficientVector beta(p + 1);
    for (int j = 0; j <= p; ++j) beta[j] = rng.next_normal();
    const double y = x.dot(beta) + 2.0 * rng.next_normal();
    const double tau = 0.2 + 0.6 * rng.next_uniform();
    const double h = 0.3 + 2.0 * rng.next_uniform();
    const double e = y - x.dot(beta);
    const double k = scaled_kernel(e, h);
    if (k < kKernelFloor) continue;

    const auto [x_tilde, y_tilde] = pseudo_pair(x, y, beta, tau, h);
    const double indicator = e <= 0.0 ? 1.0 : 0.0;
    const Vector direct = k * x * x.dot(beta) - x * (indicator - tau);
    CHECK((x_tilde * y_tilde - direct).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("shard aggregates at beta = 0") {
  ModelSpec spec;
  spec.p = 6;
  spec.beta_base = ModelSpec::default_beta(spec.p);
  const Dataset d = gen_dataset(spec, 40, 5);
  DatasetShard shard{d.X, d.y, 0};

  const double tau = 0.4;
  const CoefficientVector zero = CoefficientVector::Zero(spec.p + 1);
  const PseudoAggregates agg = shard_aggregates(shard, zero, tau, 1.0, false);

  CHECK(agg.g.cwiseAbs().maxCoeff() == 0.0);
  Vector expected = Vector::Zero(spec.p + 1);
  for (long i = 0; i < shard.rows(); ++i)
    expected -= shard.X.row(i).transpose() * ((d.y[i] <= 0.0 ? 1.0 : 0.0) - tau);
  expected /= static_cast<double>(shard.rows());
  CHECK((agg.z - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("one-row shard matches the pseudo pair product") {
  Rng rng(4, 4);
  for (int trial = 0; trial < 200; ++trial) {
    const int p = 4;
    DatasetShard shard;
    shard.X.resize(1, p + 1);
    shard.X(0, 0) = 1.0;
    for (int j = 1; j <= p; ++j) shard.X(0, j) = rng.next_normal();
    CoefficientVector beta(p + 1);
    for (int j = 0; j <= p; ++j) beta[j] = rng.next_normal();
    shard.y = Vector::Constant(1, shard.X.row(0).dot(beta) + rng.next_normal());
    const double tau = 0.5, h = 1.5;
    const double e = shard.y[0] - shard.X.row(0).dot(beta);
    if (scaled_kernel(e, h) < kKernelFloor) continue;

    const auto [x_tilde, y_tilde] =
        pseudo_pair(shard.X.row(0).transpose(), shard.y[0], beta, tau, h);
    const PseudoAggregates agg = shard_aggregates(shard, beta, tau, h, false);
    CHECK((agg.z - x_tilde * y_tilde).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((agg.g - x_tilde * x_tilde.dot(beta)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("gram approaches the raw gram at huge bandwidth") {
  ModelSpec spec;
  spec.p = 5;
  spec.beta_base = ModelSpec::default_beta(spec.p);
  const Dataset d = gen_dataset(spec, 200, 6);
  DatasetShard shard{d.X, d.y, 0};
  const CoefficientVector beta_true = true_quantile_coeffs(spec, 0.5);

  const double h = 1e3;
  const PseudoAggregates agg = shard_aggregates(shard, beta_true, 0.5, h, true);
  const Matrix raw = (shard.X.transpose() * shard.X) / static_cast<double>(shard.rows());
  const Matrix scaled = (gaussian_kernel(0.0) / h) * raw;
  CHECK((agg.G - scaled).cwiseAbs().maxCoeff() / scaled.cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("gram is symmetric positive semidefinite") {
  ModelSpec spec;
  spec.p = 8;
  spec.beta_base = ModelSpec::default_beta(spec.p);
  const Dataset d = gen_dataset(spec, 60, 7);
  DatasetShard shard{d.X, d.y, 0};
  const PseudoAggregates agg =
      shard_aggregates(shard, spec.beta_base, 0.5, 0.7, true);

  CHECK((agg.G - agg.G.transpose()).cwiseAbs().maxCoeff() == 0.0);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(agg.G);
  CHECK(eig.eigenvalues().minCoeff() >= -1e-8);

  Rng rng(10, 1);
  for (int i = 0; i < 50; ++i) {
    Vector v(spec.p + 1);
    for (int j = 0; j <= spec.p; ++j) v[j] = rng.next_normal();
    CHECK(gram_quadratic_form(agg.G, v) >= -1e-10);
  }
}

namespace {
// Uniform kernel on [-1, 1]; satisfies the kernel requirements.
double uniform_kernel(double u) { return std::abs(u) <= 1.0 ? 0.5 : 0.0; }
}  // namespace

TEST_CASE("alternative kernels pass through the transform") {
  ModelSpec spec;
  spec.p = 4;
  spec.beta_base = ModelSpec::default_beta(spec.p);
  const Dataset d = gen_dataset(spec, 30, 9);
  DatasetShard shard{d.X, d.y, 0};

  const PseudoAggregates agg =
      shard_aggregates(shard, spec.beta_base, 0.5, 2.0, true, uniform_kernel);
  Vector g_direct = Vector::Zero(5);
  const Vector fitted = shard.X * spec.beta_base;
  for (long i = 0; i < shard.rows(); ++i) {
    const double k = uniform_kernel((shard.y[i] - fitted[i]) / 2.0) / 2.0;
    g_direct += k * fitted[i] * shard.X.row(i).transpose();
  }
  g_direct /= static_cast<double>(shard.rows());
  CHECK((agg.g - g_direct).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("quadratic form basics") {
  Matrix I = Matrix::Identity(2, 2);
  Vector v(2);
  v << 3.0, 4.0;
  CHECK(gram_quadratic_form(I, v) == doctest::Approx(25.0).epsilon(1e-15));
  CHECK(gram_quadratic_form(I, Vector::Zero(2)) == 0.0);
  CHECK_THROWS_AS(gram_quadratic_form(I, Vector::Zero(3)), ConfigError);
}

TEST_CASE("aggregates are linear across shard merges") {
  Rng rng(31, 2);
  for (int trial = 0; trial < 20; ++trial) {
    const int p = 5;
    const long n1 = 7, n2 = 13;
    auto fill = [&](DatasetShard& s, long n) {
      s.X.resize(n, p + 1);
      s.y.resize(n);
      for (long i = 0; i < n; ++i) {
        s.X(i, 0) = 1.0;
        for (int j = 1; j <= p; ++j) s.X(i, j) = rng.next_normal();
        s.y[i] = 2.0 * rng.next_normal();
      }
    };
    DatasetShard s1, s2, merged;
    fill(s1, n1);
    fill(s2, n2);
    merged.X.resize(n1 + n2, p + 1);
    merged.X << s1.X, s2.X;
    merged.y.resize(n1 + n2);
    merged.y << s1.y, s2.y;

    CoefficientVector beta(p + 1);
    for (int j = 0; j <= p; ++j) beta[j] = rng.next_normal();
    const double tau = 0.35, h = 0.9;
    const auto a1 = shard_aggregates(s1, beta, tau, h, true);
    const auto a2 = shard_aggregates(s2, beta, tau, h, true);
    const auto am = shard_aggregates(merged, beta, tau, h, true);
    const double w1 = double(n1) / (n1 + n2), w2 = double(n2) / (n1 + n2);
    CHECK((am.z - (w1 * a1.z + w2 * a2.z)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((am.g - (w1 * a1.g + w2 * a2.g)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((am.G - (w1 * a1.G + w2 * a2.G)).cwiseAbs().maxCoeff() < 1e-12);
  }
}
