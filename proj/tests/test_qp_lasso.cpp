#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "dhsqr/qp_lasso.hpp"
#include "dhsqr/rng.hpp"

using namespace dhsqr;

namespace {

// Independent brute-force oracle: coarse grid over [-5,5]^d refined by
// coordinate pattern search. Touches nothing but the objective.
double oracle_min(const Matrix& A, const Vector& a, double lambda, Vector* arg = nullptr) {
  const int d = static_cast<int>(a.size());
  auto f = [&](const Vector& b) {
    return 0.5 * b.dot(A * b) - b.dot(a) + lambda * b.cwiseAbs().sum();
  };
  Vector best = Vector::Zero(d);
  double best_val = f(best);
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  const int grid_n = 41;
  Vector point(d);
  for (;;) {
    for (int j = 0; j < d; ++j) point[j] = -5.0 + 0.25 * idx[static_cast<std::size_t>(j)];
    const double v = f(point);
    if (v < best_val) {
      best_val = v;
      best = point;
    }
    int j = 0;
    while (j < d && ++idx[static_cast<std::size_t>(j)] == grid_n) {
      idx[static_cast<std::size_t>(j)] = 0;
      ++j;
    }
    if (j == d) break;
  }
  double step = 0.25;
  while (step > 1e-11) {
    bool improved = false;
    for (int j = 0; j < d; ++j)
      for (double sgn : {1.0, -1.0})
        for (;;) {
          Vector cand = best;
          cand[j] += sgn * step;
          const double v = f(cand);
          if (v < best_val) {
            best_val = v;
            best = cand;
            improved = true;
          } else
            break;
        }
    if (!improved) step *= 0.5;
  }
  if (arg != nullptr) *arg = best;
  return best_val;
}

}  // namespace

TEST_CASE("soft threshold") {
  CHECK(soft_threshold(3.0, 1.0) == 2.0);
  CHECK(soft_threshold(-0.5, 1.0) == 0.0);
  CHECK(soft_threshold(-3.0, 1.0) == -2.0);
  CHECK(soft_threshold(0.0, 0.0) == 0.0);
}

TEST_CASE("separable problem solves in one sweep") {
  const int d = 5;
  Vector a(d);
  a << 2.0, -0.4, 0.9, -3.0, 0.1;
  PenalizedQuadratic q{Matrix::Identity(d, d), a, 0.7, true};
  SolverOptions opts;
  const SolverReport rep = solve(q, Vector::Zero(d), opts);
  CHECK(rep.converged);
  for (int j = 0; j < d; ++j)
    CHECK(rep.beta[j] == doctest::Approx(soft_threshold(a[j], 0.7)).epsilon(1e-14));
  CHECK(kkt_residual(q, rep.beta) < 1e-12);
}

TEST_CASE("lambda = 0 reduces to the linear solve") {
  Matrix A(2, 2);
  A << 2.0, 0.0, 0.0, 2.0;
  Vector a(2);
  a << 4.0, -2.0;
  PenalizedQuadratic q{A, a, 0.0, true};
  const SolverReport rep = solve(q, Vector::Zero(2), {});
  CHECK(rep.beta[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(rep.beta[1] == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("frozen oracle instance") {
  // Expected values computed with oracle_min (grid + pattern search).
  Matrix A(3, 3);
  A << 2.0, 0.3, 0.1, 0.3, 1.5, -0.2, 0.1, -0.2, 1.0;
  Vector a(3);
  a << 1.0, -0.5, 0.25;
  PenalizedQuadratic q{A, a, 0.3, true};

  SolverOptions opts;
  opts.tol = 1e-10;
  const SolverReport rep = solve(q, Vector::Zero(3), opts);
  CHECK(objective_value(q, rep.beta) ==
        doctest::Approx(-0.15446735395189004).epsilon(1e-10));
  CHECK(rep.beta[0] == doctest::Approx(0.38144330494105816).epsilon(1e-7));
  CHECK(rep.beta[1] == doctest::Approx(-0.20962199568748474).epsilon(1e-7));
  CHECK(rep.beta[2] == 0.0);

  // and the oracle agrees at runtime
  CHECK(oracle_min(A, a, 0.3) == doctest::Approx(-0.15446735395189004).epsilon(1e-9));
}

TEST_CASE("random instances match the oracle") {
  Rng rng(2023, 0);
  for (int trial = 0; trial < 25; ++trial) {
    const int d = 2 + static_cast<int>(rng.next_u64() % 3);
    Matrix B(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) B(i, j) = rng.next_normal();
    Matrix A = (B.transpose() * B) / d;
    A.diagonal().array() += 0.4;
    A = 0.5 * (A + A.transpose()).eval();
    Vector a(d);
    for (int j = 0; j < d; ++j) a[j] = 2.0 * rng.next_uniform() - 1.0;
    const double lambda = 0.3 * rng.next_uniform();

    PenalizedQuadratic q{A, a, lambda, true};
    SolverOptions opts;
    opts.tol = 1e-10;
    const SolverReport rep = solve(q, Vector::Zero(d), opts);
    CHECK(rep.converged);
    CHECK(objective_value(q, rep.beta) - oracle_min(A, a, lambda) <= 1e-6);
    CHECK(rep.kkt_residual <= 1e-8);
  }
}

TEST_CASE("kkt residual") {
  const int d = 3;
  Vector a(d);
  a << 1.5, -0.2, 0.9;
  PenalizedQuadratic q{Matrix::Identity(d, d), a, 0.4, true};

  SUBCASE("zero at the separable optimum") {
    Vector beta(d);
    for (int j = 0; j < d; ++j) beta[j] = soft_threshold(a[j], 0.4);
    CHECK(kkt_residual(q, beta) < 1e-12);
  }

  SUBCASE("zero vector is optimal when lambda dominates") {
    q.lambda = a.cwiseAbs().maxCoeff();
    CHECK(kkt_residual(q, Vector::Zero(d)) == 0.0);
  }

  SUBCASE("single-coordinate perturbation shows up exactly") {
    Vector beta(d);
    for (int j = 0; j < d; ++j) beta[j] = soft_threshold(a[j], 0.4);
    beta[0] += 0.01;  // stays positive, sign unchanged
    CHECK(kkt_residual(q, beta) == doctest::Approx(0.01).epsilon(1e-10));
  }
}

TEST_CASE("objective is non-increasing across sweeps") {
  Rng rng(5150, 0);
  const int d = 8;
  Matrix B(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) B(i, j) = rng.next_normal();
  Matrix A = (B.transpose() * B) / d;
  A = 0.5 * (A + A.transpose()).eval();
  A.diagonal().array() += 0.2;
  Vector a(d);
  for (int j = 0; j < d; ++j) a[j] = rng.next_normal();
  PenalizedQuadratic q{A, a, 0.15, true};

  double prev = objective_value(q, Vector::Zero(d));
  for (long sweeps = 1; sweeps <= 12; ++sweeps) {
    SolverOptions opts;
    opts.max_sweeps = sweeps;
    opts.tol = 1e-16;  // force the full sweep budget
    const SolverReport rep = solve(q, Vector::Zero(d), opts);
    const double obj = objective_value(q, rep.beta);
    CHECK(obj <= prev + 1e-12);
    prev = obj;
  }
}

TEST_CASE("lambda above |a|_inf yields the zero solution") {
  Rng rng(62, 0);
  const int d = 6;
  Matrix B(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) B(i, j) = rng.next_normal();
  Matrix A = 0.5 * (B.transpose() * B + B * B.transpose()) / d;
  A.diagonal().array() += 0.1;
  Vector a(d);
  for (int j = 0; j < d; ++j) a[j] = rng.next_normal();
  PenalizedQuadratic q{A, a, a.cwiseAbs().maxCoeff(), true};
  const SolverReport rep = solve(q, Vector::Zero(d), {});
  CHECK(rep.beta.cwiseAbs().maxCoeff() == 0.0);
  CHECK(rep.converged);
}

TEST_CASE("warm start does not exceed the cold sweep count") {
  Rng rng(77, 0);
  const int d = 20;
  Matrix B(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) B(i, j) = rng.next_normal();
  Matrix A = (B.transpose() * B) / d;
  A = 0.5 * (A + A.transpose()).eval();
  A.diagonal().array() += 0.3;
  Vector a(d);
  for (int j = 0; j < d; ++j) a[j] = rng.next_normal();
  PenalizedQuadratic q{A, a, 0.2, true};

  const SolverReport cold = solve(q, Vector::Zero(d), {});
  const SolverReport warm = solve(q, cold.beta, {});
  CHECK(warm.converged);
  CHECK(warm.iterations <= cold.iterations);
}

TEST_CASE("degenerate diagonal freezes the coordinate") {
  Matrix A = Matrix::Zero(3, 3);
  A(0, 0) = 1.0;
  A(2, 2) = 2.0;  // coordinate 1 has no curvature
  Vector a(3);
  a << 1.0, 0.0, -2.0;
  PenalizedQuadratic q{A, a, 0.1, true};
  Vector init(3);
  init << 0.0, 5.0, 0.0;  // warm start sits on the frozen coordinate
  const SolverReport rep = solve(q, init, {});
  CHECK(rep.frozen == std::vector<int>{1});
  CHECK(rep.beta[1] == 0.0);
  CHECK(rep.beta[0] == doctest::Approx(0.9).epsilon(1e-10));
  CHECK(rep.beta[2] == doctest::Approx(-0.95).epsilon(1e-10));
}

TEST_CASE("rank-one psd problem stays bounded under l1") {
  Vector x(3);
  x << 1.0, 0.5, -0.2;
  Matrix A = x * x.transpose();
  Vector a = 0.3 * x;
  PenalizedQuadratic q{A, a, 0.05, true};
  const SolverReport rep = solve(q, Vector::Zero(3), {});
  CHECK(rep.beta.allFinite());
  CHECK(objective_value(q, rep.beta) <= 0.0);
}

TEST_CASE("validation of inputs") {
  Matrix A(2, 2);
  A << 1.0, 0.5, 0.4, 1.0;  // asymmetric
  Vector a(2);
  a << 1.0, 1.0;
  PenalizedQuadratic q{A, a, 0.1, true};
  CHECK_THROWS_AS(solve(q, Vector::Zero(2), {}), ConfigError);
  q.A << 1.0, 0.5, 0.5, 1.0;
  q.lambda = -0.1;
  CHECK_THROWS_AS(solve(q, Vector::Zero(2), {}), ConfigError);
}

TEST_CASE("non-finite linear term raises NumericalFailure") {
  Matrix A = Matrix::Identity(3, 3);
  Vector a(3);
  a << 1.0, std::numeric_limits<double>::quiet_NaN(), 0.5;
  PenalizedQuadratic q{A, a, 0.1, true};
  CHECK_THROWS_AS(solve(q, Vector::Zero(3), {}), NumericalFailure);
}
