#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "compolicy/logistic.hpp"
#include "compolicy/matrix.hpp"
#include "compolicy/neldermead.hpp"
#include "compolicy/numeric.hpp"
#include "compolicy/ols.hpp"
#include "compolicy/rng.hpp"

using namespace compolicy;

namespace {

// Independent least-squares oracle: form the normal equations and solve them
// by plain Gaussian elimination with partial pivoting.  Deliberately a
// different route than the QR path under test.
std::vector<double> naive_normal_equations(const Matrix& x, const std::vector<double>& y) {
  const int n = x.rows(), k = x.cols();
  std::vector<std::vector<double>> aug(static_cast<std::size_t>(k),
                                       std::vector<double>(static_cast<std::size_t>(k + 1), 0.0));
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += x(i, a) * x(i, b);
      aug[a][static_cast<std::size_t>(b)] = s;
    }
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += x(i, a) * y[static_cast<std::size_t>(i)];
    aug[a][static_cast<std::size_t>(k)] = s;
  }
  for (int col = 0; col < k; ++col) {
    int piv = col;
    for (int r = col + 1; r < k; ++r)
      if (std::fabs(aug[r][static_cast<std::size_t>(col)]) > std::fabs(aug[piv][static_cast<std::size_t>(col)]))
        piv = r;
    std::swap(aug[static_cast<std::size_t>(col)], aug[static_cast<std::size_t>(piv)]);
    for (int r = 0; r < k; ++r) {
      if (r == col) continue;
      const double f = aug[r][static_cast<std::size_t>(col)] / aug[static_cast<std::size_t>(col)][static_cast<std::size_t>(col)];
      for (int c = col; c <= k; ++c)
        aug[r][static_cast<std::size_t>(c)] -= f * aug[static_cast<std::size_t>(col)][static_cast<std::size_t>(c)];
    }
  }
  std::vector<double> beta(static_cast<std::size_t>(k), 0.0);
  for (int j = 0; j < k; ++j)
    beta[static_cast<std::size_t>(j)] = aug[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] /
                                        aug[static_cast<std::size_t>(j)][static_cast<std::size_t>(j)];
  return beta;
}

}  // namespace

TEST_CASE("ols matches the naive normal-equations oracle and recovers a line") {
  RngStream rng(7, 0);
  const int n = 50;
  Matrix x(n, 2);
  std::vector<double> y(n);
  for (int i = 0; i < n; ++i) {
    const double xi = rng.next_normal();
    x(i, 0) = 1.0;
    x(i, 1) = xi;
    y[static_cast<std::size_t>(i)] = 1.0 + 0.5 * xi + 0.1 * rng.next_normal();
  }
  const LinearFit fit = fit_ols(x, y);
  const std::vector<double> oracle = naive_normal_equations(x, y);
  CHECK(std::fabs(fit.coefficients[0] - oracle[0]) < 1e-10);
  CHECK(std::fabs(fit.coefficients[1] - oracle[1]) < 1e-10);
  CHECK(std::fabs(fit.coefficients[0] - 1.0) < 0.1);
  CHECK(std::fabs(fit.coefficients[1] - 0.5) < 0.1);
  // Residuals are orthogonal to the design.
  for (int j = 0; j < 2; ++j) {
    double dot = 0.0;
    for (int i = 0; i < n; ++i) dot += x(i, j) * fit.residuals[static_cast<std::size_t>(i)];
    CHECK(std::fabs(dot) < 1e-8);
  }
}

TEST_CASE("ols influence expansion with true residuals is exact") {
  // coef_hat - coef_true equals mean_i gram_inverse * d_i * e_i when e_i are
  // the residuals against the true coefficients; an algebraic identity.
  RngStream rng(11, 0);
  const int n = 80, k = 4;
  const std::vector<double> truth = {0.3, -1.0, 2.0, 0.7};
  Matrix x(n, k);
  std::vector<double> y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    for (int j = 1; j < k; ++j) x(i, j) = rng.next_normal();
    double mean = 0.0;
    for (int j = 0; j < k; ++j) mean += x(i, j) * truth[static_cast<std::size_t>(j)];
    y[static_cast<std::size_t>(i)] = mean + 0.5 * rng.next_normal();
  }
  const LinearFit fit = fit_ols(x, y);
  std::vector<double> expansion(static_cast<std::size_t>(k), 0.0);
  for (int i = 0; i < n; ++i) {
    double e = y[static_cast<std::size_t>(i)];
    for (int j = 0; j < k; ++j) e -= x(i, j) * truth[static_cast<std::size_t>(j)];
    for (int a = 0; a < k; ++a) {
      double g = 0.0;
      for (int b = 0; b < k; ++b)
        g += fit.gram_inverse[static_cast<std::size_t>(a) * k + b] * x(i, b);
      expansion[static_cast<std::size_t>(a)] += g * e / n;
    }
  }
  for (int j = 0; j < k; ++j) {
    CHECK(std::fabs(fit.coefficients[static_cast<std::size_t>(j)] - truth[static_cast<std::size_t>(j)] -
                    expansion[static_cast<std::size_t>(j)]) < 1e-10);
  }
}

TEST_CASE("ols rejects a rank-deficient design naming the dependent column") {
  Matrix x(10, 3);
  RngStream rng(3, 0);
  for (int i = 0; i < 10; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = rng.next_normal();
    x(i, 2) = 2.0 * x(i, 1);  // exact duplicate direction
  }
  std::vector<double> y(10, 1.0);
  CHECK_THROWS_WITH_AS(fit_ols(x, y),
                       doctest::Contains("column 2"), NumericalError);
}

TEST_CASE("logistic slope equals the closed-form log odds ratio on a 2x2 table") {
  // Group x=0: 3 successes, 7 failures.  Group x=1: 8 successes, 2 failures.
  // MLE: intercept = logit(0.3), slope = logit(0.8) - logit(0.3).
  Matrix x(20, 2);
  std::vector<double> c(20, 0.0);
  int r = 0;
  for (int i = 0; i < 10; ++i, ++r) {
    x(r, 0) = 1.0; x(r, 1) = 0.0;
    c[static_cast<std::size_t>(r)] = i < 3 ? 1.0 : 0.0;
  }
  for (int i = 0; i < 10; ++i, ++r) {
    x(r, 0) = 1.0; x(r, 1) = 1.0;
    c[static_cast<std::size_t>(r)] = i < 8 ? 1.0 : 0.0;
  }
  const LogisticFit fit = fit_logistic(x, c);
  CHECK(fit.converged);
  const double logit_p0 = std::log(0.3 / 0.7);
  const double logit_p1 = std::log(0.8 / 0.2);
  CHECK(std::fabs(fit.coefficients[0] - logit_p0) < 1e-6);
  CHECK(std::fabs(fit.coefficients[1] - (logit_p1 - logit_p0)) < 1e-6);
}

TEST_CASE("logistic fit is never beaten by a random coefficient scan") {
  RngStream rng(21, 0);
  const int n = 120, k = 3;
  Matrix x(n, k);
  std::vector<double> c(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = rng.next_normal();
    x(i, 2) = rng.next_normal();
    const double p = expit(0.4 + 0.8 * x(i, 1) - 0.5 * x(i, 2));
    c[static_cast<std::size_t>(i)] = rng.next_double() < p ? 1.0 : 0.0;
  }
  const LogisticFit fit = fit_logistic(x, c);
  CHECK(fit.converged);
  RngStream scan(22, 0);
  for (int s = 0; s < 10000; ++s) {
    std::vector<double> beta(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) beta[static_cast<std::size_t>(j)] = 4.0 * (scan.next_double() - 0.5);
    CHECK(bernoulli_loglik(x, c, beta) <= fit.log_likelihood + 1e-6);
  }
}

TEST_CASE("logistic separation triggers the flagged ridge retry") {
  // Perfectly separated: label = 1 exactly when x > 0.
  Matrix x(20, 2);
  std::vector<double> c(20);
  RngStream rng(5, 0);
  for (int i = 0; i < 20; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = rng.next_normal();
    c[static_cast<std::size_t>(i)] = x(i, 1) > 0.0 ? 1.0 : 0.0;
  }
  const LogisticFit fit = fit_logistic(x, c);
  CHECK(fit.separation_retry);
  CHECK(fit.ridge == doctest::Approx(1e-4));
  for (double b : fit.coefficients) CHECK(std::isfinite(b));
}

TEST_CASE("logistic label flip negates the coefficients") {
  RngStream rng(31, 0);
  const int n = 100;
  Matrix x(n, 2);
  std::vector<double> c(n), flipped(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = rng.next_normal();
    const double p = expit(0.3 + 0.6 * x(i, 1));
    c[static_cast<std::size_t>(i)] = rng.next_double() < p ? 1.0 : 0.0;
    flipped[static_cast<std::size_t>(i)] = 1.0 - c[static_cast<std::size_t>(i)];
  }
  const LogisticFit a = fit_logistic(x, c);
  const LogisticFit b = fit_logistic(x, flipped);
  REQUIRE(a.converged);
  REQUIRE(b.converged);
  CHECK(std::fabs(a.coefficients[0] + b.coefficients[0]) < 1e-6);
  CHECK(std::fabs(a.coefficients[1] + b.coefficients[1]) < 1e-6);
}

TEST_CASE("minimize_nd solves a piecewise objective to grid-scan accuracy") {
  // f(u) = max(|u - 1|, 0.5) has the flat minimum 0.5 on [0.5, 1.5]; a
  // 1e-3 grid scan over [-2, 4] is the oracle.
  auto f = [](const std::vector<double>& u) { return std::max(std::fabs(u[0] - 1.0), 0.5); };
  double scan_best = 1e300;
  for (int i = 0; i <= 6000; ++i) {
    const double u = -2.0 + i * 1e-3;
    scan_best = std::min(scan_best, std::max(std::fabs(u - 1.0), 0.5));
  }
  const std::vector<double> got = minimize_nd(f, {-1.5}, 1.0);
  CHECK(f(got) <= scan_best + 1e-9);
  CHECK(got[0] > 0.5 - 1e-2);
  CHECK(got[0] < 1.5 + 1e-2);
}

TEST_CASE("minimize_nd never returns a point worse than the start") {
  // A narrow curved valley; whatever happens inside, the contract is that the
  // returned objective is <= the starting objective.
  auto f = [](const std::vector<double>& u) {
    const double a = u[0], b = u[1];
    return 100.0 * (b - a * a) * (b - a * a) + (1.0 - a) * (1.0 - a);
  };
  const std::vector<double> start = {-1.2, 1.0};
  const std::vector<double> got = minimize_nd(f, start, 0.5);
  CHECK(f(got) <= f(start));
  CHECK(f(got) < 1.0);  // should make real progress on a smooth problem
}

TEST_CASE("minimize_nd reports the offending point on a non-finite objective") {
  auto f = [](const std::vector<double>& u) {
    return u[0] > 0.5 ? std::numeric_limits<double>::infinity() : u[0];
  };
  CHECK_THROWS_AS(minimize_nd(f, {0.0}, 1.0), NumericalError);
}

TEST_CASE("rng streams are deterministic and mutually unlike") {
  RngStream a(42, 0), b(42, 0), c(42, 1);
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t va = a.next_u64();
    CHECK(va == b.next_u64());
  }
  // Correlation between two streams of uniforms should be near zero.
  RngStream s0(42, 0), s1(42, 1);
  const int n = 20000;
  double sum0 = 0, sum1 = 0, sum00 = 0, sum11 = 0, sum01 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = s0.next_double(), v = s1.next_double();
    sum0 += u; sum1 += v; sum00 += u * u; sum11 += v * v; sum01 += u * v;
  }
  const double m0 = sum0 / n, m1 = sum1 / n;
  const double corr = (sum01 / n - m0 * m1) /
      std::sqrt((sum00 / n - m0 * m0) * (sum11 / n - m1 * m1));
  CHECK(std::fabs(corr) < 0.03);
  CHECK(std::fabs(m0 - 0.5) < 0.01);
  (void)c;
}

TEST_CASE("rng normals have the right first two moments") {
  RngStream rng(9, 4);
  const int n = 100000;
  double sum = 0, sum2 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.next_normal();
    sum += z;
    sum2 += z * z;
  }
  CHECK(std::fabs(sum / n) < 0.02);
  CHECK(std::fabs(sum2 / n - 1.0) < 0.05);
}

TEST_CASE("mvn_draw with identity root reproduces the identity covariance") {
  const int dim = 3;
  std::vector<double> eye(9, 0.0);
  eye[0] = eye[4] = eye[8] = 1.0;
  RngStream rng(77, 0);
  const int n = 100000;
  std::vector<double> acc(9, 0.0);
  for (int i = 0; i < n; ++i) {
    const std::vector<double> z = mvn_draw(eye, dim, rng);
    for (int a = 0; a < dim; ++a)
      for (int b = 0; b < dim; ++b)
        acc[static_cast<std::size_t>(a) * dim + b] += z[static_cast<std::size_t>(a)] * z[static_cast<std::size_t>(b)];
  }
  for (int a = 0; a < dim; ++a) {
    for (int b = 0; b < dim; ++b) {
      const double want = a == b ? 1.0 : 0.0;
      CHECK(std::fabs(acc[static_cast<std::size_t>(a) * dim + b] / n - want) < 0.05);
    }
  }
}

TEST_CASE("sym_sqrt_psd squares back and clips negative eigenvalues") {
  // Build A = V diag(2, 0.5, -0.1) V^T; the root must reproduce the clipped
  // matrix V diag(2, 0.5, 0) V^T when squared.
  const double ang = 0.7;
  std::vector<double> v = {std::cos(ang), -std::sin(ang), 0.0,
                           std::sin(ang),  std::cos(ang), 0.0,
                           0.0, 0.0, 1.0};
  const std::vector<double> lam = {2.0, 0.5, -0.1};
  const std::vector<double> lam_clip = {2.0, 0.5, 0.0};
  auto reconstruct = [&](const std::vector<double>& d) {
    std::vector<double> m(9, 0.0);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int l = 0; l < 3; ++l)
          m[static_cast<std::size_t>(i) * 3 + j] += v[static_cast<std::size_t>(i) * 3 + l] *
              d[static_cast<std::size_t>(l)] * v[static_cast<std::size_t>(j) * 3 + l];
    return m;
  };
  const std::vector<double> a = reconstruct(lam);
  const std::vector<double> want = reconstruct(lam_clip);
  const std::vector<double> root = sym_sqrt_psd(a, 3);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int l = 0; l < 3; ++l)
        s += root[static_cast<std::size_t>(i) * 3 + l] * root[static_cast<std::size_t>(l) * 3 + j];
      CHECK(std::fabs(s - want[static_cast<std::size_t>(i) * 3 + j]) < 1e-8);
    }
  }
}

TEST_CASE("spd_inverse inverts a small symmetric system") {
  std::vector<double> m = {4.0, 1.0, 0.5,
                           1.0, 3.0, 0.2,
                           0.5, 0.2, 2.0};
  const std::vector<double> inv = spd_inverse(m, 3);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int l = 0; l < 3; ++l)
        s += m[static_cast<std::size_t>(i) * 3 + l] * inv[static_cast<std::size_t>(l) * 3 + j];
      CHECK(std::fabs(s - (i == j ? 1.0 : 0.0)) < 1e-8);
    }
  }
}

TEST_CASE("expit and log1pexp stay finite across the double range") {
  CHECK(expit(1000.0) == doctest::Approx(1.0));
  CHECK(expit(-1000.0) == doctest::Approx(0.0));
  CHECK(expit(0.0) == doctest::Approx(0.5));
  CHECK(std::isfinite(log1pexp(800.0)));
  CHECK(log1pexp(800.0) == doctest::Approx(800.0));
  CHECK(log1pexp(-800.0) == doctest::Approx(0.0));
  CHECK(log1pexp(0.0) == doctest::Approx(std::log(2.0)));
  CHECK(sign_tie_positive(0.0) == 1);
  CHECK(sign_tie_positive(-0.0) == 1);
  CHECK(sign_tie_positive(-1e-300) == -1);
}
