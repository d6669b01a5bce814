#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "panelcp/predictor.hpp"
#include "panelcp/rng.hpp"

using namespace panelcp;

namespace {

// Independent ridge oracle on the scaled, uncentered design used by the
// synthetic mode with f_dim = 0: solve (D'D + lambda I) w = D'y by Gaussian
// elimination with partial pivoting.
std::vector<double> oracle_ridge(const std::vector<double>& rows,
                                 const std::vector<double>& y, int d, double lambda) {
  const std::size_t n = y.size();
  std::vector<double> scale(static_cast<std::size_t>(d), 0.0);
  for (int j = 0; j < d; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += rows[i * d + j];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dev = rows[i * d + j] - mean;
      var += dev * dev;
    }
    scale[static_cast<std::size_t>(j)] =
        std::max(std::sqrt(var / static_cast<double>(n)), 1e-12);
  }
  std::vector<double> a(static_cast<std::size_t>(d) * d, 0.0);
  std::vector<double> b(static_cast<std::size_t>(d), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (int p = 0; p < d; ++p) {
      const double xp = rows[i * d + p] / scale[static_cast<std::size_t>(p)];
      b[static_cast<std::size_t>(p)] += xp * y[i];
      for (int q = 0; q < d; ++q)
        a[static_cast<std::size_t>(p) * d + q] +=
            xp * rows[i * d + q] / scale[static_cast<std::size_t>(q)];
    }
  }
  for (int p = 0; p < d; ++p) a[static_cast<std::size_t>(p) * d + p] += lambda;
  // Gaussian elimination.
  for (int col = 0; col < d; ++col) {
    int pivot = col;
    for (int r = col + 1; r < d; ++r)
      if (std::abs(a[static_cast<std::size_t>(r) * d + col]) >
          std::abs(a[static_cast<std::size_t>(pivot) * d + col]))
        pivot = r;
    for (int c = 0; c < d; ++c)
      std::swap(a[static_cast<std::size_t>(col) * d + c],
                a[static_cast<std::size_t>(pivot) * d + c]);
    std::swap(b[static_cast<std::size_t>(col)], b[static_cast<std::size_t>(pivot)]);
    for (int r = col + 1; r < d; ++r) {
      const double f = a[static_cast<std::size_t>(r) * d + col] /
                       a[static_cast<std::size_t>(col) * d + col];
      for (int c = col; c < d; ++c)
        a[static_cast<std::size_t>(r) * d + c] -=
            f * a[static_cast<std::size_t>(col) * d + c];
      b[static_cast<std::size_t>(r)] -= f * b[static_cast<std::size_t>(col)];
    }
  }
  std::vector<double> w(static_cast<std::size_t>(d), 0.0);
  for (int r = d - 1; r >= 0; --r) {
    double acc = b[static_cast<std::size_t>(r)];
    for (int c = r + 1; c < d; ++c)
      acc -= a[static_cast<std::size_t>(r) * d + c] * w[static_cast<std::size_t>(c)];
    w[static_cast<std::size_t>(r)] = acc / a[static_cast<std::size_t>(r) * d + r];
  }
  return w;
}

}  // namespace

TEST_CASE("ridge recovers exact linear data at lambda 0") {
  Rng rng(21, 0);
  const int d = 4, n = 40;
  std::vector<double> rows(static_cast<std::size_t>(n) * d), y(n);
  const std::vector<double> beta{1.5, -2.0, 0.25, 3.0};
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < d; ++j) {
      rows[static_cast<std::size_t>(i) * d + j] = rng.normal();
      acc += beta[static_cast<std::size_t>(j)] * rows[static_cast<std::size_t>(i) * d + j];
    }
    y[static_cast<std::size_t>(i)] = acc;
  }
  SUBCASE("realdata mode") {
    const auto p = fit_ridge(rows, y, d, 0, 0.0, RidgeMode::realdata);
    for (int i = 0; i < n; ++i) {
      std::vector<double> x(rows.begin() + static_cast<std::size_t>(i) * d,
                            rows.begin() + static_cast<std::size_t>(i + 1) * d);
      CHECK(std::abs(p.predict(x) - y[static_cast<std::size_t>(i)]) < 1e-8);
    }
  }
  SUBCASE("synthetic mode without factors") {
    const auto p = fit_ridge(rows, y, d, 0, 0.0, RidgeMode::synthetic_factor);
    for (int i = 0; i < n; ++i) {
      std::vector<double> x(rows.begin() + static_cast<std::size_t>(i) * d,
                            rows.begin() + static_cast<std::size_t>(i + 1) * d);
      CHECK(std::abs(p.predict(x) - y[static_cast<std::size_t>(i)]) < 1e-8);
    }
  }
}

TEST_CASE("huge penalty shrinks coefficients to zero") {
  Rng rng(22, 0);
  const int d = 3, n = 30;
  std::vector<double> rows(static_cast<std::size_t>(n) * d), y(n);
  for (auto& v : rows) v = rng.normal();
  for (auto& v : y) v = rng.normal();
  const auto p = fit_ridge(rows, y, d, 0, 1e12, RidgeMode::synthetic_factor);
  double norm = 0.0;
  for (double c : p.coef) norm += c * c;
  CHECK(std::sqrt(norm) < 1e-6);
}

TEST_CASE("ridge matches the normal-equations oracle") {
  Rng rng(23, 0);
  for (int trial = 0; trial < 25; ++trial) {
    const int d = 3, n = 5;
    std::vector<double> rows(static_cast<std::size_t>(n) * d), y(n);
    for (auto& v : rows) v = rng.uniform(-2, 2);
    for (auto& v : y) v = rng.uniform(-2, 2);
    const auto p = fit_ridge(rows, y, d, 0, 10.0, RidgeMode::synthetic_factor);
    const auto w = oracle_ridge(rows, y, d, 10.0);
    for (int j = 0; j < d; ++j)
      REQUIRE(std::abs(p.coef[static_cast<std::size_t>(j)] -
                       w[static_cast<std::size_t>(j)]) < 1e-8);
  }
}

TEST_CASE("singular system without penalty is rejected") {
  // Two identical columns.
  const std::vector<double> rows{1.0, 1.0, 2.0, 2.0, 3.0, 3.0};
  const std::vector<double> y{1.0, 2.0, 3.0};
  CHECK_THROWS_WITH_AS(fit_ridge(rows, y, 2, 0, 0.0, RidgeMode::realdata),
                       doctest::Contains("lambda > 0"), std::invalid_argument);
}

TEST_CASE("factor-mode prediction layout") {
  // y = 2 x1 + (3 x1) f1, single covariate, single factor.
  Rng rng(24, 0);
  const int n = 50;
  std::vector<double> rows(static_cast<std::size_t>(n) * 2), y(n);
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal(), f = rng.normal();
    rows[static_cast<std::size_t>(i) * 2] = x;
    rows[static_cast<std::size_t>(i) * 2 + 1] = f;
    y[static_cast<std::size_t>(i)] = 2.0 * x + 3.0 * x * f;
  }
  const auto p = fit_ridge(rows, y, 1, 1, 0.0, RidgeMode::synthetic_factor);
  for (int i = 0; i < 5; ++i) {
    const std::vector<double> x{rows[static_cast<std::size_t>(i) * 2]};
    const std::vector<double> f{rows[static_cast<std::size_t>(i) * 2 + 1]};
    CHECK(std::abs(p.predict(x, f) - y[static_cast<std::size_t>(i)]) < 1e-8);
  }
  CHECK_THROWS(p.predict(std::vector<double>{1.0}, std::vector<double>{}));
  // Manual evaluation: prediction is linear in the scaled inputs.
  const double xs = 0.4 / p.scales[0], fs = -1.1 / p.scales[1];
  const double manual = p.coef[0] * xs + p.coef[1] * xs * fs;
  CHECK(p.predict(std::vector<double>{0.4}, std::vector<double>{-1.1}) ==
        doctest::Approx(manual).epsilon(1e-12));
}

TEST_CASE("zero inputs predict zero in uncentered mode") {
  const std::vector<double> rows{1.0, 2.0, -1.0, 1.0};
  const std::vector<double> y{1.0, -1.0};
  const auto p = fit_ridge(rows, y, 2, 0, 0.5, RidgeMode::synthetic_factor);
  CHECK(p.predict(std::vector<double>{0.0, 0.0}) == doctest::Approx(0.0));
}

TEST_CASE("pinball regression") {
  SUBCASE("constant target is recovered") {
    const std::vector<double> rows(20, 0.0);  // single zero feature
    const std::vector<double> y(20, 0.7);
    for (double tau : {0.1, 0.5, 0.9}) {
      const auto m = fit_pinball(rows, y, 1, tau);
      CHECK(std::abs(m.intercept - 0.7) < 1e-2);
      CHECK(m.final_objective <= m.initial_objective + 1e-15);
    }
  }
  SUBCASE("median of symmetric +-1 targets is zero") {
    std::vector<double> rows(40, 0.0), y(40);
    for (int i = 0; i < 40; ++i) y[static_cast<std::size_t>(i)] = i % 2 == 0 ? 1.0 : -1.0;
    const auto m = fit_pinball(rows, y, 1, 0.5);
    CHECK(std::abs(m.intercept) < 1e-2);
  }
  SUBCASE("feature-free tails of symmetric +-1 targets") {
    std::vector<double> rows(40, 0.0), y(40);
    for (int i = 0; i < 40; ++i) y[static_cast<std::size_t>(i)] = i % 2 == 0 ? 1.0 : -1.0;
    CHECK(std::abs(fit_pinball(rows, y, 1, 0.05).intercept - (-1.0)) < 0.05);
    CHECK(std::abs(fit_pinball(rows, y, 1, 0.95).intercept - 1.0) < 0.05);
  }
  SUBCASE("intercept-only fit tracks the empirical quantile") {
    Rng rng(25, 0);
    const int n = 1000;
    std::vector<double> rows(n, 0.0), y(n);
    for (auto& v : y) v = rng.normal();
    const auto m = fit_pinball(rows, y, 1, 0.95);
    std::vector<double> sorted(y);
    std::sort(sorted.begin(), sorted.end());
    const double pos = 0.95 * (n - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const double oracle =
        sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
    CHECK(std::abs(m.intercept - oracle) < 0.1);
  }
  SUBCASE("objective never increases against the start") {
    Rng rng(26, 0);
    const int n = 200, d = 3;
    std::vector<double> rows(static_cast<std::size_t>(n) * d), y(n);
    for (auto& v : rows) v = rng.normal();
    for (auto& v : y) v = rng.normal(0.0, 2.0);
    for (double tau : {0.05, 0.5, 0.95}) {
      const auto m = fit_pinball(rows, y, d, tau);
      CHECK(m.final_objective <= m.initial_objective + 1e-15);
    }
  }
  SUBCASE("row cap keeps the most recent rows") {
    const std::size_t n = 400;
    std::vector<double> rows(n, 0.0), y(n, 100.0);
    for (std::size_t i = n - 100; i < n; ++i) y[i] = 0.0;
    const auto m = fit_pinball(rows, y, 1, 0.5, 300, 0.05, 1e-4, /*row_cap=*/100);
    CHECK(std::abs(m.intercept) < 1e-2);
  }
  SUBCASE("bad inputs") {
    CHECK_THROWS(fit_pinball({}, {}, 1, 0.5));
    const std::vector<double> rows{0.0};
    const std::vector<double> y{1.0};
    CHECK_THROWS(fit_pinball(rows, y, 1, 0.0));
    CHECK_THROWS(fit_pinball(rows, y, 1, 1.0));
  }
}
