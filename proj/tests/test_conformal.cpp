#include <doctest.h>

#include <cmath>
#include <limits>

#include "test_support.hpp"

using namespace panelcp;
using namespace testsupport;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("abs residual score") {
  // Single constant-target fit gives a predictor identically equal to 1.5.
  const std::vector<double> x{1.0};
  const auto pred = fit_ridge(x, std::vector<double>{1.5}, 1, 0, 1.0, RidgeMode::realdata);
  CHECK(pred.predict(x) == doctest::Approx(1.5));
  CHECK(abs_residual_score(x, 1.5, pred) == doctest::Approx(0.0));
  CHECK(abs_residual_score(x, 3.0, pred) == doctest::Approx(1.5));
  const double c = 0.73;
  CHECK(abs_residual_score(x, 1.5 + c, pred) ==
        doctest::Approx(abs_residual_score(x, 1.5 - c, pred)));
}

TEST_CASE("weighted quantile worked examples") {
  const std::vector<double> scores{1.0, 2.0, 3.0};
  const std::vector<double> uniform4(4, 0.25);

  SUBCASE("cumulative weight reaches the level at the third score") {
    const auto t = weighted_quantile(scores, uniform4, 0.75);
    CHECK(t.kind == ThresholdKind::finite);
    CHECK(t.value == 3.0);
  }
  SUBCASE("level above one yields the full line") {
    const auto t = weighted_quantile(scores, uniform4, 1.2);
    CHECK(t.kind == ThresholdKind::full_line);
    CHECK(t.value == kInf);
  }
  SUBCASE("level at or below zero yields the empty set") {
    CHECK(weighted_quantile(scores, uniform4, 0.0).kind == ThresholdKind::empty_set);
    CHECK(weighted_quantile(scores, uniform4, -0.1).value == -kInf);
  }
  SUBCASE("only the sentinel mass attains the level") {
    const std::vector<double> two{1.0, 2.0};
    const std::vector<double> thirds(3, 1.0 / 3.0);
    const auto t = weighted_quantile(two, thirds, 0.8);
    CHECK(t.kind == ThresholdKind::sentinel);
    CHECK(t.value == kInf);
  }
}

TEST_CASE("weighted quantile input validation") {
  const std::vector<double> scores{1.0, 2.0};
  CHECK_THROWS(weighted_quantile(scores, std::vector<double>{0.5, 0.2, 0.2}, 0.5));
  CHECK_THROWS(weighted_quantile(scores, std::vector<double>{0.5, 0.6, -0.1}, 0.5));
  CHECK_THROWS(weighted_quantile(scores, std::vector<double>{0.5, 0.25, std::nan("")}, 0.5));
  CHECK_THROWS(weighted_quantile(std::vector<double>{1.0, std::nan("")},
                                 std::vector<double>{0.4, 0.3, 0.3}, 0.5));
  // Drift within 1e-9 is renormalized rather than rejected.
  const auto t =
      weighted_quantile(scores, std::vector<double>{0.5 + 4e-10, 0.25, 0.25}, 0.5);
  CHECK(t.kind == ThresholdKind::finite);
}

TEST_CASE("weighted quantile equals the brute-force oracle") {
  Rng rng(1234, 0);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto n = 1 + rng.uniform_index(20);
    std::vector<double> scores(n);
    for (auto& s : scores)
      s = rng.uniform() < 0.3 ? std::floor(rng.uniform(0, 5)) : rng.uniform(0, 10);
    const auto weights = random_simplex(rng, n + 1);
    const double level = rng.uniform(-0.2, 1.2);
    const auto got = weighted_quantile(scores, weights, level);
    const auto want = oracle_quantile(scores, weights, level);
    REQUIRE(same_threshold(got, want));
  }
}

TEST_CASE("uniform weights reduce to the order statistic") {
  Rng rng(77, 0);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto n = 1 + rng.uniform_index(25);
    std::vector<double> scores(n);
    for (auto& s : scores) s = rng.uniform(0, 6);
    const double alpha = rng.uniform(0.01, 0.7);
    const auto t =
        weighted_quantile(scores, uniform_weights(static_cast<int>(n) + 1), 1.0 - alpha);
    const auto k = static_cast<std::size_t>(
        std::ceil((static_cast<double>(n) + 1.0) * (1.0 - alpha)));
    std::vector<double> sorted(scores);
    std::sort(sorted.begin(), sorted.end());
    if (k <= n) {
      REQUIRE(t.kind == ThresholdKind::finite);
      REQUIRE(t.value == sorted[k - 1]);
    } else {
      REQUIRE(t.kind == ThresholdKind::sentinel);
    }
  }
}

TEST_CASE("threshold monotone in the level and under mass shifts") {
  Rng rng(9, 0);
  const auto as_value = [](const Threshold& t) {
    switch (t.kind) {
      case ThresholdKind::empty_set: return -kInf;
      case ThresholdKind::finite: return t.value;
      default: return kInf;
    }
  };
  for (int trial = 0; trial < 300; ++trial) {
    const auto n = 2 + rng.uniform_index(10);
    std::vector<double> scores(n);
    for (auto& s : scores) s = rng.uniform(0, 10);
    auto weights = random_simplex(rng, n + 1);
    const double l1 = rng.uniform(-0.1, 1.1);
    const double l2 = rng.uniform(-0.1, 1.1);
    const double lo = std::min(l1, l2), hi = std::max(l1, l2);
    CHECK(as_value(weighted_quantile(scores, weights, lo)) <=
          as_value(weighted_quantile(scores, weights, hi)));

    // Move some weight from a smaller score to a larger one.
    std::size_t a = rng.uniform_index(n), b = rng.uniform_index(n);
    if (scores[a] > scores[b]) std::swap(a, b);
    if (a == b) continue;
    const double level = rng.uniform(0.05, 0.95);
    const auto before = as_value(weighted_quantile(scores, weights, level));
    const double moved = weights[a] * rng.uniform();
    weights[a] -= moved;
    weights[b] += moved;
    CHECK(before <= as_value(weighted_quantile(scores, weights, level)));
  }
}

TEST_CASE("finite-width deployment") {
  const std::vector<double> scores{1.0, 2.7, 5.1};
  const auto weights = uniform_weights(4);

  SUBCASE("adaptive level below the floor is projected") {
    const auto raw = weighted_quantile(scores, weights, 1.0 - 0.005);
    const auto dep = deploy_finite(raw, scores, weights, 0.005);
    CHECK(dep.level == doctest::Approx(0.01));
    CHECK(std::isfinite(dep.half_width));
  }
  SUBCASE("finite raw threshold passes through") {
    const auto raw = weighted_quantile(scores, weights, 1.0 - 0.5);
    REQUIRE(raw.kind == ThresholdKind::finite);
    CHECK(raw.value == 2.7);
    const auto dep = deploy_finite(raw, scores, weights, 0.5);
    CHECK(dep.level == 0.5);
    CHECK(dep.half_width == 2.7);
    CHECK(dep.kind == ThresholdKind::finite);
  }
  SUBCASE("sentinel selection deploys the largest calibration score") {
    const std::vector<double> w{0.2, 0.2, 0.2, 0.4};
    const auto raw = weighted_quantile(scores, w, 0.9);
    REQUIRE(raw.kind == ThresholdKind::sentinel);
    const auto dep = deploy_finite(raw, scores, w, 0.1);
    CHECK(dep.half_width == 5.1);
    CHECK(dep.kind == ThresholdKind::sentinel);
  }
  SUBCASE("always finite on random inputs") {
    Rng rng(42, 1);
    for (int trial = 0; trial < 300; ++trial) {
      const auto n = 1 + rng.uniform_index(8);
      std::vector<double> s(n);
      for (auto& v : s) v = rng.uniform(0, 4);
      const auto w = random_simplex(rng, n + 1);
      const double alpha = rng.uniform(-0.3, 1.3);
      const auto raw = weighted_quantile(s, w, 1.0 - alpha);
      const auto dep = deploy_finite(raw, s, w, alpha);
      REQUIRE(std::isfinite(dep.half_width));
      REQUIRE(dep.level >= 0.01);
      REQUIRE(dep.level <= 0.99);
    }
  }
}

TEST_CASE("prediction records and coverage resolution") {
  const Deployed dep{0.1, 1.0, ThresholdKind::finite};
  const Threshold raw{1.0, ThresholdKind::finite};
  auto rec = build_record(0.0, dep, raw, 0.1);
  CHECK(rec.lo() == -1.0);
  CHECK(rec.hi() == 1.0);
  CHECK(rec.covered == -1);

  SUBCASE("closed interval covers its endpoint") {
    resolve_coverage(rec, 1.0);
    CHECK(rec.covered == 1);
    resolve_coverage(rec, 1.0 + 1e-9);
    CHECK(rec.covered == 0);
  }
  SUBCASE("degenerate point interval") {
    auto point = build_record(2.0, Deployed{0.1, 0.0, ThresholdKind::finite},
                              Threshold{0.0, ThresholdKind::finite}, 0.1);
    resolve_coverage(point, 2.0);
    CHECK(point.covered == 1);
    resolve_coverage(point, 2.0000001);
    CHECK(point.covered == 0);
  }
  SUBCASE("raw-set loss follows the set semantics") {
    rec.raw_kind = ThresholdKind::empty_set;
    CHECK(raw_loss(rec, 0.0) == 1);
    rec.raw_kind = ThresholdKind::full_line;
    CHECK(raw_loss(rec, 1e9) == 0);
    rec.raw_kind = ThresholdKind::sentinel;
    CHECK(raw_loss(rec, 1e9) == 0);
    rec.raw_kind = ThresholdKind::finite;
    rec.raw_value = 1.0;
    CHECK(raw_loss(rec, 0.5) == 0);
    CHECK(raw_loss(rec, 2.5) == 1);
  }
}

TEST_CASE("finite-width convention weakly decreases coverage") {
  // Paired raw/projected coverage flags from full engine runs: whenever they
  // differ, the projected interval must be the one that misses.
  Rng rng(5150, 0);
  int differing = 0;
  for (int trial = 0; trial < 20; ++trial) {
    Rng trial_rng = rng.split(static_cast<std::uint64_t>(trial));
    const int n_units = 4 + static_cast<int>(trial_rng.uniform_index(5));
    Panel panel = iid_panel(trial_rng, n_units, 60, 2, 15);
    const auto split = last_unit_split(n_units);
    const auto predictor = fit_burn_in(panel, split);
    MethodConfig mc;
    mc.kind = MethodKind::wtqa;
    mc.alpha = trial_rng.uniform(0.05, 0.3);
    mc.gamma = trial_rng.uniform(0.01, 0.05);
    const auto schedule =
        mcar_schedule(trial_rng.uniform(), panel.conformal_rounds(), trial_rng.next_u64());
    const auto run = run_engine(panel, split, n_units - 1, schedule, mc, predictor);
    for (const auto& rec : run.records) {
      REQUIRE(std::isfinite(rec.half_width));
      if (rec.covered != rec.raw_covered) {
        ++differing;
        REQUIRE(rec.raw_covered == 1);
        REQUIRE(rec.covered == 0);
      }
    }
  }
  CHECK(differing > 0);  // the projection actually bites somewhere
}
