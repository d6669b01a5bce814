#include <doctest.h>

#include <cmath>

#include "test_support.hpp"

using namespace panelcp;
using namespace testsupport;

namespace {

// Panel whose calibration outcomes at every conformal round are fixed values
// against a zero predictor (burn-in outcomes are all zero), so calibration
// scores are |values| exactly.
Panel scripted_panel(const std::vector<double>& calib_values, int horizon, int burn_in,
                     double target_value = 0.0) {
  const int n = static_cast<int>(calib_values.size()) + 1;
  Panel p;
  p.n_units = n;
  p.horizon = horizon;
  p.feature_dim = 1;
  p.burn_in_end = burn_in;
  p.features.assign(static_cast<std::size_t>(n) * horizon, 0.0);
  p.outcomes.assign(static_cast<std::size_t>(n) * horizon, 0.0);
  for (int i = 0; i + 1 < n; ++i)
    for (int t = burn_in; t < horizon; ++t)
      p.outcomes[static_cast<std::size_t>(i) * horizon + t] =
          calib_values[static_cast<std::size_t>(i)];
  for (int t = burn_in; t < horizon; ++t)
    p.outcomes[static_cast<std::size_t>(n - 1) * horizon + t] = target_value;
  // Distinct burn-in features so the ridge fit is nondegenerate (all-zero
  // outcomes still give the zero predictor).
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < burn_in; ++t)
      p.features[static_cast<std::size_t>(i) * horizon + t] = 0.1 * (i + t + 1);
  return p;
}

Predictor zero_predictor(const Panel& panel, const UnitSplit& split) {
  return fit_burn_in(panel, split, 1.0);
}

}  // namespace

TEST_CASE("first round of the weighted method matches split conformal") {
  Rng rng(61, 0);
  const Panel panel = iid_panel(rng, 8, 30, 2, 10);
  const auto split = last_unit_split(8);
  const auto pred = fit_burn_in(panel, split);
  const auto schedule = full_schedule(panel.conformal_rounds());

  MethodConfig wtqa_cfg;
  wtqa_cfg.kind = MethodKind::wtqa;
  MethodConfig split_cfg;
  split_cfg.kind = MethodKind::split_cp;
  auto wtqa_state = make_method_state(wtqa_cfg, 7, 2);
  auto split_state = make_method_state(split_cfg, 7, 2);
  const auto batch = stream_round(panel, split, 7, schedule, 10);
  const auto a = method_step(wtqa_state, batch, pred);
  const auto b = method_step(split_state, batch, pred);
  CHECK(a.center == b.center);
  CHECK(a.half_width == b.half_width);
  CHECK(a.deployed_level == b.deployed_level);
}

TEST_CASE("cumulative-weight scan worked examples") {
  SUBCASE("two scores at level 0.6") {
    const Panel panel = scripted_panel({1.0, 2.0}, 12, 8);
    const auto split = last_unit_split(3);
    const auto pred = zero_predictor(panel, split);
    MethodConfig mc;
    mc.kind = MethodKind::split_cp;
    mc.alpha = 0.4;
    auto state = make_method_state(mc, 2, 1);
    const auto rec =
        method_step(state, stream_round(panel, split, 2, full_schedule(4), 8), pred);
    CHECK(rec.half_width == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(rec.deployed_level == 0.4);
  }
  SUBCASE("nine scores at level 0.9") {
    const Panel panel = scripted_panel({1, 2, 3, 4, 5, 6, 7, 8, 9}, 12, 8);
    const auto split = last_unit_split(10);
    const auto pred = zero_predictor(panel, split);
    MethodConfig mc;
    mc.kind = MethodKind::split_cp;
    mc.alpha = 0.1;
    auto state = make_method_state(mc, 9, 1);
    const auto rec =
        method_step(state, stream_round(panel, split, 9, full_schedule(4), 8), pred);
    CHECK(rec.half_width == doctest::Approx(9.0).epsilon(1e-12));
  }
}

TEST_CASE("p = 0 equivalences are interval-for-interval") {
  Rng rng(62, 0);
  const int n_units = 12;
  const Panel panel = iid_panel(rng, n_units, 80, 3, 20);
  const auto split = last_unit_split(n_units, 2);
  const auto pred = fit_burn_in(panel, split);
  const auto schedule = mcar_schedule(0.0, panel.conformal_rounds(), 1);

  for (int target : split.test_ids) {
    const auto run_kind = [&](MethodKind kind) {
      MethodConfig mc;
      mc.kind = kind;
      return run_engine(panel, split, target, schedule, mc, pred).records;
    };
    const auto wtqa = run_kind(MethodKind::wtqa);
    const auto w_only = run_kind(MethodKind::w_only);
    const auto tqa_only = run_kind(MethodKind::tqa_only);
    const auto split_cp = run_kind(MethodKind::split_cp);
    for (std::size_t t = 0; t < wtqa.size(); ++t) {
      REQUIRE(wtqa[t].center == w_only[t].center);
      REQUIRE(wtqa[t].half_width == w_only[t].half_width);
      REQUIRE(tqa_only[t].center == split_cp[t].center);
      REQUIRE(tqa_only[t].half_width == split_cp[t].half_width);
    }
  }
}

TEST_CASE("traces are bit-identical across identical runs") {
  Rng rng(63, 0);
  const Panel panel = iid_panel(rng, 10, 50, 2, 15);
  const auto split = last_unit_split(10);
  const auto pred = fit_burn_in(panel, split);
  const auto schedule = mcar_schedule(0.5, panel.conformal_rounds(), 9);
  MethodConfig mc;
  mc.kind = MethodKind::wtqa;
  const auto a = run_engine(panel, split, 9, schedule, mc, pred);
  const auto b = run_engine(panel, split, 9, schedule, mc, pred);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t t = 0; t < a.records.size(); ++t) {
    CHECK(a.records[t].center == b.records[t].center);
    CHECK(a.records[t].half_width == b.records[t].half_width);
    CHECK(a.records[t].raw_alpha == b.records[t].raw_alpha);
  }
}

TEST_CASE("split conformal width is shared across targets at a fixed round") {
  Rng rng(64, 0);
  const Panel panel = iid_panel(rng, 12, 40, 2, 15);
  const auto split = last_unit_split(12, 3);
  const auto pred = fit_burn_in(panel, split);
  const auto schedule = full_schedule(panel.conformal_rounds());
  MethodConfig mc;
  mc.kind = MethodKind::split_cp;
  std::vector<std::vector<PredictionRecord>> traces;
  for (int target : split.test_ids)
    traces.push_back(run_engine(panel, split, target, schedule, mc, pred).records);
  for (std::size_t t = 0; t < traces[0].size(); ++t) {
    CHECK(traces[0][t].half_width == traces[1][t].half_width);
    CHECK(traces[0][t].half_width == traces[2][t].half_width);
  }
}

TEST_CASE("lagged-feedback settlement") {
  MethodConfig mc;
  mc.kind = MethodKind::wtqa;
  auto state = make_method_state(mc, 4, 1);
  PredictionRecord rec;
  rec.center = 0.0;
  rec.raw_alpha = 0.1;

  SUBCASE("label inside a finite raw set") {
    rec.raw_kind = ThresholdKind::finite;
    rec.raw_value = 1.0;
    settle_feedback(state, rec, 0.5);
    CHECK(state.trace.back().loss == 0);
    CHECK(state.temporal->alpha == doctest::Approx(0.101));
  }
  SUBCASE("raw full line covers any label") {
    rec.raw_kind = ThresholdKind::full_line;
    settle_feedback(state, rec, 1e12);
    CHECK(state.trace.back().loss == 0);
  }
  SUBCASE("raw empty set misses any label") {
    rec.raw_kind = ThresholdKind::empty_set;
    settle_feedback(state, rec, 0.0);
    CHECK(state.trace.back().loss == 1);
    CHECK(state.temporal->alpha == doctest::Approx(0.091));
  }
  SUBCASE("no reveal leaves the level untouched") {
    settle_feedback(state, rec, std::nullopt);
    CHECK(state.trace.back().revealed == false);
    CHECK(state.temporal->alpha == 0.1);
  }
}

TEST_CASE("budgeted rank method") {
  SUBCASE("neutral prior pins the rank to one half") {
    // Even calibration count with distinct constant scores: the frozen
    // median prior sits between the two middle values every round.
    const Panel panel = scripted_panel({1.0, 2.0, 3.0, 4.0}, 20, 10);
    const auto split = last_unit_split(5);
    const auto pred = zero_predictor(panel, split);
    MethodConfig mc;
    mc.kind = MethodKind::tqa_b;
    mc.alpha = 0.2;
    auto state = make_method_state(mc, 4, 1);
    const auto schedule = mcar_schedule(0.0, panel.conformal_rounds(), 1);
    double prior = -1.0;
    for (int t = 10; t < 20; ++t) {
      const auto rec =
          method_step(state, stream_round(panel, split, 4, schedule, t), pred);
      CHECK(state.tqa_b.last_rank == doctest::Approx(0.5));
      CHECK(rec.deployed_level == doctest::Approx(0.2));  // alpha_q = alpha
      if (prior < 0) prior = state.tqa_b.m_target;
      CHECK(state.tqa_b.m_target == prior);  // never revealed: prior frozen
    }
  }
  SUBCASE("hardest rank queries half the level") {
    // Reveal a huge target residual so m_target dominates every unit.
    const Panel panel = scripted_panel({1.0, 2.0, 3.0, 4.0}, 20, 10, /*target=*/100.0);
    const auto split = last_unit_split(5);
    const auto pred = zero_predictor(panel, split);
    MethodConfig mc;
    mc.kind = MethodKind::tqa_b;
    mc.alpha = 0.2;
    auto state = make_method_state(mc, 4, 1);
    const auto schedule = full_schedule(panel.conformal_rounds());
    method_step(state, stream_round(panel, split, 4, schedule, 10), pred);
    const auto rec = method_step(state, stream_round(panel, split, 4, schedule, 11), pred);
    CHECK(state.tqa_b.last_rank == doctest::Approx(1.0));
    CHECK(rec.deployed_level == doctest::Approx(0.1));  // alpha - budget = alpha/2
    CHECK(state.tqa_b.target_seeded);
  }
  SUBCASE("decayed-mean recursion on the calibration side") {
    const Panel panel = scripted_panel({1.0, 3.0}, 13, 10);
    const auto split = last_unit_split(3);
    const auto pred = zero_predictor(panel, split);
    MethodConfig mc;
    mc.kind = MethodKind::tqa_b;
    auto state = make_method_state(mc, 2, 1);
    const auto schedule = mcar_schedule(0.0, 3, 1);
    method_step(state, stream_round(panel, split, 2, schedule, 10), pred);
    CHECK(state.tqa_b.m[0] == doctest::Approx(1.0));  // seeded
    method_step(state, stream_round(panel, split, 2, schedule, 11), pred);
    CHECK(state.tqa_b.m[0] == doctest::Approx(0.8 * 1.0 + 0.2 * 1.0));
    CHECK(state.tqa_b.m[1] == doctest::Approx(3.0));
  }
}

TEST_CASE("residual history primitives") {
  ResidualHistory h;
  SUBCASE("ewma of a constant is that constant") {
    for (int i = 0; i < 10; ++i) h.append(0.7, 0.2);
    for (double e : h.ewma) CHECK(e == doctest::Approx(0.7).epsilon(1e-12));
  }
  SUBCASE("rolling mean windows") {
    for (double v : {1.0, 2.0, 3.0, 4.0}) h.append(v, 0.2);
    CHECK(h.rolling_mean(2) == doctest::Approx(3.5));
    CHECK(h.rolling_mean(10) == doctest::Approx(2.5));
  }
  SUBCASE("adjusted ewma matches the direct weighted average") {
    Rng rng(3, 3);
    std::vector<double> xs;
    for (int i = 0; i < 12; ++i) {
      xs.push_back(rng.uniform(-2, 2));
      h.append(xs.back(), 0.2);
      double num = 0.0, den = 0.0, w = 1.0;
      for (auto it = xs.rbegin(); it != xs.rend(); ++it, w *= 0.8) {
        num += w * *it;
        den += w;
      }
      REQUIRE(h.ewma.back() == doctest::Approx(num / den).epsilon(1e-12));
    }
  }
}

TEST_CASE("lagged-residual quantile method") {
  SUBCASE("constant residuals collapse to a point at yhat + c") {
    const double c = 1.3;
    std::vector<double> calib(6, c);
    const Panel panel = scripted_panel(calib, 60, 10, c);
    const auto split = last_unit_split(7);
    const auto pred = zero_predictor(panel, split);
    MethodConfig mc;
    mc.kind = MethodKind::lpci_lite;
    mc.alpha = 0.1;
    mc.lpci_window = 20;
    auto state = make_method_state(mc, 6, 1);
    const auto schedule = full_schedule(panel.conformal_rounds());
    PredictionRecord last;
    for (int t = 10; t < 60; ++t)
      last = method_step(state, stream_round(panel, split, 6, schedule, t), pred);
    CHECK(last.provenance == ThresholdKind::finite);
    CHECK(last.center == doctest::Approx(c).epsilon(1e-6));
    CHECK(last.half_width == doctest::Approx(0.0).epsilon(1e-6));
  }
  SUBCASE("symmetric +-1 residuals give near-unit tails") {
    // Calibration residuals alternate sign by unit and round.
    const int n_calib = 10;
    Panel panel = scripted_panel(std::vector<double>(n_calib, 1.0), 80, 10);
    for (int i = 0; i < n_calib; ++i)
      for (int t = 10; t < 80; ++t)
        panel.outcomes[static_cast<std::size_t>(i) * 80 + t] = (i + t) % 2 ? 1.0 : -1.0;
    for (int t = 10; t < 80; ++t)
      panel.outcomes[static_cast<std::size_t>(n_calib) * 80 + t] = t % 2 ? 1.0 : -1.0;
    const auto split = last_unit_split(n_calib + 1);
    const auto pred = zero_predictor(panel, split);
    MethodConfig mc;
    mc.kind = MethodKind::lpci_lite;
    mc.alpha = 0.1;
    mc.lpci_window = 30;
    auto state = make_method_state(mc, n_calib, 1);
    const auto schedule = full_schedule(panel.conformal_rounds());
    PredictionRecord last;
    for (int t = 10; t < 80; ++t)
      last = method_step(state, stream_round(panel, split, n_calib, schedule, t), pred);
    // Slightly wider than the feature-free pinball tolerance: the lag
    // features carry a little signal on an alternating stream.
    CHECK(last.lo() == doctest::Approx(-1.0).epsilon(0.1));
    CHECK(last.hi() == doctest::Approx(1.0).epsilon(0.1));
  }
  SUBCASE("cold start emits the split-conformal interval") {
    const Panel panel = scripted_panel({1.0, 2.0, 3.0, 4.0}, 30, 10);
    const auto split = last_unit_split(5);
    const auto pred = zero_predictor(panel, split);
    const auto schedule = mcar_schedule(0.0, panel.conformal_rounds(), 1);
    MethodConfig lpci_cfg;
    lpci_cfg.kind = MethodKind::lpci_lite;
    MethodConfig split_cfg;
    split_cfg.kind = MethodKind::split_cp;
    auto lpci_state = make_method_state(lpci_cfg, 4, 1);
    auto split_state = make_method_state(split_cfg, 4, 1);
    for (int t = 10; t < 30; ++t) {
      const auto a =
          method_step(lpci_state, stream_round(panel, split, 4, schedule, t), pred);
      const auto b =
          method_step(split_state, stream_round(panel, split, 4, schedule, t), pred);
      // Target feedback never arrives, so the fallback persists all run.
      REQUIRE(a.half_width == b.half_width);
      REQUIRE(a.center == b.center);
    }
  }
}
