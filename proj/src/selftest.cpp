#include "panelcp/selftest.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "panelcp/feedback.hpp"
#include "panelcp/methods.hpp"
#include "panelcp/rng.hpp"
#include "panelcp/spatial.hpp"
#include "panelcp/temporal.hpp"

namespace panelcp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Independent reference scan: test every candidate in the sorted support by
// summing all weights at or below it from scratch.
Threshold reference_quantile(const std::vector<double>& scores,
                             const std::vector<double>& weights, double level) {
  if (level <= 0.0) return {-kInf, ThresholdKind::empty_set};
  if (level > 1.0) return {kInf, ThresholdKind::full_line};
  std::vector<double> support(scores);
  std::sort(support.begin(), support.end());
  support.erase(std::unique(support.begin(), support.end()), support.end());
  for (double q : support) {
    double mass = 0.0;
    for (std::size_t k = 0; k < scores.size(); ++k)
      if (scores[k] <= q) mass += weights[k];
    if (mass >= level) return {q, ThresholdKind::finite};
  }
  return {kInf, ThresholdKind::sentinel};
}

bool same_threshold(const Threshold& a, const Threshold& b) {
  return a.kind == b.kind && (a.kind != ThresholdKind::finite || a.value == b.value);
}

std::vector<double> random_simplex(Rng& rng, std::size_t n) {
  std::vector<double> w(n);
  double sum = 0.0;
  for (auto& v : w) {
    v = -std::log(1.0 - rng.uniform());
    sum += v;
  }
  for (auto& v : w) v /= sum;
  return w;
}

// Small i.i.d. Gaussian panel with a linear signal, for engine property runs.
Panel random_panel(Rng& rng, int n_units, int horizon, int d, int burn_in) {
  Panel p;
  p.n_units = n_units;
  p.horizon = horizon;
  p.feature_dim = d;
  p.burn_in_end = burn_in;
  p.features.resize(static_cast<std::size_t>(n_units) * horizon * d);
  p.outcomes.resize(static_cast<std::size_t>(n_units) * horizon);
  std::vector<double> beta(static_cast<std::size_t>(d));
  for (auto& b : beta) b = rng.normal();
  for (int i = 0; i < n_units; ++i) {
    for (int t = 0; t < horizon; ++t) {
      double y = 0.0;
      for (int j = 0; j < d; ++j) {
        const double x = rng.normal();
        p.features[(static_cast<std::size_t>(i) * horizon + t) * d + j] = x;
        y += beta[static_cast<std::size_t>(j)] * x;
      }
      p.outcomes[static_cast<std::size_t>(i) * horizon + t] = y + rng.normal();
    }
  }
  return p;
}

struct EngineRun {
  std::vector<PredictionRecord> records;
  MethodState state;
};

EngineRun run_engine(const Panel& panel, const UnitSplit& split, int target,
                     const FeedbackSchedule& schedule, const MethodConfig& mc,
                     const Predictor& predictor) {
  EngineRun run;
  run.state = make_method_state(mc, static_cast<int>(split.calib_ids.size()),
                                panel.feature_dim);
  for (int t = panel.burn_in_end; t < panel.horizon; ++t) {
    const RoundBatch batch = stream_round(panel, split, target, schedule, t);
    run.records.push_back(method_step(run.state, batch, predictor));
  }
  const int last = panel.horizon - 1;
  settle_feedback(run.state, *run.state.last_record,
                  schedule.revealed(panel.conformal_rounds() - 1)
                      ? std::optional<double>(panel.y(target, last))
                      : std::nullopt);
  for (std::size_t ri = 0; ri < run.records.size(); ++ri)
    resolve_coverage(run.records[ri],
                     panel.y(target, panel.burn_in_end + static_cast<int>(ri)));
  return run;
}

}  // namespace

bool selftest(std::ostream& out, bool verbose) {
  bool ok = true;
  const auto check = [&](const char* name, bool pass) {
    out << (pass ? "[pass] " : "[FAIL] ") << name << "\n";
    ok = ok && pass;
  };

  Rng rng(991, 0);

  // Weighted quantile equals the reference scan, including the infinities.
  {
    bool pass = true;
    for (int trial = 0; trial < 200 && pass; ++trial) {
      const auto n = 1 + rng.uniform_index(12);
      std::vector<double> scores(n);
      for (auto& s : scores)
        s = rng.uniform() < 0.25 ? std::floor(rng.uniform(0, 4)) : rng.uniform(0, 10);
      const auto weights = random_simplex(rng, n + 1);
      const double level = rng.uniform(-0.2, 1.2);
      pass = same_threshold(weighted_quantile(scores, weights, level),
                            reference_quantile(scores, weights, level));
    }
    check("weighted quantile matches reference scan", pass);
  }

  // Uniform weights reduce to the ceil((N+1)(1-alpha)) order statistic.
  {
    bool pass = true;
    for (int trial = 0; trial < 200 && pass; ++trial) {
      const auto n = 1 + rng.uniform_index(20);
      std::vector<double> scores(n);
      for (auto& s : scores) s = rng.uniform(0, 5);
      const double alpha = rng.uniform(0.01, 0.6);
      const auto t = weighted_quantile(scores, uniform_weights(static_cast<int>(n) + 1),
                                       1.0 - alpha);
      const auto k = static_cast<std::size_t>(
          std::ceil((static_cast<double>(n) + 1.0) * (1.0 - alpha)));
      std::vector<double> sorted(scores);
      std::sort(sorted.begin(), sorted.end());
      if (k <= n)
        pass = t.kind == ThresholdKind::finite && t.value == sorted[k - 1];
      else
        pass = t.kind == ThresholdKind::sentinel;
    }
    check("uniform weights reduce to the order statistic", pass);
  }

  // Soft-neighborhood map is 1/h^2-Lipschitz in l1.
  {
    bool pass = true;
    for (int trial = 0; trial < 200 && pass; ++trial) {
      const auto n = 1 + rng.uniform_index(10);
      std::vector<double> a(n), b(n);
      for (std::size_t k = 0; k < n; ++k) {
        a[k] = rng.uniform(0, 8);
        b[k] = rng.uniform(0, 8);
      }
      const double h = rng.uniform(0.2, 2.0);
      const auto pa = gibbs_map(a, h);
      const auto pb = gibbs_map(b, h);
      double lhs = 0.0, dist = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        lhs += std::abs(pa[k] - pb[k]);
        dist += std::abs(a[k] - b[k]);
      }
      pass = lhs <= dist / (h * h) + 1e-12;
    }
    check("soft-neighborhood map Lipschitz bound", pass);
  }

  // Engine property runs: telescoping identity, level range, observed bound,
  // finite deployed widths.
  {
    bool pass = true;
    for (int trial = 0; trial < 20 && pass; ++trial) {
      Rng trial_rng = rng.split(1000 + static_cast<std::uint64_t>(trial));
      const int n_units = 4 + static_cast<int>(trial_rng.uniform_index(6));
      const int horizon = 40 + static_cast<int>(trial_rng.uniform_index(40));
      const Panel panel = random_panel(trial_rng, n_units, horizon, 2, 10);
      UnitSplit split;
      for (int i = 0; i + 1 < n_units; ++i) split.calib_ids.push_back(i);
      split.test_ids.push_back(n_units - 1);
      std::vector<double> rows, ys;
      for (int id : split.calib_ids)
        for (int t = 0; t < panel.burn_in_end; ++t) {
          const auto x = panel.x(id, t);
          rows.insert(rows.end(), x.begin(), x.end());
          ys.push_back(panel.y(id, t));
        }
      const auto predictor = fit_ridge(rows, ys, panel.feature_dim, 0, 1.0, RidgeMode::realdata);
      MethodConfig mc;
      mc.kind = MethodKind::wtqa;
      mc.alpha = trial_rng.uniform(0.05, 0.4);
      mc.gamma = trial_rng.uniform(0.01, 0.1);
      const auto schedule = mcar_schedule(trial_rng.uniform(), panel.conformal_rounds(),
                                          trial_rng.next_u64());
      const auto run =
          run_engine(panel, split, n_units - 1, schedule, mc, predictor);

      const double resid = audit_telescoping(run.state.trace, run.state.temporal->alpha,
                                             mc.alpha, mc.gamma);
      pass = std::abs(resid) <= 1e-9;
      for (const auto& rec : run.records) {
        pass = pass && rec.raw_alpha >= -mc.gamma - 1e-12 &&
               rec.raw_alpha <= 1.0 + mc.gamma + 1e-12 && std::isfinite(rec.half_width);
      }
      const auto bound = audit_observed_bound(run.state.trace, mc.alpha, mc.gamma);
      if (bound.applicable) pass = pass && bound.holds;
    }
    check("pathwise level audits on random engine runs", pass);
  }

  // p = 0: the adaptive branches collapse onto their fixed-level twins.
  {
    Rng prng = rng.split(77);
    const Panel panel = random_panel(prng, 8, 50, 2, 10);
    UnitSplit split;
    for (int i = 0; i < 7; ++i) split.calib_ids.push_back(i);
    split.test_ids.push_back(7);
    std::vector<double> rows, ys;
    for (int id : split.calib_ids)
      for (int t = 0; t < panel.burn_in_end; ++t) {
        const auto x = panel.x(id, t);
        rows.insert(rows.end(), x.begin(), x.end());
        ys.push_back(panel.y(id, t));
      }
    const auto predictor = fit_ridge(rows, ys, panel.feature_dim, 0, 1.0, RidgeMode::realdata);
    const auto schedule = mcar_schedule(0.0, panel.conformal_rounds(), 5);
    const auto run_kind = [&](MethodKind kind) {
      MethodConfig mc;
      mc.kind = kind;
      return run_engine(panel, split, 7, schedule, mc, predictor).records;
    };
    const auto same = [](const std::vector<PredictionRecord>& a,
                         const std::vector<PredictionRecord>& b) {
      for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i].center != b[i].center || a[i].half_width != b[i].half_width) return false;
      return true;
    };
    check("p = 0 equivalences (interval-for-interval)",
          same(run_kind(MethodKind::wtqa), run_kind(MethodKind::w_only)) &&
              same(run_kind(MethodKind::tqa_only), run_kind(MethodKind::split_cp)));
  }

  if (verbose) out << (ok ? "selftest passed\n" : "selftest FAILED\n");
  return ok;
}

}  // namespace panelcp
