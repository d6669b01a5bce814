#include "panelcp/methods.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace panelcp {

const char* method_kind_name(MethodKind kind) {
  switch (kind) {
    case MethodKind::wtqa: return "wtqa";
    case MethodKind::w_only: return "w_only";
    case MethodKind::tqa_only: return "tqa_only";
    case MethodKind::split_cp: return "split_cp";
    case MethodKind::tqa_b: return "tqa_b";
    case MethodKind::lpci_lite: return "lpci_lite";
  }
  return "?";
}

MethodKind method_kind_from_name(const std::string& name) {
  if (name == "wtqa") return MethodKind::wtqa;
  if (name == "w_only") return MethodKind::w_only;
  if (name == "tqa_only") return MethodKind::tqa_only;
  if (name == "split_cp") return MethodKind::split_cp;
  if (name == "tqa_b") return MethodKind::tqa_b;
  if (name == "lpci_lite") return MethodKind::lpci_lite;
  throw std::invalid_argument("unknown method: " + name);
}

void ResidualHistory::append(double value, double ewm_alpha) {
  if (prefix.empty()) prefix.push_back(0.0);
  values.push_back(value);
  prefix.push_back(prefix.back() + value);
  ewma_num = value + (1.0 - ewm_alpha) * ewma_num;
  ewma_den = 1.0 + (1.0 - ewm_alpha) * ewma_den;
  ewma.push_back(ewma_num / ewma_den);
}

double ResidualHistory::rolling_mean(int window) const {
  const int n = count();
  if (n == 0) return 0.0;
  const int m = std::min(window, n);
  return (prefix[static_cast<std::size_t>(n)] - prefix[static_cast<std::size_t>(n - m)]) / m;
}

MethodState make_method_state(const MethodConfig& cfg, int n_calib, int feature_dim) {
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0))
    throw std::invalid_argument("method config: alpha must lie in (0, 1)");
  MethodState s;
  s.cfg = cfg;
  s.n_calib = n_calib;
  switch (cfg.kind) {
    case MethodKind::wtqa:
      s.spatial = make_spatial_state(n_calib + 1, feature_dim, cfg.h);
      s.temporal = make_temporal_state(cfg.alpha, cfg.gamma);
      break;
    case MethodKind::w_only:
      s.spatial = make_spatial_state(n_calib + 1, feature_dim, cfg.h);
      break;
    case MethodKind::tqa_only:
      s.temporal = make_temporal_state(cfg.alpha, cfg.gamma);
      break;
    case MethodKind::split_cp:
      break;
    case MethodKind::tqa_b:
      s.tqa_b.m.assign(static_cast<std::size_t>(n_calib), 0.0);
      break;
    case MethodKind::lpci_lite:
      s.lpci.calib.resize(static_cast<std::size_t>(n_calib));
      break;
  }
  return s;
}

RoundView make_round_view(const RoundBatch& batch, const Predictor& predictor,
                          std::vector<double>& yhat_buf, std::vector<double>& score_buf,
                          std::vector<int>& order_buf) {
  const int n = batch.n_calib();
  yhat_buf.resize(static_cast<std::size_t>(n));
  score_buf.resize(static_cast<std::size_t>(n));
  order_buf.resize(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    yhat_buf[static_cast<std::size_t>(j)] = predictor.predict(batch.calib_x(j));
    score_buf[static_cast<std::size_t>(j)] =
        std::abs(batch.calib_y(j) - yhat_buf[static_cast<std::size_t>(j)]);
  }
  std::iota(order_buf.begin(), order_buf.end(), 0);
  std::sort(order_buf.begin(), order_buf.end(), [&](int a, int b) {
    return score_buf[static_cast<std::size_t>(a)] < score_buf[static_cast<std::size_t>(b)];
  });
  RoundView view;
  view.calib_yhat = yhat_buf;
  view.calib_scores = score_buf;
  view.score_order = order_buf;
  view.target_yhat = predictor.predict(batch.target_x());
  return view;
}

void settle_feedback(MethodState& state, const PredictionRecord& record,
                     std::optional<double> revealed_label) {
  TraceStep step;
  step.revealed = revealed_label.has_value();
  if (step.revealed) step.loss = raw_loss(record, *revealed_label);
  state.trace.push_back(step);

  if (state.temporal) {
    update_level(*state.temporal, step.revealed,
                 step.revealed ? std::optional<int>(step.loss) : std::nullopt);
  }
  if (!step.revealed) return;

  const double resid = *revealed_label - state.last_target_yhat;
  if (state.cfg.kind == MethodKind::tqa_b) {
    auto& tb = state.tqa_b;
    if (!tb.target_seeded) {
      tb.m_target = std::abs(resid);
      tb.target_seeded = true;
    } else {
      tb.m_target = state.cfg.tqa_b_decay * tb.m_target +
                    (1.0 - state.cfg.tqa_b_decay) * std::abs(resid);
    }
  } else if (state.cfg.kind == MethodKind::lpci_lite) {
    state.lpci.target.append(resid, state.cfg.lpci_ewm_alpha);
  }
}

namespace {

// Lag-EWMA feature row for the observation at 1-based position pos; needs
// pos >= lags + 1.
void lag_features(const ResidualHistory& hist, int pos, int lags, double* out) {
  for (int k = 1; k <= lags; ++k)
    out[k - 1] = hist.ewma[static_cast<std::size_t>(pos - k - 1)];
}

// Fixed-effect estimate for position pos: mean of the min(window, pos-1)
// residuals preceding it.
double fixed_effect(const ResidualHistory& hist, int pos, int window) {
  const int avail = pos - 1;
  if (avail <= 0) return 0.0;
  const int m = std::min(window, avail);
  return (hist.prefix[static_cast<std::size_t>(avail)] -
          hist.prefix[static_cast<std::size_t>(avail - m)]) / m;
}

PredictionRecord finish_split_style(const RoundView& view,
                                    std::span<const double> weights, double alpha_t,
                                    double raw_alpha, double lo, double hi) {
  const Threshold raw =
      weighted_quantile_ordered(view.calib_scores, view.score_order, weights, 1.0 - alpha_t);
  const Deployed dep = deploy_finite(raw, view.calib_scores, weights, alpha_t, lo, hi);
  return build_record(view.target_yhat, dep, raw, raw_alpha);
}

PredictionRecord tqa_b_round(MethodState& state, const RoundBatch& batch,
                             const RoundView& view) {
  auto& tb = state.tqa_b;
  const int n = batch.n_calib();
  const double decay = state.cfg.tqa_b_decay;
  if (!tb.seeded) {
    for (int j = 0; j < n; ++j)
      tb.m[static_cast<std::size_t>(j)] = view.calib_scores[static_cast<std::size_t>(j)];
    tb.seeded = true;
    if (!tb.target_seeded) {
      // Neutral prior: the median of the freshly seeded calibration values,
      // held until the first revealed target residual.
      std::vector<double> sorted(tb.m);
      std::sort(sorted.begin(), sorted.end());
      const std::size_t mid = sorted.size() / 2;
      tb.m_target = sorted.size() % 2 == 1
                        ? sorted[mid]
                        : 0.5 * (sorted[mid - 1] + sorted[mid]);
    }
  } else {
    for (int j = 0; j < n; ++j)
      tb.m[static_cast<std::size_t>(j)] = decay * tb.m[static_cast<std::size_t>(j)] +
                                          (1.0 - decay) * view.calib_scores[static_cast<std::size_t>(j)];
  }

  int below = 0;
  for (double v : tb.m)
    if (v <= tb.m_target) ++below;
  const double rank = static_cast<double>(below) / n;
  tb.last_rank = rank;

  const double budget = state.cfg.budget();
  const double queried = state.cfg.alpha + budget * (1.0 - 2.0 * rank);
  const double alpha_q = std::clamp(queried, state.cfg.clamp_lo, state.cfg.tqa_b_clamp_hi);

  state.scratch.assign(static_cast<std::size_t>(n + 1), 1.0 / (n + 1));
  return finish_split_style(view, state.scratch, alpha_q, queried,
                            state.cfg.clamp_lo, state.cfg.tqa_b_clamp_hi);
}

PredictionRecord lpci_round(MethodState& state, const RoundBatch& batch,
                            const RoundView& view) {
  auto& lp = state.lpci;
  const auto& cfg = state.cfg;
  const int n = batch.n_calib();
  const int ri = state.round_idx;

  // Calibration residual rows arrive every round; positions align with round
  // indices (position = round + 1).
  for (int j = 0; j < n; ++j) {
    const double resid = batch.calib_y(j) - view.calib_yhat[static_cast<std::size_t>(j)];
    lp.calib[static_cast<std::size_t>(j)].append(resid, cfg.lpci_ewm_alpha);
  }

  if (ri % cfg.lpci_refit_every == 0) {
    const int lags = cfg.lpci_lags;
    const int lo_round = std::max(0, ri - cfg.lpci_window + 1);
    std::vector<double> rows;
    std::vector<double> resp;
    std::vector<double> feat(static_cast<std::size_t>(lags));
    const auto add_row = [&](const ResidualHistory& hist, int pos) {
      lag_features(hist, pos, lags, feat.data());
      rows.insert(rows.end(), feat.begin(), feat.end());
      resp.push_back(hist.values[static_cast<std::size_t>(pos - 1)] -
                     fixed_effect(hist, pos, cfg.lpci_window));
    };
    // Oldest rounds first so the fitting row cap drops them before recent
    // ones. Calibration positions align with rounds (pos = round + 1).
    for (int s = lo_round; s <= ri; ++s) {
      if (s + 1 < lags + 1) continue;
      for (int j = 0; j < n; ++j) add_row(lp.calib[static_cast<std::size_t>(j)], s + 1);
    }
    // Target rows are indexed by reveal order; window membership uses
    // position recency since their calendar rounds are sparse.
    {
      const auto& hist = lp.target;
      const int keep_from = std::max(lags + 1, hist.count() - cfg.lpci_window + 1);
      for (int pos = keep_from; pos <= hist.count(); ++pos) add_row(hist, pos);
    }
    if (!resp.empty()) {
      const double beta = cfg.beta();
      lp.lower = fit_pinball(rows, resp, lags, beta);
      lp.upper = fit_pinball(rows, resp, lags, 1.0 - cfg.alpha + beta);
    }
  }

  const bool ready = lp.lower && lp.upper && lp.target.count() >= cfg.lpci_lags;
  if (!ready) {
    // Cold start: fall back to the split-conformal interval.
    state.scratch.assign(static_cast<std::size_t>(n + 1), 1.0 / (n + 1));
    return finish_split_style(view, state.scratch, cfg.alpha, cfg.alpha,
                              cfg.clamp_lo, cfg.clamp_hi);
  }

  std::vector<double> feat(static_cast<std::size_t>(cfg.lpci_lags));
  lag_features(lp.target, lp.target.count() + 1, cfg.lpci_lags, feat.data());
  const double fe = lp.target.rolling_mean(cfg.lpci_window);
  const double q_lo = lp.lower->predict(feat) + fe;
  const double q_hi = lp.upper->predict(feat) + fe;

  PredictionRecord rec;
  rec.center = view.target_yhat + 0.5 * (q_lo + q_hi);
  rec.half_width = std::max(0.0, 0.5 * (q_hi - q_lo));
  rec.deployed_level = cfg.alpha;
  rec.provenance = ThresholdKind::finite;
  rec.raw_alpha = cfg.alpha;
  rec.raw_value = rec.half_width;
  rec.raw_kind = ThresholdKind::finite;
  return rec;
}

}  // namespace

PredictionRecord method_step(MethodState& state, const RoundBatch& batch,
                             const RoundView& view) {
  if (batch.n_calib() != state.n_calib)
    throw std::invalid_argument("method_step: calibration size changed mid-stream");
  if (state.last_record) {
    settle_feedback(state, *state.last_record,
                    batch.lagged_reveal() ? batch.lagged_label() : std::nullopt);
  }

  PredictionRecord rec;
  switch (state.cfg.kind) {
    case MethodKind::wtqa:
    case MethodKind::w_only: {
      const double alpha_t = state.temporal ? state.temporal->alpha : state.cfg.alpha;
      if (state.spatial->t_count == 0) {
        state.scratch.assign(static_cast<std::size_t>(state.n_calib + 1),
                             1.0 / (state.n_calib + 1));
      } else {
        state.scratch = kernel_weights(*state.spatial);
      }
      rec = finish_split_style(view, state.scratch, alpha_t, alpha_t,
                               state.cfg.clamp_lo, state.cfg.clamp_hi);
      break;
    }
    case MethodKind::tqa_only:
    case MethodKind::split_cp: {
      const double alpha_t = state.temporal ? state.temporal->alpha : state.cfg.alpha;
      state.scratch.assign(static_cast<std::size_t>(state.n_calib + 1),
                           1.0 / (state.n_calib + 1));
      rec = finish_split_style(view, state.scratch, alpha_t, alpha_t,
                               state.cfg.clamp_lo, state.cfg.clamp_hi);
      break;
    }
    case MethodKind::tqa_b:
      rec = tqa_b_round(state, batch, view);
      break;
    case MethodKind::lpci_lite:
      rec = lpci_round(state, batch, view);
      break;
  }

  if (state.spatial) {
    // Absorb the round-t covariates (calibration units then target) so the
    // next round's weights use means through round t.
    auto& buf = state.scratch;
    const int d = state.spatial->dim;
    buf.resize(static_cast<std::size_t>(state.n_calib + 1) * d);
    for (int j = 0; j < state.n_calib; ++j) {
      const auto x = batch.calib_x(j);
      std::copy(x.begin(), x.end(), buf.begin() + static_cast<std::size_t>(j) * d);
    }
    const auto tx = batch.target_x();
    std::copy(tx.begin(), tx.end(), buf.begin() + static_cast<std::size_t>(state.n_calib) * d);
    update_running_mean(*state.spatial, buf);
  }

  state.last_record = rec;
  state.last_target_yhat = view.target_yhat;
  ++state.round_idx;
  return rec;
}

PredictionRecord method_step(MethodState& state, const RoundBatch& batch,
                             const Predictor& predictor) {
  std::vector<double> yhat, scores;
  std::vector<int> order;
  const RoundView view = make_round_view(batch, predictor, yhat, scores, order);
  return method_step(state, batch, view);
}

}  // namespace panelcp
