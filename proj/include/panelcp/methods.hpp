#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "panelcp/conformal.hpp"
#include "panelcp/panel.hpp"
#include "panelcp/predictor.hpp"
#include "panelcp/spatial.hpp"
#include "panelcp/temporal.hpp"

namespace panelcp {

enum class MethodKind { wtqa, w_only, tqa_only, split_cp, tqa_b, lpci_lite };

const char* method_kind_name(MethodKind kind);
MethodKind method_kind_from_name(const std::string& name);

struct MethodConfig {
  MethodKind kind = MethodKind::wtqa;
  double alpha = 0.10;
  double h = 0.6;      // kernel bandwidth (wtqa, w_only)
  double gamma = 0.01; // temporal stepsize (wtqa, tqa_only)

  // Deployment projection of the adaptive level.
  double clamp_lo = 0.01;
  double clamp_hi = 0.99;

  double tqa_b_decay = 0.8;
  double tqa_b_budget = -1.0;   // < 0 means alpha / 2
  double tqa_b_clamp_hi = 0.999;

  int lpci_refit_every = 10;
  int lpci_window = 30;
  int lpci_lags = 6;
  double lpci_ewm_alpha = 0.2;
  double lpci_beta = -1.0;      // < 0 means alpha / 2

  double budget() const { return tqa_b_budget < 0.0 ? alpha / 2.0 : tqa_b_budget; }
  double beta() const { return lpci_beta < 0.0 ? alpha / 2.0 : lpci_beta; }
};

// Per-unit signed-residual history with adjusted-EWMA snapshots and prefix
// sums; positions are 1-based observation counts.
struct ResidualHistory {
  std::vector<double> values;
  std::vector<double> ewma;    // EWMA after absorbing each observation
  std::vector<double> prefix;  // prefix[k] = sum of first k values
  double ewma_num = 0.0;
  double ewma_den = 0.0;

  void append(double value, double ewm_alpha);
  int count() const { return static_cast<int>(values.size()); }
  // Mean of the min(window, count) most recent values (0 when empty).
  double rolling_mean(int window) const;
};

struct TqaBState {
  std::vector<double> m;  // decayed mean |residual| per calibration unit
  bool seeded = false;
  double m_target = 0.0;
  bool target_seeded = false;  // first revealed target residual arrived
  double last_rank = 0.5;
};

struct LpciState {
  std::vector<ResidualHistory> calib;
  ResidualHistory target;
  std::optional<PinballModel> lower, upper;
};

struct MethodState {
  MethodConfig cfg;
  int n_calib = 0;
  int round_idx = 0;  // rounds emitted so far
  std::optional<SpatialState> spatial;
  std::optional<TemporalState> temporal;
  TqaBState tqa_b;
  LpciState lpci;
  std::optional<PredictionRecord> last_record;
  double last_target_yhat = 0.0;
  std::vector<TraceStep> trace;  // (R_t, l_t) per settled round
  std::vector<double> scratch;
};

MethodState make_method_state(const MethodConfig& cfg, int n_calib, int feature_dim);

// Predictions for the round's calibration slice, shared across targets and
// methods so the fixed predictor is evaluated once per (replication, round).
struct RoundView {
  std::span<const double> calib_yhat;
  std::span<const double> calib_scores;  // |y - yhat|
  std::span<const int> score_order;      // ascending by score
  double target_yhat = 0.0;
};

RoundView make_round_view(const RoundBatch& batch, const Predictor& predictor,
                          std::vector<double>& yhat_buf, std::vector<double>& score_buf,
                          std::vector<int>& order_buf);

// One full round in algorithm order: (i) absorb lagged feedback, (ii) score
// the calibration slice, (iii) weighted quantile at the method's weights and
// level, (iv) finite-width deployment, (v) spatial update where applicable.
PredictionRecord method_step(MethodState& state, const RoundBatch& batch,
                             const RoundView& view);
PredictionRecord method_step(MethodState& state, const RoundBatch& batch,
                             const Predictor& predictor);

// Lagged-feedback settlement for the deployed round-(t-1) record: computes
// the raw-set loss, advances the adaptive level, and appends target residual
// rows, all gated on the reveal flag. Called by method_step for the previous
// round and once more by the driver after the final round.
void settle_feedback(MethodState& state, const PredictionRecord& record,
                     std::optional<double> revealed_label);

}  // namespace panelcp
