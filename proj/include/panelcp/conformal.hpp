#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace panelcp {

struct Predictor;  // predictor.hpp

enum class ThresholdKind : std::uint8_t {
  finite,
  sentinel,    // only the +inf sentinel mass attains the level
  empty_set,   // level <= 0, threshold -inf
  full_line,   // level > 1, threshold +inf
};

const char* threshold_kind_name(ThresholdKind kind);

struct Threshold {
  double value = 0.0;  // +-inf for the non-finite kinds
  ThresholdKind kind = ThresholdKind::finite;
};

// Nonconformity score |y - f(x)|.
double abs_residual_score(std::span<const double> x, double y, const Predictor& predictor);

// Smallest q with sum_k w_k 1[(s~)_k <= q] >= level, over the augmented score
// vector (calib_scores..., +inf). weights has length N+1 with the final
// coordinate belonging to the sentinel; weights must lie on the simplex
// (renormalized when |sum - 1| <= 1e-9, rejected beyond that). Equal scores
// are merged before the cumulative test, so ties pool their weights.
Threshold weighted_quantile(std::span<const double> calib_scores,
                            std::span<const double> weights, double level);

// Same scan over a caller-provided ascending order of the calibration scores
// (shared sort across many weight vectors).
Threshold weighted_quantile_ordered(std::span<const double> calib_scores,
                                    std::span<const int> order,
                                    std::span<const double> weights, double level);

struct Deployed {
  double level = 0.0;       // miscoverage level actually deployed, in [lo, hi]
  double half_width = 0.0;  // always finite
  ThresholdKind kind = ThresholdKind::finite;  // finite or sentinel
};

// Finite-width deployment: clamp the adaptive level into [lo, hi], recompute
// the threshold at the clamped level, and fall back to the largest
// contemporaneous calibration score when the sentinel would be selected.
Deployed deploy_finite(const Threshold& raw, std::span<const double> calib_scores,
                       std::span<const double> weights, double alpha_t,
                       double lo = 0.01, double hi = 0.99);

struct PredictionRecord {
  double center = 0.0;
  double half_width = 0.0;   // deployed, finite
  double deployed_level = 0.0;
  ThresholdKind provenance = ThresholdKind::finite;  // deployed interval
  double raw_alpha = 0.0;    // adaptive level before projection
  double raw_value = 0.0;    // raw threshold (+-inf allowed)
  ThresholdKind raw_kind = ThresholdKind::finite;
  // Filled offline once the label is known; -1 until then.
  std::int8_t covered = -1;      // label inside the deployed interval
  std::int8_t raw_covered = -1;  // label inside the raw set

  double lo() const { return center - half_width; }
  double hi() const { return center + half_width; }
};

PredictionRecord build_record(double center, const Deployed& deployed,
                              const Threshold& raw, double raw_alpha);

// Offline resolution against the hidden label. Closed intervals: a label on
// an endpoint counts as covered. The raw set is the full line for the
// full_line and sentinel kinds and empty for empty_set.
void resolve_coverage(PredictionRecord& record, double label);

// Miscoverage indicator of the raw set (the loss fed to the level update).
int raw_loss(const PredictionRecord& record, double label);

}  // namespace panelcp
