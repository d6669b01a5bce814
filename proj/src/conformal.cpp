#include "panelcp/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "panelcp/predictor.hpp"

namespace panelcp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

const char* threshold_kind_name(ThresholdKind kind) {
  switch (kind) {
    case ThresholdKind::finite: return "finite";
    case ThresholdKind::sentinel: return "sentinel_fallback";
    case ThresholdKind::empty_set: return "empty_set";
    case ThresholdKind::full_line: return "full_line";
  }
  return "?";
}

double abs_residual_score(std::span<const double> x, double y, const Predictor& predictor) {
  return std::abs(y - predictor.predict(x));
}

Threshold weighted_quantile_ordered(std::span<const double> calib_scores,
                                    std::span<const int> order,
                                    std::span<const double> weights, double level) {
  const std::size_t n = calib_scores.size();
  if (n == 0) throw std::invalid_argument("weighted_quantile: empty score vector");
  if (weights.size() != n + 1)
    throw std::invalid_argument("weighted_quantile: weights must have length N+1");
  if (order.size() != n)
    throw std::invalid_argument("weighted_quantile: order must have length N");

  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("weighted_quantile: weights must be nonnegative");
    sum += w;
  }
  for (double s : calib_scores)
    if (std::isnan(s)) throw std::invalid_argument("weighted_quantile: NaN score");
  const double drift = std::abs(sum - 1.0);
  double scale = 1.0;
  if (drift > 1e-12) {
    if (drift > 1e-9)
      throw std::invalid_argument("weighted_quantile: weights do not sum to 1");
    scale = 1.0 / sum;
  }

  if (level <= 0.0) return {-kInf, ThresholdKind::empty_set};
  if (level > 1.0) return {kInf, ThresholdKind::full_line};

  // Cumulative scan over the sorted support; duplicates are absorbed before
  // the level test so ties share one step of the CDF.
  double cum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    const double value = calib_scores[static_cast<std::size_t>(order[i])];
    while (i < n && calib_scores[static_cast<std::size_t>(order[i])] == value) {
      cum += scale * weights[static_cast<std::size_t>(order[i])];
      ++i;
    }
    if (cum >= level) return {value, ThresholdKind::finite};
  }
  return {kInf, ThresholdKind::sentinel};
}

Threshold weighted_quantile(std::span<const double> calib_scores,
                            std::span<const double> weights, double level) {
  std::vector<int> order(calib_scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return calib_scores[static_cast<std::size_t>(a)] <
           calib_scores[static_cast<std::size_t>(b)];
  });
  return weighted_quantile_ordered(calib_scores, order, weights, level);
}

Deployed deploy_finite(const Threshold& raw, std::span<const double> calib_scores,
                       std::span<const double> weights, double alpha_t,
                       double lo, double hi) {
  if (calib_scores.empty())
    throw std::invalid_argument("deploy_finite: empty calibration scores");
  const double level = std::clamp(alpha_t, lo, hi);

  Threshold t = raw;
  if (level != alpha_t || raw.kind == ThresholdKind::empty_set ||
      raw.kind == ThresholdKind::full_line) {
    t = weighted_quantile(calib_scores, weights, 1.0 - level);
  }
  if (t.kind == ThresholdKind::finite) return {level, t.value, ThresholdKind::finite};
  // Sentinel selected: deploy the largest contemporaneous calibration score.
  const double widest = *std::max_element(calib_scores.begin(), calib_scores.end());
  return {level, widest, ThresholdKind::sentinel};
}

PredictionRecord build_record(double center, const Deployed& deployed,
                              const Threshold& raw, double raw_alpha) {
  PredictionRecord rec;
  rec.center = center;
  rec.half_width = deployed.half_width;
  rec.deployed_level = deployed.level;
  rec.provenance = deployed.kind;
  rec.raw_alpha = raw_alpha;
  rec.raw_value = raw.value;
  rec.raw_kind = raw.kind;
  return rec;
}

void resolve_coverage(PredictionRecord& record, double label) {
  record.covered = std::abs(label - record.center) <= record.half_width ? 1 : 0;
  record.raw_covered = static_cast<std::int8_t>(1 - raw_loss(record, label));
}

int raw_loss(const PredictionRecord& record, double label) {
  switch (record.raw_kind) {
    case ThresholdKind::empty_set: return 1;
    case ThresholdKind::full_line:
    case ThresholdKind::sentinel: return 0;
    case ThresholdKind::finite:
      return std::abs(label - record.center) <= record.raw_value ? 0 : 1;
  }
  return 1;
}

}  // namespace panelcp
