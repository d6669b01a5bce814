#include "panelcp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace panelcp {

double mean(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("mean: empty input");
  double acc = 0.0;
  for (double v : values) acc += v;
  return acc / static_cast<double>(values.size());
}

double sample_sd(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double m = mean(values);
  double acc = 0.0;
  for (double v : values) acc += (v - m) * (v - m);
  return std::sqrt(acc / static_cast<double>(values.size() - 1));
}

double tail_coverage(std::span<const double> per_unit_cov, double frac) {
  if (per_unit_cov.empty()) throw std::invalid_argument("tail_coverage: empty input");
  if (!(frac > 0.0 && frac <= 1.0))
    throw std::invalid_argument("tail_coverage: frac must lie in (0, 1]");
  std::vector<double> sorted(per_unit_cov.begin(), per_unit_cov.end());
  std::sort(sorted.begin(), sorted.end());
  const auto k = static_cast<std::size_t>(
      std::ceil(frac * static_cast<double>(sorted.size())));
  double acc = 0.0;
  for (std::size_t i = 0; i < k; ++i) acc += sorted[i];
  return acc / static_cast<double>(k);
}

double width_cov(std::span<const double> widths) {
  const double m = mean(widths);
  if (!(m > 0.0)) throw std::invalid_argument("width_cov: mean width must be positive");
  double var = 0.0;
  for (double w : widths) var += (w - m) * (w - m);
  var /= static_cast<double>(widths.size());
  return std::sqrt(var) / m;
}

MetricsReport coverage_stats(const std::vector<std::vector<PredictionRecord>>& records,
                             double tail_frac, double clamp_lo, double clamp_hi) {
  if (records.empty()) throw std::invalid_argument("coverage_stats: no traces");

  MetricsReport report;
  std::size_t total = 0, hits = 0, lower = 0, upper = 0, sentinel = 0;
  std::vector<double> widths;

  for (const auto& trace : records) {
    if (trace.empty()) throw std::invalid_argument("coverage_stats: empty trace");
    double unit_hits = 0.0;
    for (const auto& rec : trace) {
      if (rec.covered < 0)
        throw std::invalid_argument("coverage_stats: unresolved covered flag");
      ++total;
      hits += rec.covered;
      unit_hits += rec.covered;
      widths.push_back(2.0 * rec.half_width);
      if (rec.raw_alpha < clamp_lo) ++lower;
      if (rec.raw_alpha > clamp_hi) ++upper;
      if (rec.provenance == ThresholdKind::sentinel) ++sentinel;
    }
    report.per_unit_coverage.push_back(unit_hits / static_cast<double>(trace.size()));
  }

  report.avg_coverage = static_cast<double>(hits) / static_cast<double>(total);
  report.tail_coverage = tail_coverage(report.per_unit_coverage, tail_frac);
  report.avg_width = mean(widths);
  report.width_cov = width_cov(widths);
  report.lower_boundary_rate = static_cast<double>(lower) / static_cast<double>(total);
  report.upper_boundary_rate = static_cast<double>(upper) / static_cast<double>(total);
  report.sentinel_rate = static_cast<double>(sentinel) / static_cast<double>(total);

  // Tail coverage on each prefix of rounds (all traces share the horizon).
  const std::size_t horizon = records.front().size();
  std::vector<double> unit_cov(records.size());
  for (std::size_t len = 1; len <= horizon; ++len) {
    for (std::size_t u = 0; u < records.size(); ++u) {
      double acc = 0.0;
      for (std::size_t t = 0; t < len; ++t) acc += records[u][t].covered;
      unit_cov[u] = acc / static_cast<double>(len);
    }
    report.cumulative_tail_curve.push_back(tail_coverage(unit_cov, tail_frac));
  }
  return report;
}

}  // namespace panelcp
