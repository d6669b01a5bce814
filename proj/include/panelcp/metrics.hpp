#pragma once

#include <span>
#include <vector>

#include "panelcp/conformal.hpp"

namespace panelcp {

struct MetricsReport {
  double avg_coverage = 0.0;
  double tail_coverage = 0.0;
  double avg_width = 0.0;
  double width_cov = 0.0;
  double lower_boundary_rate = 0.0;  // raw level below the deployment floor
  double upper_boundary_rate = 0.0;  // raw level above the deployment ceiling
  double sentinel_rate = 0.0;        // deployed records with sentinel fallback
  std::vector<double> per_unit_coverage;
  std::vector<double> cumulative_tail_curve;  // tail coverage on round prefixes
};

// Mean per-unit coverage over the worst-covered ceil(frac * n) units.
double tail_coverage(std::span<const double> per_unit_cov, double frac = 0.1);

// Population sd / mean of realized interval widths.
double width_cov(std::span<const double> widths);

// Aggregates one method's completed traces: records[target][round], every
// covered flag resolved offline. clamp_lo / clamp_hi are the deployment
// bounds the method ran with (boundary-rate diagnostics).
MetricsReport coverage_stats(const std::vector<std::vector<PredictionRecord>>& records,
                             double tail_frac = 0.1, double clamp_lo = 0.01,
                             double clamp_hi = 0.99);

double mean(std::span<const double> values);
double sample_sd(std::span<const double> values);

}  // namespace panelcp
