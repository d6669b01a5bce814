#include "panelcp/feedback.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "panelcp/rng.hpp"

namespace panelcp {

FeedbackSchedule full_schedule(int horizon) {
  FeedbackSchedule s;
  s.mode = FeedbackSchedule::Mode::full;
  s.p = 1.0;
  s.reveals.assign(static_cast<std::size_t>(horizon), 1);
  return s;
}

std::vector<double> mcar_uniforms(int horizon, std::uint64_t seed) {
  Rng rng(seed, 0xFEEDu);
  std::vector<double> u(static_cast<std::size_t>(horizon));
  for (auto& v : u) v = rng.uniform();
  return u;
}

FeedbackSchedule mcar_from_uniforms(double p, std::span<const double> uniforms,
                                    std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("mcar_schedule: p outside [0, 1]");
  FeedbackSchedule s;
  s.mode = FeedbackSchedule::Mode::mcar;
  s.p = p;
  s.seed = seed;
  s.reveals.resize(uniforms.size());
  for (std::size_t t = 0; t < uniforms.size(); ++t)
    s.reveals[t] = uniforms[t] < p ? 1 : 0;
  return s;
}

FeedbackSchedule mcar_schedule(double p, int horizon, std::uint64_t seed) {
  return mcar_from_uniforms(p, mcar_uniforms(horizon, seed), seed);
}

std::vector<double> rank_to_z(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n == 0) throw std::invalid_argument("rank_to_z: empty input");
  if (n == 1) return {0.0};

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  // Average ranks over ties, 1-based.
  std::vector<double> rank(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
    i = j + 1;
  }
  std::vector<double> z(n);
  for (std::size_t k = 0; k < n; ++k)
    z[k] = 2.0 * (rank[k] - 1.0) / (static_cast<double>(n) - 1.0) - 1.0;
  return z;
}

FeedbackSchedule informative_schedule(std::span<const double> difficulties,
                                      RevealDirection direction, std::uint64_t seed) {
  const auto z = rank_to_z(difficulties);
  const double sign = direction == RevealDirection::hard_visible ? 1.0 : -1.0;
  Rng rng(seed, 0x1F0u);
  FeedbackSchedule s;
  s.mode = FeedbackSchedule::Mode::informative;
  s.p = 0.5;
  s.seed = seed;
  s.reveals.resize(z.size());
  s.probs.resize(z.size());
  for (std::size_t t = 0; t < z.size(); ++t) {
    const double pt = 1.0 / (1.0 + std::exp(-2.0 * sign * z[t]));
    s.probs[t] = pt;
    s.reveals[t] = rng.uniform() < pt ? 1 : 0;
  }
  return s;
}

double pearson_correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2)
    throw std::invalid_argument("pearson_correlation: need two equal-length series");
  const auto n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

const char* reveal_direction_name(RevealDirection direction) {
  return direction == RevealDirection::hard_visible ? "hard_visible" : "easy_visible";
}

}  // namespace panelcp
