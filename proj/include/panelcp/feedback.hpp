#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace panelcp {

// Reveal schedule over the conformal period, shared by all test units at
// each timestamp. Immutable after construction.
struct FeedbackSchedule {
  enum class Mode { full, mcar, informative };
  Mode mode = Mode::full;
  double p = 1.0;  // mcar reveal probability; 0.5 average for informative
  std::vector<std::uint8_t> reveals;
  std::vector<double> probs;  // per-round reveal propensity (informative only)
  std::uint64_t seed = 0;

  bool revealed(int round_idx) const {
    return reveals[static_cast<std::size_t>(round_idx)] != 0;
  }
  int horizon() const { return static_cast<int>(reveals.size()); }
};

enum class RevealDirection { hard_visible, easy_visible };

FeedbackSchedule full_schedule(int horizon);

// One uniform draw per timestamp; p-sweeps reuse the same draws so schedules
// are monotone-coupled across p (reveal iff u_t < p).
std::vector<double> mcar_uniforms(int horizon, std::uint64_t seed);
FeedbackSchedule mcar_from_uniforms(double p, std::span<const double> uniforms,
                                    std::uint64_t seed);
FeedbackSchedule mcar_schedule(double p, int horizon, std::uint64_t seed);

// Centered rank score in [-1, 1] with average-rank tie handling; a single
// value maps to 0.
std::vector<double> rank_to_z(std::span<const double> values);

// Outcome-informative mechanism: reveal with probability sigmoid(+-2 z_t)
// where z_t is the centered rank of the per-timestamp difficulty.
FeedbackSchedule informative_schedule(std::span<const double> difficulties,
                                      RevealDirection direction, std::uint64_t seed);

double pearson_correlation(std::span<const double> a, std::span<const double> b);

const char* reveal_direction_name(RevealDirection direction);

}  // namespace panelcp
