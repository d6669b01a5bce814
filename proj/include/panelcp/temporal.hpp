#pragma once

#include <optional>
#include <span>
#include <vector>

namespace panelcp {

// Adaptive miscoverage level with intermittent feedback. alpha may leave
// [0, 1]; the coupled set semantics (empty set when alpha > 1, full line
// when alpha < 0) keep it inside [-gamma, 1+gamma] on engine runs.
struct TemporalState {
  double alpha = 0.0;         // current adaptive level
  double alpha_target = 0.0;  // nominal level
  double gamma = 0.0;         // stepsize
  long s_count = 0;           // running sum of reveal flags
  double loss_sum = 0.0;      // running sum of revealed losses
};

TemporalState make_temporal_state(double alpha_target, double gamma);

// Revealed round: alpha <- alpha + gamma * (alpha_target - loss) and the
// counters advance. Unrevealed round: everything is carried forward.
void update_level(TemporalState& state, bool lagged_reveal, std::optional<int> lagged_loss);

// One audited round: the reveal flag and, when revealed, the raw-set loss.
// loss is -1 on unrevealed rounds (unknown online, unused by the audits).
struct TraceStep {
  bool revealed = false;
  int loss = -1;
};

// sum_t R_t (l_t - alpha) - (alpha - alpha_final) / gamma; zero (to 1e-9)
// for any trace generated by update_level with final level alpha_final.
double audit_telescoping(std::span<const TraceStep> trace, double alpha_final,
                         double alpha_target, double gamma);

struct ObservedBound {
  bool applicable = false;  // false when no feedback was observed
  double lhs = 0.0;         // |S_T^{-1} sum R_t l_t - alpha|
  double bound = 0.0;       // (max{alpha, 1-alpha} + gamma) / (S_T gamma)
  bool holds = false;
};

ObservedBound audit_observed_bound(std::span<const TraceStep> trace,
                                   double alpha_target, double gamma);

}  // namespace panelcp
