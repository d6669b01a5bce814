#include "panelcp/temporal.hpp"

#include <cmath>
#include <stdexcept>

namespace panelcp {

TemporalState make_temporal_state(double alpha_target, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("temporal state: gamma must be positive");
  TemporalState s;
  s.alpha = alpha_target;
  s.alpha_target = alpha_target;
  s.gamma = gamma;
  return s;
}

void update_level(TemporalState& state, bool lagged_reveal, std::optional<int> lagged_loss) {
  if (lagged_reveal != lagged_loss.has_value())
    throw std::invalid_argument("update_level: loss present iff reveal");
  if (!lagged_reveal) return;
  const int loss = *lagged_loss;
  if (loss != 0 && loss != 1)
    throw std::invalid_argument("update_level: loss must be 0 or 1");
  state.alpha += state.gamma * (state.alpha_target - loss);
  state.s_count += 1;
  state.loss_sum += loss;
}

double audit_telescoping(std::span<const TraceStep> trace, double alpha_final,
                         double alpha_target, double gamma) {
  double lhs = 0.0;
  for (const auto& step : trace)
    if (step.revealed) lhs += step.loss - alpha_target;
  return lhs - (alpha_target - alpha_final) / gamma;
}

ObservedBound audit_observed_bound(std::span<const TraceStep> trace,
                                   double alpha_target, double gamma) {
  long s_count = 0;
  double loss_sum = 0.0;
  for (const auto& step : trace) {
    if (step.revealed) {
      ++s_count;
      loss_sum += step.loss;
    }
  }
  ObservedBound out;
  if (s_count == 0) return out;
  out.applicable = true;
  out.lhs = std::abs(loss_sum / static_cast<double>(s_count) - alpha_target);
  out.bound = (std::max(alpha_target, 1.0 - alpha_target) + gamma) /
              (static_cast<double>(s_count) * gamma);
  out.holds = out.lhs <= out.bound;
  return out;
}

}  // namespace panelcp
