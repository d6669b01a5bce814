#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace panelcp {

// Dense panel: every (unit, time) cell carries a feature vector and an
// outcome. Units and times are integer indices after loading; burn_in_end
// separates predictor-fitting rows from the online evaluation period.
struct Panel {
  int n_units = 0;
  int horizon = 0;
  int feature_dim = 0;
  int burn_in_end = 0;
  std::vector<double> features;  // n_units * horizon * feature_dim, row-major
  std::vector<double> outcomes;  // n_units * horizon
  std::vector<int> unit_tags;    // optional per-unit label (empty when untagged)

  std::span<const double> x(int unit, int t) const {
    return {features.data() +
                (static_cast<std::size_t>(unit) * horizon + t) * feature_dim,
            static_cast<std::size_t>(feature_dim)};
  }
  double y(int unit, int t) const {
    return outcomes[static_cast<std::size_t>(unit) * horizon + t];
  }
  int conformal_rounds() const { return horizon - burn_in_end; }

  // Throws std::invalid_argument when an invariant fails.
  void validate() const;
};

struct UnitSplit {
  std::vector<int> calib_ids;
  std::vector<int> test_ids;
  std::uint64_t seed = 0;
};

struct FeedbackSchedule;  // feedback.hpp

// One round of arrivals: the full calibration slice at t, the target
// covariate at t, and the lagged reveal flag/label. The batch deliberately
// has no accessor for the target outcome at t.
class RoundBatch {
 public:
  RoundBatch(const Panel& panel, const std::vector<int>& calib_ids,
             int target_id, int t, bool lagged_reveal,
             std::optional<double> lagged_label);

  int t() const { return t_; }
  int n_calib() const { return static_cast<int>(calib_ids_->size()); }
  std::span<const double> calib_x(int j) const {
    return panel_->x((*calib_ids_)[static_cast<std::size_t>(j)], t_);
  }
  double calib_y(int j) const {
    return panel_->y((*calib_ids_)[static_cast<std::size_t>(j)], t_);
  }
  std::span<const double> target_x() const { return panel_->x(target_id_, t_); }
  bool lagged_reveal() const { return lagged_reveal_; }
  const std::optional<double>& lagged_label() const { return lagged_label_; }

 private:
  const Panel* panel_;
  const std::vector<int>* calib_ids_;
  int target_id_;
  int t_;
  bool lagged_reveal_;
  std::optional<double> lagged_label_;
};

// Assembles the round-t batch. t is an absolute time index inside the
// conformal period [burn_in_end, horizon). The first conformal round always
// has lagged_reveal = 0; afterwards the reveal flag/label follow the
// feedback schedule at the previous round.
RoundBatch stream_round(const Panel& panel, const UnitSplit& split, int target,
                        const FeedbackSchedule& feedback, int t);

// Uniform split without replacement, deterministic given seed. When
// stratified is true, units tagged 0 all go to calibration and tagged units
// (tag != 0) are split between the two sides at random (the synthetic
// protocol: majority units calibrate, minority units split evenly).
UnitSplit random_unit_split(const Panel& panel, int n_calib, int n_test,
                            std::uint64_t seed, bool stratified = false);

// CSV format: header "unit_id,time_id,y,x_0,...,x_{d-1}", one row per
// (unit, time). Units are ordered by first appearance, times sorted. Ragged
// panels are rejected with the first offending (unit, time) named.
Panel load_panel_csv(const std::string& path);
void write_panel_csv(const Panel& panel, const std::string& path);

}  // namespace panelcp
