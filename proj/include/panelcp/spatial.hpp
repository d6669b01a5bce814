#pragma once

#include <span>
#include <vector>

namespace panelcp {

// Per-target spatial memory: running feature means for the N calibration
// units plus the target (stored last), and the kernel bandwidth. Weights for
// round t+1 are computed from means through round t; round 1 uses the
// uniform initialization handled by the caller.
struct SpatialState {
  int n_units = 0;   // N + 1, target last
  int dim = 0;
  double bandwidth = 0.6;
  long t_count = 0;
  std::vector<double> means;          // n_units * dim
  std::vector<double> frozen_scales;  // optional fixed standardizer (per dim)

  std::span<const double> mean(int k) const {
    return {means.data() + static_cast<std::size_t>(k) * dim,
            static_cast<std::size_t>(dim)};
  }
};

SpatialState make_spatial_state(int n_units, int dim, double bandwidth);

// mu_k <- (1 - 1/t) mu_k + x_k / t with t = t_count + 1.
void update_running_mean(SpatialState& state, std::span<const double> x_all);

// Squared kernel distances of each peer to the target on coordinatewise
// standardized means, divided by the feature dimension. The standardizer is
// the cross-unit sd of each coordinate's running means (floored at 1e-8), or
// frozen_scales when set; a coordinate with no cross-unit spread contributes
// nothing.
std::vector<double> standardized_distances(const SpatialState& state);

// Simplex weights over the N+1 coordinates: peers get exp(-d2/(2h^2)), the
// target coordinate gets unnormalized mass 1.
std::vector<double> kernel_weights(const SpatialState& state);

// Peer coordinates of the soft-neighborhood map,
// psi(a)_k = exp(-a_k/(2h^2)) / (1 + sum_j exp(-a_j/(2h^2))).
std::vector<double> gibbs_map(std::span<const double> squared_distances, double h);

std::vector<double> uniform_weights(int n_plus_1);

}  // namespace panelcp
