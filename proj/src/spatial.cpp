#include "panelcp/spatial.hpp"

#include <cmath>
#include <stdexcept>

namespace panelcp {

SpatialState make_spatial_state(int n_units, int dim, double bandwidth) {
  if (n_units < 2 || dim < 1) throw std::invalid_argument("spatial state: bad shape");
  if (!(bandwidth > 0.0)) throw std::invalid_argument("spatial state: bandwidth must be positive");
  SpatialState s;
  s.n_units = n_units;
  s.dim = dim;
  s.bandwidth = bandwidth;
  s.means.assign(static_cast<std::size_t>(n_units) * dim, 0.0);
  return s;
}

void update_running_mean(SpatialState& state, std::span<const double> x_all) {
  const auto expected = static_cast<std::size_t>(state.n_units) * state.dim;
  if (x_all.size() != expected)
    throw std::invalid_argument("update_running_mean: dimension mismatch");
  const double t = static_cast<double>(state.t_count + 1);
  const double keep = 1.0 - 1.0 / t;
  for (std::size_t i = 0; i < expected; ++i)
    state.means[i] = keep * state.means[i] + x_all[i] / t;
  ++state.t_count;
}

std::vector<double> standardized_distances(const SpatialState& state) {
  if (state.t_count < 1)
    throw std::logic_error("standardized_distances: no rounds absorbed yet");
  const int n = state.n_units;
  const int d = state.dim;

  std::vector<double> scales;
  if (!state.frozen_scales.empty()) {
    scales = state.frozen_scales;
  } else {
    // Cross-unit sd of each coordinate's running means at the current round.
    scales.assign(static_cast<std::size_t>(d), 0.0);
    for (int j = 0; j < d; ++j) {
      double mean = 0.0;
      for (int k = 0; k < n; ++k) mean += state.means[static_cast<std::size_t>(k) * d + j];
      mean /= n;
      double var = 0.0;
      for (int k = 0; k < n; ++k) {
        const double dev = state.means[static_cast<std::size_t>(k) * d + j] - mean;
        var += dev * dev;
      }
      scales[static_cast<std::size_t>(j)] = std::sqrt(var / n);
    }
  }

  const auto* target = state.means.data() + static_cast<std::size_t>(n - 1) * d;
  std::vector<double> dist2(static_cast<std::size_t>(n - 1), 0.0);
  for (int k = 0; k < n - 1; ++k) {
    const auto* mk = state.means.data() + static_cast<std::size_t>(k) * d;
    double acc = 0.0;
    for (int j = 0; j < d; ++j) {
      const double s = std::max(scales[static_cast<std::size_t>(j)], 1e-8);
      const double diff = (mk[j] - target[j]) / s;
      acc += diff * diff;
    }
    dist2[static_cast<std::size_t>(k)] = acc / d;
  }
  return dist2;
}

std::vector<double> gibbs_map(std::span<const double> squared_distances, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("gibbs_map: h must be positive");
  const double inv = 1.0 / (2.0 * h * h);
  std::vector<double> out(squared_distances.size());
  double denom = 1.0;
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = std::exp(-squared_distances[k] * inv);
    denom += out[k];
  }
  for (auto& v : out) v /= denom;
  return out;
}

std::vector<double> kernel_weights(const SpatialState& state) {
  const auto dist2 = standardized_distances(state);
  const double inv = 1.0 / (2.0 * state.bandwidth * state.bandwidth);
  std::vector<double> w(static_cast<std::size_t>(state.n_units));
  double denom = 1.0;
  for (std::size_t k = 0; k + 1 < w.size(); ++k) {
    w[k] = std::exp(-dist2[k] * inv);
    denom += w[k];
  }
  w.back() = 1.0;
  for (auto& v : w) v /= denom;
  return w;
}

std::vector<double> uniform_weights(int n_plus_1) {
  return std::vector<double>(static_cast<std::size_t>(n_plus_1),
                             1.0 / static_cast<double>(n_plus_1));
}

}  // namespace panelcp
