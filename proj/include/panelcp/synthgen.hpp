#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "panelcp/panel.hpp"

namespace panelcp {

// Scenario constants for the synthetic factor-model panel. The three named
// scenarios share the covariate machinery and differ in factor drift, scale
// ramp, cluster separation, and minority frailty.
struct ScenarioSpec {
  enum class Name { easy, medium, hard };
  Name name = Name::easy;

  int n_units = 500;
  int horizon = 100;
  int x_dim = 100;
  int factor_dim = 3;
  int burn_in = 40;  // conformal period = horizon - burn_in

  double majority_frac = 0.88;
  double separation = 0.80;  // between-cluster mean shift (2.0 in hard)
  double shift_scale = 3.5;  // per-coordinate sd of the shift at separation 1

  std::array<double, 3> phi{0.45, 0.60, 0.75};
  double factor_noise_scale = 0.55;
  double factor_corr_base = 0.45;  // R_jk = base^|j-k|

  // Drift m_r = drift_amp * (L_{a,b}(r) - L_{a,b}(0)) * (1,0,-1)/sqrt(2) with
  // logistic L and b = drift_center_frac * horizon.
  double drift_amp = 0.0;
  double drift_a = 0.0;
  double drift_center_frac = 0.0;
  // Scale ramp s_r = 1 + ramp_amp * clip((r - start*T) / (len*T), 0, 1).
  double ramp_amp = 0.0;
  double ramp_start_frac = 0.0;
  double ramp_len_frac = 1.0;

  double frailty_sd = 0.0;  // minority units only
  double outcome_noise_sd = 0.50;

  // Template knobs with no pinned values; defaults documented here.
  int global_latent_dim = 5;
  int cluster_latent_dim = 4;
  int idio_latent_dim = 8;
  double latent_persistence = 0.5;
  double idio_loading_sd = 0.3;
  double noise_scale_lo = 0.5;
  double noise_scale_hi = 1.5;
  int hidden_width = 64;
  double level_sd = 1.0;    // probe sd of the outcome level term
  double loading_sd = 0.35;  // probe sd of each factor-loading head

  int n_majority() const {
    return static_cast<int>(std::llround(majority_frac * n_units));
  }
  int cluster_of(int unit) const { return unit < n_majority() ? 0 : 1; }

  static ScenarioSpec easy();
  static ScenarioSpec medium();
  static ScenarioSpec hard();
  static ScenarioSpec by_name(const std::string& name);
  const char* name_str() const;

  double drift_m(int r, int coord) const;  // m_r coordinate
  double scale_s(int r) const;             // s_r
};

// Seed-derived structure shared by every replication of a scenario.
struct StructureTemplates {
  std::uint64_t structure_seed = 0;
  std::vector<double> mu_a, mu_b;        // x_dim
  std::vector<double> b_global;          // x_dim x global_latent_dim
  std::vector<double> a_a, a_b;          // x_dim x cluster_latent_dim
  std::vector<double> l_a, l_b;          // x_dim x idio_latent_dim
  std::vector<double> sigma_a, sigma_b;  // x_dim
  // Outcome networks: one shared tanh hidden layer, one head for the level
  // term and factor_dim heads for the factor loadings. Output scales are
  // calibrated so each head has unit sd on a probe draw.
  std::vector<double> w_hidden;  // hidden_width x x_dim
  std::vector<double> b_hidden;  // hidden_width
  std::vector<double> w_alpha;   // hidden_width
  std::vector<double> w_beta;    // factor_dim x hidden_width
  double alpha_scale = 1.0;
  std::vector<double> beta_scale;  // factor_dim
};

StructureTemplates make_structure(std::uint64_t structure_seed, const ScenarioSpec& spec);

// Lower-triangular C with C C' = R, R_jk = base^|j-k|.
std::vector<double> factor_cholesky(int dim, double base);

// F_0 = 0; F_r = phi (.) F_{r-1} + (1 - phi) (.) m_r + 0.55 s_r C Z_r.
std::vector<double> simulate_factors(const ScenarioSpec& spec, std::uint64_t rep_seed);

// Full panel draw: features are [X | F] per (unit, time), outcomes follow the
// nonlinear conditional-factor model, tags carry the cluster (0 majority,
// 1 minority), burn_in_end is set from the spec.
Panel simulate_panel(const StructureTemplates& templates, const ScenarioSpec& spec,
                     std::uint64_t rep_seed);

// Outcome-network evaluation (exposed for tests).
double eval_level_net(const StructureTemplates& t, std::span<const double> x);
std::vector<double> eval_loading_net(const StructureTemplates& t, std::span<const double> x);

}  // namespace panelcp
