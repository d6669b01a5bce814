#pragma once

#include <span>
#include <vector>

namespace panelcp {

enum class RidgeMode {
  // Joint linear conditional-factor fit y ~ g_a(X) + g_b(X)'F on the design
  // [X, X (x) F], inputs scaled by burn-in sds without centering.
  synthetic_factor,
  // Plain standardized ridge: features centered and scaled, intercept fitted,
  // penalty on the non-intercept weights.
  realdata,
};

// Fixed point predictor, immutable after the burn-in fit. Rows passed to the
// fit and to predict() are the concatenation [x | f] with x_dim covariate
// coordinates followed by f_dim observed-factor coordinates (f_dim = 0 in
// realdata mode).
struct Predictor {
  RidgeMode mode = RidgeMode::realdata;
  int x_dim = 0;
  int f_dim = 0;
  double ridge_lambda = 0.0;
  std::vector<double> scales;   // per input coordinate, > 0
  std::vector<double> centers;  // realdata only
  std::vector<double> coef;     // synthetic: x_dim * (1 + f_dim); realdata: x_dim
  double intercept = 0.0;

  double predict(std::span<const double> row) const;
  // Synthetic-factor convenience with split inputs.
  double predict(std::span<const double> x, std::span<const double> f) const;
};

// rows: n x (x_dim + f_dim) row-major. lambda = 0 requires a full-rank
// design; a singular system raises an error advising lambda > 0.
Predictor fit_ridge(std::span<const double> rows, std::span<const double> targets,
                    int x_dim, int f_dim, double lambda, RidgeMode mode);

// Linear pinball (quantile) regression fit by full-batch subgradient descent
// on mean pinball loss + (l2/2)||w||^2, weights only. Deterministic given row
// order. The intercept starts at the empirical tau-quantile of the targets,
// steps decay linearly to zero, and the best iterate by objective is kept.
struct PinballModel {
  double tau = 0.5;
  std::vector<double> weights;
  double intercept = 0.0;
  int iters = 0;
  double step = 0.0;
  double l2 = 0.0;
  double initial_objective = 0.0;
  double final_objective = 0.0;

  double predict(std::span<const double> x) const;
};

inline constexpr std::size_t kPinballRowCap = 25000;

// rows: n x dim row-major. When n exceeds row_cap only the last row_cap rows
// are used.
PinballModel fit_pinball(std::span<const double> rows, std::span<const double> targets,
                         int dim, double tau, int iters = 300, double step = 0.05,
                         double l2 = 1e-4, std::size_t row_cap = kPinballRowCap);

double pinball_loss(double tau, double residual);

}  // namespace panelcp
