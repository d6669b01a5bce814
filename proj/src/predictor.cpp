#include "panelcp/predictor.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace panelcp {

namespace {

// Burn-in scale: population sd of a column, floored to keep divisions sane on
// constant features.
double column_sd(std::span<const double> rows, std::size_t n, int stride, int col) {
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += rows[i * stride + col];
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dev = rows[i * stride + col] - mean;
    var += dev * dev;
  }
  return std::max(std::sqrt(var / static_cast<double>(n)), 1e-12);
}

double column_mean(std::span<const double> rows, std::size_t n, int stride, int col) {
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += rows[i * stride + col];
  return mean / static_cast<double>(n);
}

Eigen::VectorXd solve_ridge(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                            double lambda) {
  if (lambda > 0.0) {
    Eigen::MatrixXd gram = design.transpose() * design;
    gram.diagonal().array() += lambda;
    return Eigen::LLT<Eigen::MatrixXd>(gram).solve(design.transpose() * y);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < design.cols())
    throw std::invalid_argument("fit_ridge: singular system with lambda = 0; use lambda > 0");
  return qr.solve(y);
}

}  // namespace

double Predictor::predict(std::span<const double> row) const {
  const int total = x_dim + f_dim;
  if (static_cast<int>(row.size()) != total)
    throw std::invalid_argument("predict: dimension mismatch");
  if (mode == RidgeMode::realdata) {
    double acc = intercept;
    for (int j = 0; j < x_dim; ++j)
      acc += coef[static_cast<std::size_t>(j)] * (row[static_cast<std::size_t>(j)] - centers[static_cast<std::size_t>(j)]) /
             scales[static_cast<std::size_t>(j)];
    return acc;
  }
  // g_a(X_s) + g_b(X_s)' F_s with coef laid out as [w_a | W_b row-major].
  double acc = 0.0;
  for (int j = 0; j < x_dim; ++j) {
    const double xs = row[static_cast<std::size_t>(j)] / scales[static_cast<std::size_t>(j)];
    acc += coef[static_cast<std::size_t>(j)] * xs;
    for (int l = 0; l < f_dim; ++l) {
      const double fs = row[static_cast<std::size_t>(x_dim + l)] /
                        scales[static_cast<std::size_t>(x_dim + l)];
      acc += coef[static_cast<std::size_t>(x_dim + j * f_dim + l)] * xs * fs;
    }
  }
  return acc;
}

double Predictor::predict(std::span<const double> x, std::span<const double> f) const {
  if (mode == RidgeMode::synthetic_factor && static_cast<int>(f.size()) != f_dim)
    throw std::invalid_argument("predict: factor vector required in synthetic mode");
  std::vector<double> row(x.begin(), x.end());
  row.insert(row.end(), f.begin(), f.end());
  return predict(row);
}

Predictor fit_ridge(std::span<const double> rows, std::span<const double> targets,
                    int x_dim, int f_dim, double lambda, RidgeMode mode) {
  const int total = x_dim + f_dim;
  if (total <= 0) throw std::invalid_argument("fit_ridge: empty feature space");
  if (lambda < 0.0) throw std::invalid_argument("fit_ridge: lambda must be >= 0");
  const std::size_t n = targets.size();
  if (n == 0 || rows.size() != n * static_cast<std::size_t>(total))
    throw std::invalid_argument("fit_ridge: row/target shape mismatch");
  if (mode == RidgeMode::realdata && f_dim != 0)
    throw std::invalid_argument("fit_ridge: realdata mode takes f_dim = 0");

  Predictor p;
  p.mode = mode;
  p.x_dim = x_dim;
  p.f_dim = f_dim;
  p.ridge_lambda = lambda;
  p.scales.resize(static_cast<std::size_t>(total));
  for (int j = 0; j < total; ++j)
    p.scales[static_cast<std::size_t>(j)] = column_sd(rows, n, total, j);

  if (mode == RidgeMode::realdata) {
    p.centers.resize(static_cast<std::size_t>(total));
    for (int j = 0; j < total; ++j)
      p.centers[static_cast<std::size_t>(j)] = column_mean(rows, n, total, j);
    double ybar = 0.0;
    for (double v : targets) ybar += v;
    ybar /= static_cast<double>(n);

    Eigen::MatrixXd design(static_cast<Eigen::Index>(n), x_dim);
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      for (int j = 0; j < x_dim; ++j)
        design(static_cast<Eigen::Index>(i), j) =
            (rows[i * static_cast<std::size_t>(total) + j] - p.centers[static_cast<std::size_t>(j)]) /
            p.scales[static_cast<std::size_t>(j)];
      y(static_cast<Eigen::Index>(i)) = targets[i] - ybar;
    }
    const Eigen::VectorXd w = solve_ridge(design, y, lambda);
    p.coef.assign(w.data(), w.data() + w.size());
    p.intercept = ybar;
    return p;
  }

  // Scaled, uncentered design [X_s, X_s (x) F_s].
  const int cols = x_dim * (1 + f_dim);
  Eigen::MatrixXd design(static_cast<Eigen::Index>(n), cols);
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = rows.data() + i * static_cast<std::size_t>(total);
    for (int j = 0; j < x_dim; ++j) {
      const double xs = row[j] / p.scales[static_cast<std::size_t>(j)];
      design(static_cast<Eigen::Index>(i), j) = xs;
      for (int l = 0; l < f_dim; ++l) {
        const double fs = row[x_dim + l] / p.scales[static_cast<std::size_t>(x_dim + l)];
        design(static_cast<Eigen::Index>(i), x_dim + j * f_dim + l) = xs * fs;
      }
    }
    y(static_cast<Eigen::Index>(i)) = targets[i];
  }
  const Eigen::VectorXd w = solve_ridge(design, y, lambda);
  p.coef.assign(w.data(), w.data() + w.size());
  return p;
}

double pinball_loss(double tau, double residual) {
  return residual >= 0.0 ? tau * residual : (tau - 1.0) * residual;
}

double PinballModel::predict(std::span<const double> x) const {
  if (x.size() != weights.size())
    throw std::invalid_argument("pinball predict: dimension mismatch");
  double acc = intercept;
  for (std::size_t j = 0; j < weights.size(); ++j) acc += weights[j] * x[j];
  return acc;
}

PinballModel fit_pinball(std::span<const double> rows, std::span<const double> targets,
                         int dim, double tau, int iters, double step, double l2,
                         std::size_t row_cap) {
  if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("fit_pinball: tau in (0,1)");
  if (dim < 0) throw std::invalid_argument("fit_pinball: negative dim");
  std::size_t n = targets.size();
  if (n == 0) throw std::invalid_argument("fit_pinball: empty rows");
  if (rows.size() != n * static_cast<std::size_t>(dim))
    throw std::invalid_argument("fit_pinball: row/target shape mismatch");

  // Keep the most recent rows when over the cap.
  std::size_t start = 0;
  if (n > row_cap) {
    start = n - row_cap;
    n = row_cap;
  }
  const double* X = rows.data() + start * static_cast<std::size_t>(dim);
  const double* Y = targets.data() + start;

  PinballModel m;
  m.tau = tau;
  m.iters = iters;
  m.step = step;
  m.l2 = l2;
  m.weights.assign(static_cast<std::size_t>(dim), 0.0);

  // Warm start at the empirical tau-quantile (linear interpolation).
  {
    std::vector<double> sorted(Y, Y + n);
    std::sort(sorted.begin(), sorted.end());
    const double pos = tau * static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, n - 1);
    const double frac = pos - static_cast<double>(lo);
    m.intercept = sorted[lo] + frac * (sorted[hi] - sorted[lo]);
  }

  std::vector<double> w = m.weights;
  double b = m.intercept;
  std::vector<double> grad_w(static_cast<std::size_t>(dim));
  double best_obj = 0.0;

  for (int k = 0; k <= iters; ++k) {
    // One pass computes the current objective and the subgradient; the
    // extra k = iters pass only scores the final iterate.
    std::fill(grad_w.begin(), grad_w.end(), 0.0);
    double grad_b = 0.0;
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double* xi = X + i * static_cast<std::size_t>(dim);
      double pred = b;
      for (int j = 0; j < dim; ++j) pred += w[static_cast<std::size_t>(j)] * xi[j];
      const double r = Y[i] - pred;
      loss += pinball_loss(tau, r);
      // Left subgradient at the kink: r == 0 joins the non-positive side.
      const double g = r > 0.0 ? -tau : (1.0 - tau);
      grad_b += g;
      for (int j = 0; j < dim; ++j) grad_w[static_cast<std::size_t>(j)] += g * xi[j];
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    double obj = loss * inv_n;
    double w2 = 0.0;
    for (double v : w) w2 += v * v;
    obj += 0.5 * l2 * w2;

    if (k == 0) m.initial_objective = obj;
    if (k == 0 || obj < best_obj) {
      best_obj = obj;
      m.weights = w;
      m.intercept = b;
    }
    if (k == iters) break;

    const double step_k = step * (1.0 - static_cast<double>(k) / iters);
    b -= step_k * grad_b * inv_n;
    for (int j = 0; j < dim; ++j)
      w[static_cast<std::size_t>(j)] -=
          step_k * (grad_w[static_cast<std::size_t>(j)] * inv_n + l2 * w[static_cast<std::size_t>(j)]);
  }
  m.final_objective = best_obj;
  return m;
}

}  // namespace panelcp
