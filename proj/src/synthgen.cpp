#include "panelcp/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "panelcp/rng.hpp"

namespace panelcp {

namespace {

// Substream tags. Structure streams hang off (structure_seed, kStructure);
// replication streams hang off (rep_seed, kReplication) with one substream
// per unit, so generation parallelizes without reordering draws.
enum : std::uint64_t {
  kStructure = 0x57A7,
  kReplication = 0x4E9,
  kMuA = 1,
  kMuDir = 2,
  kBGlobal = 3,
  kClusterA = 4,
  kClusterB = 5,
  kIdioA = 6,
  kIdioB = 7,
  kSigmaA = 8,
  kSigmaB = 9,
  kHiddenW = 10,
  kHiddenB = 11,
  kHeadAlpha = 12,
  kHeadBeta = 13,
  kProbe = 14,
  kFactors = 101,
  kGlobalLatent = 102,
  kClusterLatent = 103,
  kFrailty = 104,
  kUnitBase = 1000,
};

double logistic(double a, double b, double r) {
  return 1.0 / (1.0 + std::exp(-a * (r - b)));
}

std::vector<double> gaussian_matrix(Rng rng, std::size_t n, double sd) {
  std::vector<double> out(n);
  for (auto& v : out) v = sd * rng.normal();
  return out;
}

}  // namespace

ScenarioSpec ScenarioSpec::easy() {
  ScenarioSpec s;
  s.name = Name::easy;
  return s;
}

ScenarioSpec ScenarioSpec::medium() {
  ScenarioSpec s;
  s.name = Name::medium;
  s.drift_amp = 3.60;
  s.drift_a = 0.17;
  s.drift_center_frac = 0.48;
  s.ramp_amp = 0.30;
  s.ramp_start_frac = 0.45;
  s.ramp_len_frac = 0.55;
  s.frailty_sd = 0.10;
  return s;
}

ScenarioSpec ScenarioSpec::hard() {
  ScenarioSpec s;
  s.name = Name::hard;
  s.separation = 2.0;
  s.drift_amp = 5.50;
  s.drift_a = 0.20;
  s.drift_center_frac = 0.35;
  s.ramp_amp = 0.80;
  s.ramp_start_frac = 0.40;
  s.ramp_len_frac = 0.60;
  s.frailty_sd = 0.15;
  return s;
}

ScenarioSpec ScenarioSpec::by_name(const std::string& name) {
  if (name == "easy") return easy();
  if (name == "medium") return medium();
  if (name == "hard") return hard();
  throw std::invalid_argument("unknown scenario: " + name);
}

const char* ScenarioSpec::name_str() const {
  switch (name) {
    case Name::easy: return "easy";
    case Name::medium: return "medium";
    case Name::hard: return "hard";
  }
  return "?";
}

double ScenarioSpec::drift_m(int r, int coord) const {
  if (drift_amp == 0.0) return 0.0;
  static const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  const double dir = coord == 0 ? inv_sqrt2 : (coord == 2 ? -inv_sqrt2 : 0.0);
  const double b = drift_center_frac * horizon;
  return drift_amp * (logistic(drift_a, b, r) - logistic(drift_a, b, 0.0)) * dir;
}

double ScenarioSpec::scale_s(int r) const {
  if (ramp_amp == 0.0) return 1.0;
  const double num = r - ramp_start_frac * horizon;
  const double den = ramp_len_frac * horizon;
  return 1.0 + ramp_amp * std::clamp(num / den, 0.0, 1.0);
}

std::vector<double> factor_cholesky(int dim, double base) {
  std::vector<double> r(static_cast<std::size_t>(dim) * dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j)
      r[static_cast<std::size_t>(i) * dim + j] = std::pow(base, std::abs(i - j));
  std::vector<double> c(static_cast<std::size_t>(dim) * dim, 0.0);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j <= i; ++j) {
      double acc = r[static_cast<std::size_t>(i) * dim + j];
      for (int k = 0; k < j; ++k)
        acc -= c[static_cast<std::size_t>(i) * dim + k] * c[static_cast<std::size_t>(j) * dim + k];
      if (i == j) {
        if (acc <= 0.0) throw std::runtime_error("factor_cholesky: matrix not positive definite");
        c[static_cast<std::size_t>(i) * dim + j] = std::sqrt(acc);
      } else {
        c[static_cast<std::size_t>(i) * dim + j] = acc / c[static_cast<std::size_t>(j) * dim + j];
      }
    }
  }
  return c;
}

double eval_level_net(const StructureTemplates& t, std::span<const double> x) {
  const int width = static_cast<int>(t.w_alpha.size());
  const int d = static_cast<int>(x.size());
  double acc = 0.0;
  for (int h = 0; h < width; ++h) {
    double z = t.b_hidden[static_cast<std::size_t>(h)];
    const double* wrow = t.w_hidden.data() + static_cast<std::size_t>(h) * d;
    for (int j = 0; j < d; ++j) z += wrow[j] * x[static_cast<std::size_t>(j)];
    acc += t.w_alpha[static_cast<std::size_t>(h)] * std::tanh(z);
  }
  return t.alpha_scale * acc;
}

std::vector<double> eval_loading_net(const StructureTemplates& t, std::span<const double> x) {
  const int width = static_cast<int>(t.w_alpha.size());
  const int d = static_cast<int>(x.size());
  const int heads = static_cast<int>(t.beta_scale.size());
  std::vector<double> out(static_cast<std::size_t>(heads), 0.0);
  for (int h = 0; h < width; ++h) {
    double z = t.b_hidden[static_cast<std::size_t>(h)];
    const double* wrow = t.w_hidden.data() + static_cast<std::size_t>(h) * d;
    for (int j = 0; j < d; ++j) z += wrow[j] * x[static_cast<std::size_t>(j)];
    const double a = std::tanh(z);
    for (int l = 0; l < heads; ++l)
      out[static_cast<std::size_t>(l)] += t.w_beta[static_cast<std::size_t>(l) * width + h] * a;
  }
  for (int l = 0; l < heads; ++l) out[static_cast<std::size_t>(l)] *= t.beta_scale[static_cast<std::size_t>(l)];
  return out;
}

StructureTemplates make_structure(std::uint64_t structure_seed, const ScenarioSpec& spec) {
  const int d = spec.x_dim;
  const auto dn = static_cast<std::size_t>(d);
  Rng root(structure_seed, kStructure);

  StructureTemplates t;
  t.structure_seed = structure_seed;
  t.mu_a = gaussian_matrix(root.split(kMuA), dn, 1.0);

  // mu_b = mu_a + separation * shift_scale * s for a seed-drawn
  // standard-normal shift: the separation parameter scales every
  // coordinate's cluster gap (and the shift norm) linearly, and shift_scale
  // puts separation 0.8 at roughly the per-coordinate feature sd.
  {
    const auto s = gaussian_matrix(root.split(kMuDir), dn, 1.0);
    t.mu_b.resize(dn);
    for (std::size_t j = 0; j < dn; ++j)
      t.mu_b[j] = t.mu_a[j] + spec.separation * spec.shift_scale * s[j];
  }

  t.b_global = gaussian_matrix(root.split(kBGlobal), dn * spec.global_latent_dim,
                               1.0 / std::sqrt(static_cast<double>(spec.global_latent_dim)));
  t.a_a = gaussian_matrix(root.split(kClusterA), dn * spec.cluster_latent_dim,
                          1.0 / std::sqrt(static_cast<double>(spec.cluster_latent_dim)));
  t.a_b = gaussian_matrix(root.split(kClusterB), dn * spec.cluster_latent_dim,
                          1.0 / std::sqrt(static_cast<double>(spec.cluster_latent_dim)));
  t.l_a = gaussian_matrix(root.split(kIdioA), dn * spec.idio_latent_dim, spec.idio_loading_sd);
  t.l_b = gaussian_matrix(root.split(kIdioB), dn * spec.idio_latent_dim, spec.idio_loading_sd);

  {
    Rng rng = root.split(kSigmaA);
    t.sigma_a.resize(dn);
    for (auto& v : t.sigma_a) v = rng.uniform(spec.noise_scale_lo, spec.noise_scale_hi);
    rng = root.split(kSigmaB);
    t.sigma_b.resize(dn);
    for (auto& v : t.sigma_b) v = rng.uniform(spec.noise_scale_lo, spec.noise_scale_hi);
  }

  const int width = spec.hidden_width;
  t.w_hidden = gaussian_matrix(root.split(kHiddenW), static_cast<std::size_t>(width) * dn,
                               1.0 / std::sqrt(static_cast<double>(d)));
  t.b_hidden = gaussian_matrix(root.split(kHiddenB), static_cast<std::size_t>(width), 1.0);
  t.w_alpha = gaussian_matrix(root.split(kHeadAlpha), static_cast<std::size_t>(width), 1.0);
  t.w_beta = gaussian_matrix(root.split(kHeadBeta),
                             static_cast<std::size_t>(spec.factor_dim) * width, 1.0);
  t.alpha_scale = 1.0;
  t.beta_scale.assign(static_cast<std::size_t>(spec.factor_dim), 1.0);

  // Calibrate output scales to unit sd on a probe from the covariate model at
  // latent stationarity, mixing clusters by their proportions.
  {
    Rng probe = root.split(kProbe);
    const int m = 2000;
    std::vector<double> x(dn);
    std::vector<double> ga(m);
    std::vector<std::vector<double>> gb(static_cast<std::size_t>(spec.factor_dim),
                                        std::vector<double>(m));
    for (int s = 0; s < m; ++s) {
      const bool minority = probe.uniform() >= spec.majority_frac;
      const auto& mu = minority ? t.mu_b : t.mu_a;
      const auto& ac = minority ? t.a_b : t.a_a;
      const auto& lc = minority ? t.l_b : t.l_a;
      const auto& sc = minority ? t.sigma_b : t.sigma_a;
      const auto u = probe.normal_vector(static_cast<std::size_t>(spec.global_latent_dim));
      const auto uc = probe.normal_vector(static_cast<std::size_t>(spec.cluster_latent_dim));
      const auto v = probe.normal_vector(static_cast<std::size_t>(spec.idio_latent_dim));
      for (std::size_t j = 0; j < dn; ++j) {
        double acc = mu[j];
        for (int k = 0; k < spec.global_latent_dim; ++k)
          acc += t.b_global[j * spec.global_latent_dim + static_cast<std::size_t>(k)] * u[static_cast<std::size_t>(k)];
        for (int k = 0; k < spec.cluster_latent_dim; ++k)
          acc += ac[j * spec.cluster_latent_dim + static_cast<std::size_t>(k)] * uc[static_cast<std::size_t>(k)];
        for (int k = 0; k < spec.idio_latent_dim; ++k)
          acc += lc[j * spec.idio_latent_dim + static_cast<std::size_t>(k)] * v[static_cast<std::size_t>(k)];
        acc += sc[j] * probe.normal();
        x[j] = acc;
      }
      ga[static_cast<std::size_t>(s)] = eval_level_net(t, x);
      const auto loads = eval_loading_net(t, x);
      for (int l = 0; l < spec.factor_dim; ++l)
        gb[static_cast<std::size_t>(l)][static_cast<std::size_t>(s)] = loads[static_cast<std::size_t>(l)];
    }
    const auto sd = [](const std::vector<double>& v) {
      double mean = 0.0;
      for (double x : v) mean += x;
      mean /= static_cast<double>(v.size());
      double var = 0.0;
      for (double x : v) var += (x - mean) * (x - mean);
      return std::sqrt(var / static_cast<double>(v.size()));
    };
    t.alpha_scale = spec.level_sd / std::max(sd(ga), 1e-12);
    for (int l = 0; l < spec.factor_dim; ++l)
      t.beta_scale[static_cast<std::size_t>(l)] =
          spec.loading_sd / std::max(sd(gb[static_cast<std::size_t>(l)]), 1e-12);
  }
  return t;
}

std::vector<double> simulate_factors(const ScenarioSpec& spec, std::uint64_t rep_seed) {
  const int fd = spec.factor_dim;
  const auto c = factor_cholesky(fd, spec.factor_corr_base);
  Rng rng = Rng(rep_seed, kReplication).split(kFactors);

  std::vector<double> f(static_cast<std::size_t>(spec.horizon) * fd, 0.0);
  std::vector<double> z(static_cast<std::size_t>(fd));
  for (int r = 1; r < spec.horizon; ++r) {
    for (auto& v : z) v = rng.normal();
    const double s = spec.scale_s(r);
    for (int j = 0; j < fd; ++j) {
      double shock = 0.0;
      for (int k = 0; k <= j; ++k)
        shock += c[static_cast<std::size_t>(j) * fd + k] * z[static_cast<std::size_t>(k)];
      const double phi = spec.phi[static_cast<std::size_t>(j)];
      f[static_cast<std::size_t>(r) * fd + j] =
          phi * f[static_cast<std::size_t>(r - 1) * fd + j] +
          (1.0 - phi) * spec.drift_m(r, j) + spec.factor_noise_scale * s * shock;
    }
  }
  return f;
}

Panel simulate_panel(const StructureTemplates& templates, const ScenarioSpec& spec,
                     std::uint64_t rep_seed) {
  const int n = spec.n_units;
  const int horizon = spec.horizon;
  const int d = spec.x_dim;
  const int fd = spec.factor_dim;
  const int n_major = spec.n_majority();
  Rng root(rep_seed, kReplication);

  const auto factors = simulate_factors(spec, rep_seed);

  // AR(1) latents at unit stationary variance, initialized at stationarity.
  const double rho = spec.latent_persistence;
  const double innov = std::sqrt(1.0 - rho * rho);
  const auto simulate_latent = [&](Rng rng, int dim) {
    std::vector<double> path(static_cast<std::size_t>(horizon) * dim);
    for (int j = 0; j < dim; ++j) path[static_cast<std::size_t>(j)] = rng.normal();
    for (int r = 1; r < horizon; ++r)
      for (int j = 0; j < dim; ++j)
        path[static_cast<std::size_t>(r) * dim + j] =
            rho * path[static_cast<std::size_t>(r - 1) * dim + j] + innov * rng.normal();
    return path;
  };
  const auto u_global = simulate_latent(root.split(kGlobalLatent), spec.global_latent_dim);
  const auto u_cluster_a = simulate_latent(root.split(kClusterLatent).split(0), spec.cluster_latent_dim);
  const auto u_cluster_b = simulate_latent(root.split(kClusterLatent).split(1), spec.cluster_latent_dim);

  std::vector<double> frailty(static_cast<std::size_t>(n), 0.0);
  if (spec.frailty_sd > 0.0) {
    Rng rng = root.split(kFrailty);
    for (int i = n_major; i < n; ++i)
      frailty[static_cast<std::size_t>(i)] = spec.frailty_sd * rng.normal();
  }

  Panel panel;
  panel.n_units = n;
  panel.horizon = horizon;
  panel.feature_dim = d + fd;
  panel.burn_in_end = spec.burn_in;
  panel.features.resize(static_cast<std::size_t>(n) * horizon * (d + fd));
  panel.outcomes.resize(static_cast<std::size_t>(n) * horizon);
  panel.unit_tags.resize(static_cast<std::size_t>(n));

  std::vector<double> x(static_cast<std::size_t>(d));
  std::vector<double> v(static_cast<std::size_t>(spec.idio_latent_dim));
  for (int i = 0; i < n; ++i) {
    const bool minority = i >= n_major;
    panel.unit_tags[static_cast<std::size_t>(i)] = minority ? 1 : 0;
    const auto& mu = minority ? templates.mu_b : templates.mu_a;
    const auto& ac = minority ? templates.a_b : templates.a_a;
    const auto& lc = minority ? templates.l_b : templates.l_a;
    const auto& sc = minority ? templates.sigma_b : templates.sigma_a;
    const auto& ucl = minority ? u_cluster_b : u_cluster_a;
    Rng unit_rng = root.split(kUnitBase + static_cast<std::uint64_t>(i));

    for (int t = 0; t < horizon; ++t) {
      const double* ug = u_global.data() + static_cast<std::size_t>(t) * spec.global_latent_dim;
      const double* uc = ucl.data() + static_cast<std::size_t>(t) * spec.cluster_latent_dim;
      for (int k = 0; k < spec.idio_latent_dim; ++k)
        v[static_cast<std::size_t>(k)] = unit_rng.normal();
      for (int j = 0; j < d; ++j) {
        double acc = mu[static_cast<std::size_t>(j)];
        const double* brow = templates.b_global.data() + static_cast<std::size_t>(j) * spec.global_latent_dim;
        for (int k = 0; k < spec.global_latent_dim; ++k) acc += brow[k] * ug[k];
        const double* arow = ac.data() + static_cast<std::size_t>(j) * spec.cluster_latent_dim;
        for (int k = 0; k < spec.cluster_latent_dim; ++k) acc += arow[k] * uc[k];
        const double* lrow = lc.data() + static_cast<std::size_t>(j) * spec.idio_latent_dim;
        for (int k = 0; k < spec.idio_latent_dim; ++k) acc += lrow[k] * v[k];
        acc += sc[static_cast<std::size_t>(j)] * unit_rng.normal();
        x[static_cast<std::size_t>(j)] = acc;
      }

      const double* f = factors.data() + static_cast<std::size_t>(t) * fd;
      const double level = eval_level_net(templates, x);
      const auto loads = eval_loading_net(templates, x);
      double y = level + frailty[static_cast<std::size_t>(i)] * f[0] +
                 spec.outcome_noise_sd * unit_rng.normal();
      for (int l = 0; l < fd; ++l) y += loads[static_cast<std::size_t>(l)] * f[l];

      const auto base = (static_cast<std::size_t>(i) * horizon + t) *
                        static_cast<std::size_t>(d + fd);
      std::copy(x.begin(), x.end(), panel.features.begin() + base);
      for (int l = 0; l < fd; ++l)
        panel.features[base + static_cast<std::size_t>(d + l)] = f[l];
      panel.outcomes[static_cast<std::size_t>(i) * horizon + t] = y;
    }
  }
  return panel;
}

}  // namespace panelcp
