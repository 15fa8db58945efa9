#include "lel/synthetic.hpp"

#include "lel/error.hpp"
#include "lel/estimators.hpp"
#include "lel/rng.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace lel {
namespace {

constexpr double kPassiveMeanVar = 0.001;
constexpr double kActiveSigmaSq = 0.01;
constexpr double kPassiveSigmaSq = 1.0;
constexpr double kLogSpread = 0.05;

constexpr std::uint64_t kLayoutStream = 0x6c61796f7574;
constexpr std::uint64_t kLabelStream = 0x6c6162656c73;

double normal_pdf(double z, double var) {
  return std::exp(-0.5 * z * z / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

}  // namespace

void validate(const SpikeSlabSpec& s) {
  if (!(s.pi > 0.0 && s.pi <= 1.0)) throw ParameterError("spike-and-slab pi must lie in (0, 1]");
  if (!(s.epsilon > 0.0)) throw ParameterError("spike std epsilon must be > 0");
  if (!(s.target_var > 0.0)) throw ParameterError("target variance must be > 0");
  if (!(s.target_var > (1.0 - s.pi) * s.epsilon * s.epsilon)) {
    throw ParameterError("target variance must exceed (1 - pi) * epsilon^2, otherwise the slab "
                         "variance is not positive");
  }
  if (s.n < 2) throw ParameterError("spike-and-slab sample count must be >= 2");
}

double slab_variance(const SpikeSlabSpec& s) {
  validate(s);
  return (s.target_var - (1.0 - s.pi) * s.epsilon * s.epsilon) / s.pi;
}

SpikeSlabSample spike_slab_sample(const SpikeSlabSpec& spec) {
  SpikeSlabSample out;
  out.slab_variance = slab_variance(spec);
  const double slab_sd = std::sqrt(out.slab_variance);
  auto rng = make_rng(spec.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  out.values.resize(spec.n);
  for (int i = 0; i < spec.n; ++i) {
    const bool slab = u(rng) < spec.pi;
    out.values(i) = (slab ? slab_sd : spec.epsilon) * normal(rng);
  }
  return out;
}

double spike_slab_density(double z, double pi, double spike_var, double slab_var) {
  const double spike = pi < 1.0 ? (1.0 - pi) * normal_pdf(z, spike_var) : 0.0;
  return spike + pi * normal_pdf(z, slab_var);
}

double spike_slab_entropy(const SpikeSlabSpec& spec, double tolerance) {
  const double slab_var = slab_variance(spec);
  const double spike_var = spec.epsilon * spec.epsilon;
  auto integrand = [&](double z) {
    const double p = spike_slab_density(z, spec.pi, spike_var, slab_var);
    return p > 0.0 ? -p * std::log(p) : 0.0;
  };
  const double limit = 10.0 * std::sqrt(spec.target_var);
  // Breakpoints around the spike keep the adaptive rule from stepping over it.
  const double inner = std::min(10.0 * spec.epsilon, limit);
  const double cuts[] = {-limit, -inner, 0.0, inner, limit};
  using Rule = boost::math::quadrature::gauss_kronrod<double, 61>;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < std::size(cuts); ++i) {
    if (cuts[i + 1] > cuts[i]) total += Rule::integrate(integrand, cuts[i], cuts[i + 1], 20, tolerance);
  }
  return total;
}

std::vector<SweepRow> spike_slab_sweep(std::span<const double> pi_grid, const SpikeSlabSpec& base,
                                       std::span<const Estimator> estimators,
                                       const EstimatorConfig& config) {
  for (double pi : pi_grid) {
    if (!(pi > 0.0 && pi <= 1.0)) throw ParameterError("pi grid values must lie in (0, 1]");
  }
  std::vector<SweepRow> rows;
  for (std::size_t g = 0; g < pi_grid.size(); ++g) {
    auto spec = base;
    spec.pi = pi_grid[g];
    spec.seed = mix_seed(base.seed, g);
    const auto sample = spike_slab_sample(spec);
    const double oracle = spike_slab_entropy(spec);
    const double mean = sample.values.mean();
    const double var = (sample.values.array() - mean).square().mean();
    const std::span<const double> values{sample.values.data(), static_cast<std::size_t>(sample.values.size())};
    for (Estimator e : estimators) {
      auto cfg = config;
      cfg.estimator = e;
      cfg.seed = mix_seed(config.seed, g);
      rows.push_back({spec.pi, e, estimate_entropy(values, cfg).value, oracle, var});
    }
  }
  return rows;
}

void validate(const PlantedSpec& s) {
  if (s.n_active < 0 || s.n_passive < 0 || s.n_mixed < 0) {
    throw ParameterError("dimension counts must be non-negative");
  }
  if (s.n_active + s.n_passive + s.n_mixed < 1) throw ParameterError("need at least one dimension");
  if (s.n < 100) throw ParameterError("planted dumps need n >= 100");
  if (!(s.active_scale > 0.0)) throw ParameterError("active scale must be > 0");
  if (!(s.mixed_p > 0.0 && s.mixed_p < 1.0)) throw ParameterError("mixed_p must lie in (0, 1)");
  if (!(s.label_noise >= 0.0 && s.label_noise <= 0.5)) {
    throw ParameterError("label noise must lie in [0, 0.5]");
  }
}

PlantedDump planted_regime_dump(const PlantedSpec& spec) {
  validate(spec);
  const int d = spec.n_active + spec.n_passive + spec.n_mixed;
  PlantedDump out;
  out.ground_truth.insert(out.ground_truth.end(), static_cast<std::size_t>(spec.n_active), Label::active);
  out.ground_truth.insert(out.ground_truth.end(), static_cast<std::size_t>(spec.n_passive), Label::passive);
  out.ground_truth.insert(out.ground_truth.end(), static_cast<std::size_t>(spec.n_mixed), Label::mixed);
  if (spec.shuffle_layout) {
    auto rng = make_rng(spec.seed, kLayoutStream);
    std::shuffle(out.ground_truth.begin(), out.ground_truth.end(), rng);
  }

  auto& dump = out.dump;
  dump.mu.resize(spec.n, d);
  Eigen::MatrixXd sigma_sq(spec.n, d);
  const double passive_sd = std::sqrt(kPassiveMeanVar);

  for (int j = 0; j < d; ++j) {
    auto rng = make_rng(spec.seed, static_cast<std::uint64_t>(j));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Label kind = out.ground_truth[static_cast<std::size_t>(j)];
    for (int i = 0; i < spec.n; ++i) {
      bool passive_state = kind == Label::passive;
      if (kind == Label::mixed) passive_state = u(rng) < spec.mixed_p;
      const double spread = passive_state ? passive_sd : spec.active_scale;
      const double centre = passive_state ? kPassiveSigmaSq : kActiveSigmaSq;
      dump.mu(i, j) = spread * normal(rng);
      sigma_sq(i, j) = centre * std::exp(kLogSpread * normal(rng));
    }
  }
  dump.sigma_sq = std::move(sigma_sq);

  if (spec.with_labels) {
    auto rng = make_rng(spec.seed, kLabelStream);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
    for (int j = 0; j < d; ++j) {
      if (out.ground_truth[static_cast<std::size_t>(j)] == Label::active) w(j) = normal(rng);
    }
    const Eigen::VectorXd score = dump.mu * w;
    std::vector<int> labels(static_cast<std::size_t>(spec.n));
    for (int i = 0; i < spec.n; ++i) {
      int y = spec.n_active > 0 ? (score(i) > 0.0 ? 1 : 0) : (u(rng) < 0.5 ? 1 : 0);
      if (u(rng) < spec.label_noise) y = 1 - y;
      labels[static_cast<std::size_t>(i)] = y;
    }
    dump.labels = std::move(labels);
  }

  dump.meta.source = "synthetic/planted";
  dump.meta.seed = spec.seed;
  dump.meta.hyper_params = {{"n_active", spec.n_active},     {"n_passive", spec.n_passive},
                            {"n_mixed", spec.n_mixed},       {"n", spec.n},
                            {"active_scale", spec.active_scale}, {"mixed_p", spec.mixed_p},
                            {"label_noise", spec.label_noise}};
  return out;
}

double planted_mean_entropy(const PlantedSpec& spec, Label kind) {
  validate(spec);
  auto gaussian = [](double var) {
    return 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * var);
  };
  const double active_var = spec.active_scale * spec.active_scale;
  switch (kind) {
    case Label::active: return gaussian(active_var);
    case Label::passive: return gaussian(kPassiveMeanVar);
    case Label::mixed: {
      SpikeSlabSpec mix;
      mix.pi = 1.0 - spec.mixed_p;
      mix.epsilon = std::sqrt(kPassiveMeanVar);
      mix.target_var = mix.pi * active_var + spec.mixed_p * kPassiveMeanVar;
      return spike_slab_entropy(mix);
    }
    case Label::unclassified: break;
  }
  throw ParameterError("planted dimensions are active, passive or mixed");
}

}  // namespace lel
