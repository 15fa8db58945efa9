#include "lel/error.hpp"
#include "lel/estimators.hpp"
#include "lel/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

namespace lel {
namespace {

constexpr double kVarianceFloor = 1e-10;
constexpr double kSingularVariance = 1e-12;
constexpr double kMinWeight = 1e-12;

double log_normal_pdf(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * (std::log(2.0 * std::numbers::pi * var) + d * d / var);
}

double floor_variance(double v) { return v < kSingularVariance ? kVarianceFloor : v; }

// Contiguous equal-count chunks of the sorted sample seed the components.
GaussianMixture1d initial_mixture(const std::vector<double>& sorted, int components) {
  GaussianMixture1d m;
  const std::size_t n = sorted.size();
  const auto k = static_cast<std::size_t>(components);
  for (std::size_t c = 0; c < k; ++c) {
    const std::size_t begin = c * n / k;
    const std::size_t end = (c + 1) * n / k;
    double mean = 0.0;
    for (std::size_t i = begin; i < end; ++i) mean += sorted[i];
    mean /= static_cast<double>(end - begin);
    double var = 0.0;
    for (std::size_t i = begin; i < end; ++i) var += (sorted[i] - mean) * (sorted[i] - mean);
    var /= static_cast<double>(end - begin);
    m.weights.push_back(1.0 / static_cast<double>(k));
    m.means.push_back(mean);
    m.variances.push_back(floor_variance(var));
  }
  return m;
}

}  // namespace

double GaussianMixture1d::log_density(double x) const {
  double max_term = -std::numeric_limits<double>::infinity();
  std::vector<double> terms(weights.size());
  for (std::size_t c = 0; c < weights.size(); ++c) {
    terms[c] = std::log(weights[c]) + log_normal_pdf(x, means[c], variances[c]);
    max_term = std::max(max_term, terms[c]);
  }
  double s = 0.0;
  for (double t : terms) s += std::exp(t - max_term);
  return max_term + std::log(s);
}

MixtureFit fit_gaussian_mixture(std::span<const double> samples, int components,
                                int max_iterations, double tolerance) {
  if (components < 1) throw ParameterError("mixture needs at least one component");
  if (samples.size() < static_cast<std::size_t>(components)) {
    throw ParameterError("fewer samples than mixture components");
  }
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());

  const std::size_t n = sorted.size();
  const auto k = static_cast<std::size_t>(components);
  MixtureFit fit;
  fit.model = initial_mixture(sorted, components);

  std::vector<double> resp(n * k);
  double previous = -std::numeric_limits<double>::infinity();
  for (int iter = 1; iter <= max_iterations; ++iter) {
    // E-step, with the log-likelihood of the current parameters.
    double ll = 0.0;
    std::vector<double> log_w(k);
    for (std::size_t c = 0; c < k; ++c) log_w[c] = std::log(fit.model.weights[c]);
    for (std::size_t i = 0; i < n; ++i) {
      double* r = &resp[i * k];
      double max_term = -std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        r[c] = log_w[c] + log_normal_pdf(sorted[i], fit.model.means[c], fit.model.variances[c]);
        max_term = std::max(max_term, r[c]);
      }
      double s = 0.0;
      for (std::size_t c = 0; c < k; ++c) {
        r[c] = std::exp(r[c] - max_term);
        s += r[c];
      }
      for (std::size_t c = 0; c < k; ++c) r[c] /= s;
      ll += max_term + std::log(s);
    }
    fit.log_likelihood = ll;
    fit.iterations = iter;
    if (std::abs(ll - previous) / static_cast<double>(n) < tolerance) {
      fit.converged = true;
      break;
    }
    previous = ll;

    // M-step.
    for (std::size_t c = 0; c < k; ++c) {
      double nk = 0.0;
      double sx = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        nk += resp[i * k + c];
        sx += resp[i * k + c] * sorted[i];
      }
      if (nk < kMinWeight * static_cast<double>(n)) {
        fit.model.weights[c] = kMinWeight;
        continue;
      }
      const double mean = sx / nk;
      double sv = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = sorted[i] - mean;
        sv += resp[i * k + c] * d * d;
      }
      fit.model.weights[c] = nk / static_cast<double>(n);
      fit.model.means[c] = mean;
      fit.model.variances[c] = floor_variance(sv / nk);
    }
    double total = 0.0;
    for (double w : fit.model.weights) total += w;
    for (double& w : fit.model.weights) w /= total;
  }

  const double params = 3.0 * static_cast<double>(k) - 1.0;
  fit.bic = -2.0 * fit.log_likelihood + params * std::log(static_cast<double>(n));
  return fit;
}

EntropyEstimate gmm_mc_entropy(std::span<const double> samples, const EstimatorConfig& config) {
  validate(config);
  if (samples.size() < 50) throw ParameterError("gmm entropy needs at least 50 samples");
  if (!std::all_of(samples.begin(), samples.end(), [](double v) { return std::isfinite(v); })) {
    throw DataError("gmm entropy: non-finite sample");
  }

  EntropyEstimate out;
  out.estimator = Estimator::gmm_mc;
  out.config = config;
  out.config.estimator = Estimator::gmm_mc;

  const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
  if (*lo == *hi) {
    out.degenerate = true;
    out.value = kDegenerateEntropy;
    return out;
  }

  const int max_k = std::min<int>(config.gmm_max_components, static_cast<int>(samples.size()));
  MixtureFit best;
  bool have_best = false;
  for (int k = 1; k <= max_k; ++k) {
    auto fit = fit_gaussian_mixture(samples, k, config.gmm_max_iterations, config.gmm_tolerance);
    if (!have_best || fit.bic < best.bic) {
      best = std::move(fit);
      have_best = true;
    }
  }
  out.warning = !best.converged;

  auto rng = make_rng(config.seed, 0x676d6d);
  std::discrete_distribution<std::size_t> pick(best.model.weights.begin(), best.model.weights.end());
  std::normal_distribution<double> normal(0.0, 1.0);
  double sum = 0.0;
  for (int m = 0; m < config.gmm_mc_samples; ++m) {
    const std::size_t c = pick(rng);
    const double z = best.model.means[c] + std::sqrt(best.model.variances[c]) * normal(rng);
    sum -= best.model.log_density(z);
  }
  out.value = sum / static_cast<double>(config.gmm_mc_samples);
  return out;
}

}  // namespace lel
