#include "lel/statistics.hpp"

#include "lel/classifier.hpp"
#include "lel/error.hpp"
#include "lel/estimators.hpp"
#include "lel/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace lel {

std::vector<DimensionStats> dim_moments(const LatentDump& dump) {
  const Eigen::Index n = dump.n();
  const double nd = static_cast<double>(n);
  std::vector<DimensionStats> out(static_cast<std::size_t>(dump.d()));
  for (Eigen::Index j = 0; j < dump.d(); ++j) {
    auto& s = out[static_cast<std::size_t>(j)];
    const auto col = dump.mu.col(j).array();
    s.mean_mu = col.mean();
    s.var_mu = (col - s.mean_mu).square().sum() / nd;
    s.second_moment_mu = col.square().sum() / nd;
    if (dump.sigma_sq) {
      const auto sc = dump.sigma_sq->col(j).array();
      const double m = sc.mean();
      s.mean_sigma_sq = m;
      s.var_sigma_sq = (sc - m).square().sum() / nd;
    }
  }
  return out;
}

double gaussian_kl(double mu, double sigma_sq) {
  if (!(sigma_sq > 0.0)) throw DataError("gaussian_kl: variance must be > 0");
  return 0.5 * (mu * mu + sigma_sq - std::log(sigma_sq) - 1.0);
}

Eigen::VectorXd gaussian_kl(const Eigen::VectorXd& mu_row, const Eigen::VectorXd& sigma_sq_row) {
  if (mu_row.size() != sigma_sq_row.size()) {
    throw ConsistencyError("gaussian_kl: mu and sigma_sq lengths differ");
  }
  Eigen::VectorXd kl(mu_row.size());
  for (Eigen::Index i = 0; i < mu_row.size(); ++i) kl(i) = gaussian_kl(mu_row(i), sigma_sq_row(i));
  return kl;
}

double entropy_power(double h) {
  return std::exp(2.0 * h) / (2.0 * std::numbers::pi * std::numbers::e);
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw ParameterError("quantile of an empty sample");
  q = std::clamp(q, 0.0, 1.0);
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

KlSummary kl_summary(const LatentDump& dump, Eigen::Index column) {
  if (!dump.sigma_sq) throw ParameterError("kl_summary needs sigma_sq");
  std::vector<double> kl(static_cast<std::size_t>(dump.n()));
  double sum = 0.0;
  for (Eigen::Index i = 0; i < dump.n(); ++i) {
    kl[static_cast<std::size_t>(i)] = gaussian_kl(dump.mu(i, column), (*dump.sigma_sq)(i, column));
    sum += kl[static_cast<std::size_t>(i)];
  }
  KlSummary s;
  s.mean = sum / static_cast<double>(dump.n());
  std::sort(kl.begin(), kl.end());
  const double qs[5] = {0.0, 0.05, 0.5, 0.95, 1.0};
  for (std::size_t k = 0; k < 5; ++k) s.quantiles[k] = quantile(kl, qs[k]);
  return s;
}

BoundCheck check_bound(double second_moment, double variance, double power, double tol) {
  // Absolute floor so a zero-variance column against the sentinel entropy
  // power (about 1e-44) still counts as 0 >= 0.
  constexpr double kAbsoluteFloor = 1e-30;
  BoundCheck b;
  b.second_moment = second_moment;
  b.variance = variance;
  b.entropy_power = power;
  const bool first = second_moment >= variance - tol * std::max(std::abs(second_moment), std::abs(variance)) - kAbsoluteFloor;
  const bool second = variance >= power - tol * std::max(std::abs(variance), std::abs(power)) - kAbsoluteFloor;
  b.chain_holds = first && second;
  b.slack = std::min(second_moment - variance, variance - power);
  return b;
}

std::vector<BoundCheck> check_bound_chain(const std::vector<DimensionStats>& stats,
                                          const std::string& reference_estimator, double tol) {
  std::vector<BoundCheck> out;
  out.reserve(stats.size());
  for (std::size_t j = 0; j < stats.size(); ++j) {
    const auto it = stats[j].entropy.find(reference_estimator);
    if (it == stats[j].entropy.end()) {
      throw ParameterError("dimension " + std::to_string(j) + " has no '" + reference_estimator +
                           "' entropy");
    }
    out.push_back(check_bound(stats[j].second_moment_mu, stats[j].var_mu, entropy_power(it->second), tol));
  }
  return out;
}

std::vector<DimensionStats> compute_dimension_stats(const LatentDump& dump,
                                                    std::span<const Estimator> estimators,
                                                    const EstimatorConfig& config) {
  if (estimators.empty()) throw ParameterError("at least one estimator is required");
  auto stats = dim_moments(dump);
  for (Estimator e : estimators) {
    auto cfg = config;
    cfg.estimator = e;
    const auto estimates = dimension_entropies(dump.mu, cfg);
    const std::string name(to_string(e));
    for (std::size_t j = 0; j < stats.size(); ++j) {
      stats[j].entropy[name] = estimates[j].value;
      if (estimates[j].degenerate) stats[j].degenerate_estimators.push_back(name);
    }
  }
  const std::string reference(to_string(estimators.front()));
  for (auto& s : stats) s.entropy_power = entropy_power(s.entropy.at(reference));

  if (dump.sigma_sq) {
    parallel_for(stats.size(), [&](std::size_t j) {
      const auto col = static_cast<Eigen::Index>(j);
      stats[j].kl = kl_summary(dump, col);
      const Eigen::VectorXd sc = dump.sigma_sq->col(col);
      stats[j].mixed_score = mixed_score({sc.data(), static_cast<std::size_t>(sc.size())});
    });
  }
  return stats;
}

}  // namespace lel
