#pragma once

#include "lel/model.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace lel {

// Population moments (divisor N) of each column of mu, and of sigma_sq when
// present. Entropy fields are left empty.
std::vector<DimensionStats> dim_moments(const LatentDump& dump);

// Pointwise KL(N(mu, sigma^2) || N(0, 1)) per dimension:
//   0.5 * (mu^2 + sigma^2 - log sigma^2 - 1)
// Throws DataError on a non-positive variance or mismatched lengths.
Eigen::VectorXd gaussian_kl(const Eigen::VectorXd& mu_row, const Eigen::VectorXd& sigma_sq_row);

double gaussian_kl(double mu, double sigma_sq);

// N(X) = exp(2h) / (2 pi e).
double entropy_power(double h);

// Linear-interpolation quantile of an unsorted sample, q in [0, 1].
double quantile(std::vector<double> values, double q);

// Mean and quantiles of the pointwise KL of column j.
KlSummary kl_summary(const LatentDump& dump, Eigen::Index column);

struct BoundCheck {
  double second_moment = 0.0;
  double variance = 0.0;
  double entropy_power = 0.0;
  bool chain_holds = false;
  // min(second_moment - variance, variance - entropy_power)
  double slack = 0.0;
};

// E[mu^2] >= Var(mu) >= N(mu), each inequality allowed to fail by tol
// relative to the larger side. Missing reference entropy throws
// ParameterError.
std::vector<BoundCheck> check_bound_chain(const std::vector<DimensionStats>& stats,
                                          const std::string& reference_estimator,
                                          double tol = 0.05);

BoundCheck check_bound(double second_moment, double variance, double entropy_power,
                       double tol = 0.05);

// Moments, entropies for every requested estimator, entropy power from the
// first estimator in the list, KL summaries and the mixed score when sigma is
// present.
std::vector<DimensionStats> compute_dimension_stats(const LatentDump& dump,
                                                    std::span<const Estimator> estimators,
                                                    const EstimatorConfig& config);

}  // namespace lel
