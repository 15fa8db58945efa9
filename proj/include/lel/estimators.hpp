#pragma once

#include "lel/model.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace lel {

// Trace-normalised Gaussian kernel matrix over N samples.
struct GramMatrix {
  Eigen::MatrixXd entries;
  double bandwidth = 0.0;
  // Set when every sample coincides and the rule produced a zero bandwidth;
  // entries are then J/N.
  bool degenerate = false;

  Eigen::Index size() const { return entries.rows(); }
};

struct EntropyEstimate {
  double value = 0.0;  // nats
  Estimator estimator = Estimator::knn;
  bool degenerate = false;
  // Raised when EM stopped at the iteration cap without meeting tolerance.
  bool warning = false;
  EstimatorConfig config;
};

// Bandwidth produced by rule over the pairwise distances of samples (rows).
// Median falls back to Silverman when the median distance is zero. Returns 0
// for all-identical samples.
double select_bandwidth(const Eigen::MatrixXd& samples, const BandwidthRule& rule);

// K_ij = exp(-|x_i - x_j|^2 / (2 s^2)) / N. Requires N >= 2 and finite input.
GramMatrix gram_matrix(const Eigen::MatrixXd& samples, const BandwidthRule& rule);

// (1 / (1 - alpha)) log sum_i lambda_i^alpha. Eigenvalues in [-1e-9, 0) are
// treated as zero; anything more negative raises NumericalError.
double renyi_from_eigenvalues(const Eigen::VectorXd& eigenvalues, double alpha);

EntropyEstimate renyi_entropy(const GramMatrix& gram, double alpha);

// Entropy of (A o B) / tr(A o B). Both Grams must come from the same ordered
// samples.
EntropyEstimate joint_renyi_entropy(const GramMatrix& a, const GramMatrix& b, double alpha);

struct MutualInformation {
  double value = 0.0;  // raw I_alpha, not clamped at zero
  double entropy_x = 0.0;
  double entropy_z = 0.0;
  double joint_entropy = 0.0;
};

// I = S(A) + S(B) - S(A, B) with A, B built from x and z under
// config.bandwidth. Rows beyond config.gram_sample_cap are subsampled (the
// same rows for both sides).
MutualInformation mutual_information(const Eigen::MatrixXd& x, const Eigen::MatrixXd& z,
                                     const EstimatorConfig& config);

EntropyEstimate histogram_entropy(std::span<const double> samples, BinRule rule);

// Kozachenko-Leonenko estimate for 1-D samples.
EntropyEstimate knn_entropy(std::span<const double> samples, int k, std::uint64_t seed = 0);

// One-dimensional Gaussian mixture fitted by EM.
struct GaussianMixture1d {
  std::vector<double> weights;
  std::vector<double> means;
  std::vector<double> variances;

  double log_density(double x) const;
  std::size_t components() const { return weights.size(); }
};

struct MixtureFit {
  GaussianMixture1d model;
  double log_likelihood = 0.0;
  double bic = 0.0;
  int iterations = 0;
  bool converged = false;
};

MixtureFit fit_gaussian_mixture(std::span<const double> samples, int components,
                                int max_iterations, double tolerance);

// EM fits for 1..max components, BIC selection, then Monte Carlo entropy over
// fresh draws from the selected model.
EntropyEstimate gmm_mc_entropy(std::span<const double> samples, const EstimatorConfig& config);

// Dispatch on config.estimator for a 1-D sample. Renyi uses a Gram over the
// (subsampled) sample with config.bandwidth.
EntropyEstimate estimate_entropy(std::span<const double> samples, const EstimatorConfig& config);

// Entropy of every column of mu under config.estimator. For the Renyi
// estimator a single bandwidth is chosen from the pairwise distances pooled
// across all columns, so that columns of different spread stay comparable.
std::vector<EntropyEstimate> dimension_entropies(const Eigen::MatrixXd& mu,
                                                 const EstimatorConfig& config);

}  // namespace lel
