#pragma once

#include "lel/model.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

namespace lel {

struct RegressionConfig {
  double learning_rate = 0.1;
  int epochs = 500;
  double l2 = 1e-4;
  double train_fraction = 0.8;
  bool normalise = false;
  std::uint64_t seed = 0;
};

void validate(const RegressionConfig& config);

// Dimension indices by descending entropy; ties keep ascending index.
std::vector<int> rank_by_entropy(std::span<const double> entropies);

struct NormalisedFeatures {
  Eigen::MatrixXd values;
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;  // 1 for degenerate columns
  std::vector<bool> degenerate;
};

// z-score apply_to with the column means and population stds of train.
// Columns whose std is below 1e-12 are only centred.
NormalisedFeatures normalise_features(const Eigen::MatrixXd& train, const Eigen::MatrixXd& apply_to);

// Row-wise softmax.
Eigen::MatrixXd softmax(const Eigen::MatrixXd& logits);

struct LossAndGradient {
  double loss = 0.0;
  Eigen::MatrixXd gradient;
};

// Mean cross-entropy of softmax(X W) against one-hot targets plus
// l2 * |W|^2 over every row except the last, which holds the bias. X must
// already carry the bias column.
LossAndGradient softmax_loss_and_gradient(const Eigen::MatrixXd& weights,
                                          const Eigen::MatrixXd& features,
                                          const Eigen::MatrixXd& one_hot, double l2);

struct SoftmaxModel {
  Eigen::MatrixXd weights;  // (p + 1) x K, last row is the bias
  std::vector<int> classes;
  std::vector<double> loss_history;

  std::vector<int> predict(const Eigen::MatrixXd& features) const;
};

// Full-batch gradient descent; a step that raises the loss is undone and the
// learning rate halved.
SoftmaxModel fit_softmax(const Eigen::MatrixXd& features, std::span<const int> labels,
                         const RegressionConfig& config);

double accuracy(std::span<const int> predicted, std::span<const int> truth);

struct TrainTestSplit {
  std::vector<int> train;
  std::vector<int> test;
};

TrainTestSplit make_split(int n, double train_fraction, std::uint64_t seed);

struct LogRegResult {
  SoftmaxModel model;
  double accuracy = 0.0;  // held-out
};

// Seeded split, optional normalisation from the train split, fit, held-out
// accuracy. Throws DegenerateTaskError with a single label category and
// ParameterError with fewer than 20 rows.
LogRegResult train_logreg(const Eigen::MatrixXd& features, std::span<const int> labels,
                          const RegressionConfig& config);

struct CurvePoint {
  int n_dims = 0;
  double accuracy_raw = 0.0;
  double accuracy_normalised = 0.0;
  double accuracy_raw_std = 0.0;
  double accuracy_normalised_std = 0.0;
  std::vector<int> dims_used;
};

// Accuracy against the top-n entropy-ranked dimensions for n = 1..d, raw and
// normalised, averaged over `repeats` splits (repeat r uses a split seeded
// from config.seed and r, shared by every n and both modes).
std::vector<CurvePoint> topn_curve(const LatentDump& dump, std::span<const double> entropies,
                                   const RegressionConfig& config, int repeats = 5);

}  // namespace lel
