#include "lel/downstream.hpp"

#include "lel/error.hpp"
#include "lel/parallel.hpp"
#include "lel/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lel {
namespace {

constexpr double kDegenerateScale = 1e-12;

Eigen::MatrixXd with_bias(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd out(x.rows(), x.cols() + 1);
  out.leftCols(x.cols()) = x;
  out.col(x.cols()).setOnes();
  return out;
}

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& m, const std::vector<int>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  return out;
}

std::vector<int> pick(std::span<const int> v, const std::vector<int>& rows) {
  std::vector<int> out;
  out.reserve(rows.size());
  for (int r : rows) out.push_back(v[static_cast<std::size_t>(r)]);
  return out;
}

std::vector<int> distinct(std::span<const int> labels) {
  std::vector<int> classes(labels.begin(), labels.end());
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  return classes;
}

// Fit on train, score on test. Classes come from the full label set so a
// train split missing a class still yields a well-formed model.
double fit_and_score(const Eigen::MatrixXd& x, std::span<const int> labels, const TrainTestSplit& split,
                     const RegressionConfig& config) {
  Eigen::MatrixXd train = rows_of(x, split.train);
  Eigen::MatrixXd test = rows_of(x, split.test);
  if (config.normalise) {
    auto norm_train = normalise_features(train, train);
    auto norm_test = normalise_features(train, test);
    train = std::move(norm_train.values);
    test = std::move(norm_test.values);
  }
  const auto train_labels = pick(labels, split.train);
  const auto test_labels = pick(labels, split.test);
  auto model = fit_softmax(train, train_labels, config);
  return accuracy(model.predict(test), test_labels);
}

std::pair<double, double> mean_std(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  return {mean, std::sqrt(var / n)};
}

}  // namespace

void validate(const RegressionConfig& c) {
  if (!(c.learning_rate > 0.0)) throw ParameterError("learning rate must be > 0");
  if (c.epochs < 1) throw ParameterError("epochs must be >= 1");
  if (!(c.l2 >= 0.0)) throw ParameterError("l2 penalty must be >= 0");
  if (!(c.train_fraction > 0.0 && c.train_fraction < 1.0)) {
    throw ParameterError("train fraction must lie in (0, 1)");
  }
}

std::vector<int> rank_by_entropy(std::span<const double> entropies) {
  std::vector<int> order(entropies.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return entropies[static_cast<std::size_t>(a)] > entropies[static_cast<std::size_t>(b)];
  });
  return order;
}

NormalisedFeatures normalise_features(const Eigen::MatrixXd& train, const Eigen::MatrixXd& apply_to) {
  if (train.cols() != apply_to.cols()) throw ConsistencyError("normalise_features: column counts differ");
  if (train.rows() < 1) throw ParameterError("normalise_features: empty training matrix");
  NormalisedFeatures out;
  const Eigen::Index p = train.cols();
  out.mean = train.colwise().mean().transpose();
  out.scale.resize(p);
  out.degenerate.assign(static_cast<std::size_t>(p), false);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double sd = std::sqrt((train.col(j).array() - out.mean(j)).square().mean());
    if (sd < kDegenerateScale) {
      out.scale(j) = 1.0;
      out.degenerate[static_cast<std::size_t>(j)] = true;
    } else {
      out.scale(j) = sd;
    }
  }
  out.values = (apply_to.rowwise() - out.mean.transpose()).array().rowwise() /
               out.scale.transpose().array();
  return out;
}

Eigen::MatrixXd softmax(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd p = logits.colwise() - logits.rowwise().maxCoeff();
  p = p.array().exp();
  p.array().colwise() /= p.rowwise().sum().array();
  return p;
}

LossAndGradient softmax_loss_and_gradient(const Eigen::MatrixXd& weights, const Eigen::MatrixXd& features,
                                          const Eigen::MatrixXd& one_hot, double l2) {
  if (features.cols() != weights.rows() || one_hot.cols() != weights.cols() ||
      one_hot.rows() != features.rows()) {
    throw ConsistencyError("softmax_loss_and_gradient: shape mismatch");
  }
  const double n = static_cast<double>(features.rows());
  const Eigen::MatrixXd logits = features * weights;
  const Eigen::VectorXd row_max = logits.rowwise().maxCoeff();
  const Eigen::MatrixXd shifted = logits.colwise() - row_max;
  const Eigen::VectorXd log_norm = shifted.array().exp().rowwise().sum().log();
  const Eigen::MatrixXd log_p = shifted.colwise() - log_norm;

  const Eigen::Index penalised = weights.rows() - 1;
  LossAndGradient out;
  out.loss = -(one_hot.array() * log_p.array()).sum() / n +
             l2 * weights.topRows(penalised).squaredNorm();
  out.gradient = features.transpose() * (log_p.array().exp().matrix() - one_hot) / n;
  out.gradient.topRows(penalised) += 2.0 * l2 * weights.topRows(penalised);
  return out;
}

std::vector<int> SoftmaxModel::predict(const Eigen::MatrixXd& features) const {
  if (features.cols() + 1 != weights.rows()) throw ConsistencyError("predict: feature count mismatch");
  const Eigen::MatrixXd logits = with_bias(features) * weights;
  std::vector<int> out(static_cast<std::size_t>(features.rows()));
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Eigen::Index best = 0;
    logits.row(i).maxCoeff(&best);
    out[static_cast<std::size_t>(i)] = classes[static_cast<std::size_t>(best)];
  }
  return out;
}

SoftmaxModel fit_softmax(const Eigen::MatrixXd& features, std::span<const int> labels,
                         const RegressionConfig& config) {
  validate(config);
  if (static_cast<Eigen::Index>(labels.size()) != features.rows()) {
    throw ConsistencyError("fit_softmax: one label per row required");
  }
  if (features.rows() == 0) throw ParameterError("fit_softmax: no rows");
  SoftmaxModel model;
  model.classes = distinct(labels);
  const auto k = static_cast<Eigen::Index>(model.classes.size());
  Eigen::MatrixXd one_hot = Eigen::MatrixXd::Zero(features.rows(), k);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto c = std::lower_bound(model.classes.begin(), model.classes.end(), labels[i]) -
                   model.classes.begin();
    one_hot(static_cast<Eigen::Index>(i), c) = 1.0;
  }
  const Eigen::MatrixXd x = with_bias(features);
  model.weights = Eigen::MatrixXd::Zero(x.cols(), k);

  double lr = config.learning_rate;
  auto current = softmax_loss_and_gradient(model.weights, x, one_hot, config.l2);
  model.loss_history.push_back(current.loss);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Eigen::MatrixXd candidate = model.weights - lr * current.gradient;
    auto next = softmax_loss_and_gradient(candidate, x, one_hot, config.l2);
    if (!(next.loss <= current.loss)) {
      lr *= 0.5;
    } else {
      model.weights = std::move(candidate);
      current = std::move(next);
    }
    model.loss_history.push_back(current.loss);
  }
  return model;
}

double accuracy(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) throw ConsistencyError("accuracy: length mismatch");
  if (truth.empty()) throw ParameterError("accuracy of an empty set");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

TrainTestSplit make_split(int n, double train_fraction, std::uint64_t seed) {
  if (n < 2) throw ParameterError("split needs at least 2 rows");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ParameterError("train fraction must lie in (0, 1)");
  }
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  auto rng = make_rng(seed, 0x73706c6974);
  std::shuffle(order.begin(), order.end(), rng);
  const int n_train = std::clamp(static_cast<int>(std::lround(train_fraction * n)), 1, n - 1);
  TrainTestSplit s;
  s.train.assign(order.begin(), order.begin() + n_train);
  s.test.assign(order.begin() + n_train, order.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

LogRegResult train_logreg(const Eigen::MatrixXd& features, std::span<const int> labels,
                          const RegressionConfig& config) {
  validate(config);
  if (static_cast<Eigen::Index>(labels.size()) != features.rows()) {
    throw ConsistencyError("train_logreg: one label per row required");
  }
  if (features.rows() < 20) throw ParameterError("logistic regression needs at least 20 rows");
  if (distinct(labels).size() < 2) {
    throw DegenerateTaskError("logistic regression needs at least two label categories");
  }
  const auto split = make_split(static_cast<int>(features.rows()), config.train_fraction, config.seed);
  Eigen::MatrixXd train = rows_of(features, split.train);
  Eigen::MatrixXd test = rows_of(features, split.test);
  if (config.normalise) {
    auto norm_test = normalise_features(train, test);
    auto norm_train = normalise_features(train, train);
    train = std::move(norm_train.values);
    test = std::move(norm_test.values);
  }
  LogRegResult r;
  r.model = fit_softmax(train, pick(labels, split.train), config);
  r.accuracy = accuracy(r.model.predict(test), pick(labels, split.test));
  return r;
}

std::vector<CurvePoint> topn_curve(const LatentDump& dump, std::span<const double> entropies,
                                   const RegressionConfig& config, int repeats) {
  validate(config);
  if (!dump.labels) throw ParameterError("downstream evaluation needs labels");
  if (repeats < 1) throw ParameterError("repeat count must be >= 1");
  if (static_cast<Eigen::Index>(entropies.size()) != dump.d()) {
    throw ConsistencyError("topn_curve: one entropy per dimension required");
  }
  const auto& labels = *dump.labels;
  if (dump.n() < 20) throw ParameterError("logistic regression needs at least 20 rows");
  if (distinct(labels).size() < 2) {
    throw DegenerateTaskError("logistic regression needs at least two label categories");
  }

  const auto order = rank_by_entropy(entropies);
  const auto d = static_cast<std::size_t>(dump.d());
  std::vector<std::vector<double>> raw(d, std::vector<double>(static_cast<std::size_t>(repeats)));
  std::vector<std::vector<double>> norm = raw;

  std::vector<TrainTestSplit> splits;
  for (int r = 0; r < repeats; ++r) {
    splits.push_back(make_split(static_cast<int>(dump.n()), config.train_fraction,
                                mix_seed(config.seed, static_cast<std::uint64_t>(r))));
  }

  parallel_for(d * static_cast<std::size_t>(repeats), [&](std::size_t task) {
    const std::size_t m = task / static_cast<std::size_t>(repeats);
    const std::size_t r = task % static_cast<std::size_t>(repeats);
    const std::vector<int> dims(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m + 1));
    const Eigen::MatrixXd x = dump.mu(Eigen::all, dims);
    auto cfg = config;
    cfg.normalise = false;
    raw[m][r] = fit_and_score(x, labels, splits[r], cfg);
    cfg.normalise = true;
    norm[m][r] = fit_and_score(x, labels, splits[r], cfg);
  });

  std::vector<CurvePoint> curve;
  for (std::size_t m = 0; m < d; ++m) {
    CurvePoint p;
    p.n_dims = static_cast<int>(m + 1);
    std::tie(p.accuracy_raw, p.accuracy_raw_std) = mean_std(raw[m]);
    std::tie(p.accuracy_normalised, p.accuracy_normalised_std) = mean_std(norm[m]);
    p.dims_used.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m + 1));
    curve.push_back(std::move(p));
  }
  return curve;
}

}  // namespace lel
