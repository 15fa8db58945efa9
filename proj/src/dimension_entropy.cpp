#include "lel/error.hpp"
#include "lel/estimators.hpp"
#include "lel/parallel.hpp"
#include "lel/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lel {
namespace {

// Sorted row indices of a seeded uniform subsample of at most cap rows.
std::vector<Eigen::Index> subsample_rows(Eigen::Index n, int cap, std::uint64_t seed) {
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
  std::iota(rows.begin(), rows.end(), Eigen::Index{0});
  if (n > cap) {
    auto rng = make_rng(seed, 0x726f7773);
    std::shuffle(rows.begin(), rows.end(), rng);
    rows.resize(static_cast<std::size_t>(cap));
    std::sort(rows.begin(), rows.end());
  }
  return rows;
}

bool constant_column(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

EntropyEstimate renyi_with_bandwidth(const Eigen::VectorXd& column, double bandwidth,
                                     const EstimatorConfig& config) {
  EntropyEstimate e;
  if (!(bandwidth > 0.0) || constant_column({column.data(), static_cast<std::size_t>(column.size())})) {
    e.value = 0.0;
    e.degenerate = true;
  } else {
    const auto gram = gram_matrix(column, BandwidthRule::fixed(bandwidth));
    e = renyi_entropy(gram, config.renyi_alpha);
  }
  e.estimator = Estimator::renyi;
  e.config = config;
  e.config.estimator = Estimator::renyi;
  return e;
}

// Bandwidth from pairwise 1-D distances pooled over every column. The pool
// is built from evenly strided rows of the subsample, sized so that roughly
// kPoolPairs distances are kept in total.
double pooled_bandwidth(const Eigen::MatrixXd& sub, const BandwidthRule& rule) {
  if (rule.kind == BandwidthRule::Kind::fixed) return select_bandwidth(sub.col(0), rule);
  const Eigen::Index n = sub.rows();
  const Eigen::Index d = sub.cols();

  auto silverman = [&] {
    double var_sum = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      const double mean = sub.col(j).mean();
      var_sum += (sub.col(j).array() - mean).square().mean();
    }
    const double s = std::sqrt(var_sum / static_cast<double>(d));
    return s * std::pow(4.0 / (3.0 * static_cast<double>(n)), 0.2);
  };
  if (rule.kind == BandwidthRule::Kind::silverman) return silverman();

  constexpr double kPoolPairs = 2e6;
  const auto rows = std::clamp<Eigen::Index>(
      static_cast<Eigen::Index>(std::sqrt(2.0 * kPoolPairs / static_cast<double>(d))), 2, n);
  std::vector<Eigen::Index> picked(static_cast<std::size_t>(rows));
  for (Eigen::Index r = 0; r < rows; ++r) picked[static_cast<std::size_t>(r)] = r * n / rows;
  std::vector<double> dist;
  dist.reserve(static_cast<std::size_t>(d * rows * (rows - 1) / 2));
  for (Eigen::Index j = 0; j < d; ++j) {
    for (std::size_t a = 0; a < picked.size(); ++a) {
      for (std::size_t b = a + 1; b < picked.size(); ++b) {
        dist.push_back(std::abs(sub(picked[a], j) - sub(picked[b], j)));
      }
    }
  }
  const auto mid = dist.begin() + static_cast<std::ptrdiff_t>(dist.size() / 2);
  std::nth_element(dist.begin(), mid, dist.end());
  const double med = *mid;
  return med > 0.0 ? med : silverman();
}

}  // namespace

EntropyEstimate estimate_entropy(std::span<const double> samples, const EstimatorConfig& config) {
  validate(config);
  switch (config.estimator) {
    case Estimator::histogram:
      return histogram_entropy(samples, config.bin_rule);
    case Estimator::knn:
      return knn_entropy(samples, config.knn_k, config.seed);
    case Estimator::gmm_mc:
      return gmm_mc_entropy(samples, config);
    case Estimator::renyi: {
      const auto rows = subsample_rows(static_cast<Eigen::Index>(samples.size()),
                                       config.gram_sample_cap, config.seed);
      Eigen::VectorXd column(static_cast<Eigen::Index>(rows.size()));
      for (std::size_t i = 0; i < rows.size(); ++i) {
        column(static_cast<Eigen::Index>(i)) = samples[static_cast<std::size_t>(rows[i])];
      }
      if (column.size() < 2) throw ParameterError("renyi entropy needs at least 2 samples");
      if (!column.allFinite()) throw DataError("renyi entropy: non-finite sample");
      return renyi_with_bandwidth(column, select_bandwidth(column, config.bandwidth), config);
    }
  }
  throw ParameterError("unknown estimator");
}

std::vector<EntropyEstimate> dimension_entropies(const Eigen::MatrixXd& mu,
                                                 const EstimatorConfig& config) {
  validate(config);
  const auto d = static_cast<std::size_t>(mu.cols());
  std::vector<EntropyEstimate> out(d);

  if (config.estimator == Estimator::renyi) {
    if (mu.rows() < 2) throw ParameterError("renyi entropy needs at least 2 samples");
    if (!mu.allFinite()) throw DataError("renyi entropy: non-finite sample");
    const auto rows = subsample_rows(mu.rows(), config.gram_sample_cap, config.seed);
    const Eigen::MatrixXd sub = mu(rows, Eigen::all);
    const double bandwidth = pooled_bandwidth(sub, config.bandwidth);
    parallel_for(d, [&](std::size_t j) {
      out[j] = renyi_with_bandwidth(sub.col(static_cast<Eigen::Index>(j)), bandwidth, config);
    });
    return out;
  }

  parallel_for(d, [&](std::size_t j) {
    auto per_dim = config;
    per_dim.seed = mix_seed(config.seed, j);
    const Eigen::VectorXd column = mu.col(static_cast<Eigen::Index>(j));
    out[j] = estimate_entropy({column.data(), static_cast<std::size_t>(column.size())}, per_dim);
  });
  return out;
}

}  // namespace lel
