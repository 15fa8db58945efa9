#include "lel/error.hpp"
#include "lel/estimators.hpp"
#include "lel/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lel {
namespace {

double median_in_place(std::vector<double>& v) {
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  const double upper = *mid;
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), mid);
  return 0.5 * (lower + upper);
}

// Silverman/Scott multivariate factor applied to the mean per-coordinate
// standard deviation.
double silverman_bandwidth(const Eigen::MatrixXd& samples) {
  const auto n = static_cast<double>(samples.rows());
  const auto m = static_cast<double>(samples.cols());
  const Eigen::RowVectorXd mean = samples.colwise().mean();
  const double mean_var = (samples.rowwise() - mean).array().square().colwise().sum().mean() / n;
  const double s = std::sqrt(mean_var);
  return s * std::pow(4.0 / ((m + 2.0) * n), 1.0 / (m + 4.0));
}

}  // namespace

double select_bandwidth(const Eigen::MatrixXd& samples, const BandwidthRule& rule) {
  if (rule.kind == BandwidthRule::Kind::fixed) {
    if (!(rule.value > 0.0)) throw ParameterError("fixed bandwidth must be > 0");
    return rule.value;
  }
  if (rule.kind == BandwidthRule::Kind::silverman) return silverman_bandwidth(samples);

  const Eigen::Index n = samples.rows();
  std::vector<double> dist;
  dist.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      dist.push_back((samples.row(i) - samples.row(j)).norm());
    }
  }
  const double med = dist.empty() ? 0.0 : median_in_place(dist);
  return med > 0.0 ? med : silverman_bandwidth(samples);
}

GramMatrix gram_matrix(const Eigen::MatrixXd& samples, const BandwidthRule& rule) {
  const Eigen::Index n = samples.rows();
  if (n < 2) throw ParameterError("gram_matrix needs at least 2 samples");
  if (samples.cols() < 1) throw ParameterError("gram_matrix needs at least one feature column");
  if (!samples.allFinite()) throw DataError("gram_matrix: non-finite sample");

  GramMatrix g;
  g.bandwidth = select_bandwidth(samples, rule);
  if (!(g.bandwidth > 0.0)) {
    g.degenerate = true;
    g.entries = Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
    return g;
  }

  const double inv_two_s2 = 1.0 / (2.0 * g.bandwidth * g.bandwidth);
  const double inv_n = 1.0 / static_cast<double>(n);
  g.entries.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    g.entries(i, i) = inv_n;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double k = std::exp(-(samples.row(i) - samples.row(j)).squaredNorm() * inv_two_s2) * inv_n;
      g.entries(i, j) = k;
      g.entries(j, i) = k;
    }
  }
  return g;
}

}  // namespace lel
