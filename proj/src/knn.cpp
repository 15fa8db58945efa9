#include "lel/error.hpp"
#include "lel/estimators.hpp"
#include "lel/rng.hpp"

#include <boost/math/special_functions/digamma.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace lel {

EntropyEstimate knn_entropy(std::span<const double> samples, int k, std::uint64_t seed) {
  const std::size_t n = samples.size();
  if (n < 20) throw ParameterError("knn entropy needs at least 20 samples");
  if (k < 1 || static_cast<std::size_t>(k) >= n) {
    throw ParameterError("knn entropy needs 1 <= k < N (k = " + std::to_string(k) + ")");
  }
  std::vector<double> x(samples.begin(), samples.end());
  if (!std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); })) {
    throw DataError("knn entropy: non-finite sample");
  }
  std::sort(x.begin(), x.end());

  double scale = 0.0;
  for (double v : x) scale = std::max(scale, std::abs(v));
  const double jitter = 1e-12 * scale;
  if (std::adjacent_find(x.begin(), x.end()) != x.end() && jitter > 0.0) {
    auto rng = make_rng(seed, 0x6b6e6e);
    std::uniform_real_distribution<double> u(-jitter, jitter);
    for (double& v : x) v += u(rng);
    std::sort(x.begin(), x.end());
  }

  // k-th neighbour distance by expanding a window around each sorted point.
  // Distances at the jitter scale are indistinguishable from exact ties.
  const double zero_level = 1e3 * jitter;
  double sum_log = 0.0;
  std::size_t zeros = 0;
  const auto last = static_cast<std::ptrdiff_t>(n) - 1;
  for (std::ptrdiff_t i = 0; i <= last; ++i) {
    std::ptrdiff_t left = i - 1;
    std::ptrdiff_t right = i + 1;
    double eps = 0.0;
    for (int step = 0; step < k; ++step) {
      const double dl = left >= 0 ? x[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(left)]
                                  : std::numeric_limits<double>::infinity();
      const double dr = right <= last
                            ? x[static_cast<std::size_t>(right)] - x[static_cast<std::size_t>(i)]
                            : std::numeric_limits<double>::infinity();
      if (dl <= dr) {
        eps = dl;
        --left;
      } else {
        eps = dr;
        ++right;
      }
    }
    if (eps <= zero_level) ++zeros;
    sum_log += std::log(std::max(eps, std::max(jitter, std::numeric_limits<double>::min())));
  }

  EntropyEstimate out;
  out.estimator = Estimator::knn;
  out.config.estimator = Estimator::knn;
  out.config.knn_k = k;
  out.config.seed = seed;
  if (2 * zeros > n) {
    out.degenerate = true;
    out.value = kDegenerateEntropy;
    return out;
  }
  using boost::math::digamma;
  const double nd = static_cast<double>(n);
  // Unit ball in one dimension has volume 2.
  out.value = digamma(nd) - digamma(static_cast<double>(k)) + std::log(2.0) + sum_log / nd;
  return out;
}

}  // namespace lel
