#include "lel/error.hpp"
#include "lel/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace lel {
namespace {

// Linear interpolation between order statistics of a sorted sample.
double sorted_quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

EntropyEstimate histogram_entropy(std::span<const double> samples, BinRule rule) {
  const std::size_t n = samples.size();
  if (n < 10) throw ParameterError("histogram entropy needs at least 10 samples");
  std::vector<double> sorted(samples.begin(), samples.end());
  if (!std::all_of(sorted.begin(), sorted.end(), [](double v) { return std::isfinite(v); })) {
    throw DataError("histogram entropy: non-finite sample");
  }
  std::sort(sorted.begin(), sorted.end());

  EntropyEstimate out;
  out.estimator = Estimator::histogram;
  out.config.estimator = Estimator::histogram;
  out.config.bin_rule = rule;

  const double lo = sorted.front();
  const double range = sorted.back() - lo;
  const double nd = static_cast<double>(n);

  double width = 0.0;
  switch (rule) {
    case BinRule::freedman_diaconis: {
      const double iqr = sorted_quantile(sorted, 0.75) - sorted_quantile(sorted, 0.25);
      width = 2.0 * iqr * std::cbrt(1.0 / nd);
      break;
    }
    case BinRule::scott: {
      double mean = 0.0;
      for (double v : sorted) mean += v;
      mean /= nd;
      double var = 0.0;
      for (double v : sorted) var += (v - mean) * (v - mean);
      width = 3.49 * std::sqrt(var / nd) * std::cbrt(1.0 / nd);
      break;
    }
    case BinRule::sturges:
      width = range / std::ceil(std::log2(nd) + 1.0);
      break;
  }

  if (!(width > 0.0)) {
    // Zero spread under the rule: a single bin over the whole range.
    out.degenerate = true;
    out.value = range > 0.0 ? std::log(range) : kDegenerateEntropy;
    return out;
  }
  if (!(range > 0.0)) {
    out.degenerate = true;
    out.value = kDegenerateEntropy;
    return out;
  }

  const double max_bins = 10.0 * nd;
  const auto bins = static_cast<std::size_t>(std::clamp(std::ceil(range / width), 1.0, max_bins));
  width = range / static_cast<double>(bins);

  std::vector<std::size_t> counts(bins, 0);
  for (double v : sorted) {
    const auto b = std::min(static_cast<std::size_t>((v - lo) / width), bins - 1);
    ++counts[b];
  }
  // sum_j -p_j log(p_j / w) with equal widths.
  double h = std::log(width);
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / nd;
    h -= p * std::log(p);
  }
  out.value = h;
  return out;
}

}  // namespace lel
