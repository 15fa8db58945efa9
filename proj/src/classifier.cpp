#include "lel/classifier.hpp"

#include "lel/error.hpp"
#include "lel/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace lel {

std::string_view to_string(ThresholdMethod m) {
  switch (m) {
    case ThresholdMethod::largest_gap: return "largest-gap";
    case ThresholdMethod::otsu: return "otsu";
    case ThresholdMethod::fixed: return "fixed";
  }
  return "unknown";
}

ThresholdMethod parse_threshold_method(std::string_view name) {
  for (auto m : {ThresholdMethod::largest_gap, ThresholdMethod::otsu, ThresholdMethod::fixed}) {
    if (to_string(m) == name) return m;
  }
  throw ParameterError("unknown threshold method '" + std::string(name) +
                       "' (expected largest-gap, otsu or fixed)");
}

Threshold select_threshold(std::span<const double> entropies, ThresholdMethod method,
                           double fixed_value) {
  if (entropies.size() < 2) throw ParameterError("threshold selection needs at least 2 dimensions");
  if (!std::all_of(entropies.begin(), entropies.end(), [](double h) { return std::isfinite(h); })) {
    throw DataError("threshold selection: non-finite entropy");
  }
  std::vector<double> desc(entropies.begin(), entropies.end());
  std::sort(desc.begin(), desc.end(), std::greater<>());

  Threshold t;
  const double range = desc.front() - desc.back();
  std::size_t gap_at = 0;
  double gap = -1.0;
  for (std::size_t i = 0; i + 1 < desc.size(); ++i) {
    if (desc[i] - desc[i + 1] > gap) {
      gap = desc[i] - desc[i + 1];
      gap_at = i;
    }
  }
  if (!(range > 0.0)) {
    t.tau = method == ThresholdMethod::fixed ? fixed_value : desc.front();
    t.separation_score = 0.0;
    t.no_regime = true;
    return t;
  }
  t.separation_score = gap / range;

  switch (method) {
    case ThresholdMethod::largest_gap:
      t.tau = 0.5 * (desc[gap_at] + desc[gap_at + 1]);
      break;
    case ThresholdMethod::fixed:
      t.tau = fixed_value;
      break;
    case ThresholdMethod::otsu: {
      // Split of the sorted values minimising the summed within-class
      // squared deviation.
      const std::size_t d = desc.size();
      double best = std::numeric_limits<double>::infinity();
      std::size_t best_split = 1;
      for (std::size_t s = 1; s < d; ++s) {
        auto ssd = [&](std::size_t b, std::size_t e) {
          double m = 0.0;
          for (std::size_t i = b; i < e; ++i) m += desc[i];
          m /= static_cast<double>(e - b);
          double acc = 0.0;
          for (std::size_t i = b; i < e; ++i) acc += (desc[i] - m) * (desc[i] - m);
          return acc;
        };
        const double within = ssd(0, s) + ssd(s, d);
        if (within < best) {
          best = within;
          best_split = s;
        }
      }
      t.tau = 0.5 * (desc[best_split - 1] + desc[best_split]);
      break;
    }
  }
  return t;
}

std::vector<Label> entropy_classify(std::span<const double> entropies, double tau) {
  std::vector<Label> out;
  out.reserve(entropies.size());
  for (double h : entropies) out.push_back(h > tau ? Label::active : Label::passive);
  return out;
}

std::vector<Label> bonheme_classify(const LatentDump& dump, const BonhemeThresholds& t) {
  const auto d = static_cast<std::size_t>(dump.d());
  if (!dump.sigma_sq) return std::vector<Label>(d, Label::unclassified);

  const auto& s2 = *dump.sigma_sq;
  const double n = static_cast<double>(dump.n());
  std::vector<Label> out(d, Label::unclassified);
  for (Eigen::Index j = 0; j < dump.d(); ++j) {
    const Eigen::ArrayXd sigma = s2.col(j).array().sqrt();
    const double mean_sigma = sigma.mean();
    const double var_sigma = (sigma - mean_sigma).square().sum() / n;
    const auto mu = dump.mu.col(j).array();
    const double mean_mu = mu.mean();
    const double var_mu = (mu - mean_mu).square().sum() / n;

    auto& label = out[static_cast<std::size_t>(j)];
    if (mean_sigma < t.t_act) {
      label = Label::active;
    } else if (std::abs(mean_sigma - 1.0) < t.t_pas && var_sigma < t.t_var &&
               std::abs(mean_mu) < t.t_mu && var_mu < t.t_var) {
      label = Label::passive;
    } else {
      const double low = (s2.col(j).array() < t.mixed_cut).cast<double>().sum() / n;
      const double high = 1.0 - low;
      if (low >= t.mixed_min_mass && high >= t.mixed_min_mass) label = Label::mixed;
    }
  }
  return out;
}

double kl_passive_fraction(const LatentDump& dump, Eigen::Index column, double epsilon) {
  if (!dump.sigma_sq) throw ParameterError("kl criterion needs sigma_sq");
  std::size_t below = 0;
  for (Eigen::Index i = 0; i < dump.n(); ++i) {
    if (gaussian_kl(dump.mu(i, column), (*dump.sigma_sq)(i, column)) < epsilon) ++below;
  }
  return static_cast<double>(below) / static_cast<double>(dump.n());
}

std::vector<Label> kl_classify(const LatentDump& dump, const KlCriterion& c) {
  const auto d = static_cast<std::size_t>(dump.d());
  if (!dump.sigma_sq) return std::vector<Label>(d, Label::unclassified);
  if (!(c.epsilon > 0.0) || !(c.delta > 0.0 && c.delta <= 1.0)) {
    throw ParameterError("kl criterion needs epsilon > 0 and delta in (0, 1]");
  }
  std::vector<Label> out(d);
  for (Eigen::Index j = 0; j < dump.d(); ++j) {
    out[static_cast<std::size_t>(j)] =
        kl_passive_fraction(dump, j, c.epsilon) >= c.delta ? Label::passive : Label::active;
  }
  return out;
}

double bernoulli_entropy(double p) {
  auto term = [](double x) { return x > 0.0 ? -x * std::log(x) : 0.0; };
  return term(p) + term(1.0 - p);
}

double mixed_score(std::span<const double> sigma_sq_column, double cut) {
  if (sigma_sq_column.empty()) return 0.0;
  const auto high = std::count_if(sigma_sq_column.begin(), sigma_sq_column.end(),
                                  [&](double v) { return v >= cut; });
  return bernoulli_entropy(static_cast<double>(high) / static_cast<double>(sigma_sq_column.size()));
}

std::vector<CriteriaAgreement> compare_criteria(
    const std::map<std::string, std::vector<Label>>& labels) {
  std::vector<CriteriaAgreement> out;
  for (auto a = labels.begin(); a != labels.end(); ++a) {
    for (auto b = std::next(a); b != labels.end(); ++b) {
      if (a->second.size() != b->second.size()) {
        throw ConsistencyError("criteria '" + a->first + "' and '" + b->first +
                               "' label different dimension counts");
      }
      CriteriaAgreement r;
      r.first = a->first;
      r.second = b->first;
      std::size_t same = 0;
      for (std::size_t i = 0; i < a->second.size(); ++i) {
        const Label la = a->second[i];
        const Label lb = b->second[i];
        ++r.confusion[static_cast<std::size_t>(la)][static_cast<std::size_t>(lb)];
        if (la == Label::unclassified || lb == Label::unclassified) continue;
        ++r.compared;
        if (la == lb) ++same;
      }
      r.agreement = r.compared == 0 ? 1.0 : static_cast<double>(same) / static_cast<double>(r.compared);
      out.push_back(r);
    }
  }
  return out;
}

Classification classify(const LatentDump& dump, std::span<const double> entropies,
                        const ClassifierConfig& config) {
  if (static_cast<Eigen::Index>(entropies.size()) != dump.d()) {
    throw ConsistencyError("classify: one entropy per dimension required");
  }
  Classification c;
  Threshold threshold;
  if (entropies.size() < 2) {
    // A single dimension has nothing to separate from.
    threshold.tau = config.tau_method == ThresholdMethod::fixed ? config.tau_fixed : entropies.front();
    threshold.no_regime = true;
  } else {
    threshold = select_threshold(entropies, config.tau_method, config.tau_fixed);
  }
  c.tau_used = threshold.tau;
  c.separation_score = threshold.separation_score;
  c.no_regime = threshold.no_regime;
  c.entropy_score.assign(entropies.begin(), entropies.end());
  c.entropy_label = entropy_classify(entropies, c.tau_used);
  c.bonheme_label = bonheme_classify(dump, config.bonheme);
  c.kl_label = kl_classify(dump, config.kl);

  if (dump.sigma_sq) {
    for (Eigen::Index j = 0; j < dump.d(); ++j) {
      c.kl_passive_fraction.push_back(kl_passive_fraction(dump, j, config.kl.epsilon));
      const Eigen::VectorXd col = dump.sigma_sq->col(j);
      c.mixed_score.push_back(mixed_score({col.data(), static_cast<std::size_t>(col.size())},
                                          config.bonheme.mixed_cut));
    }
  } else {
    c.notes.emplace_back(
        "deterministic dump (no sigma_sq): bonheme and kl criteria report unclassified");
  }
  if (c.no_regime) c.notes.emplace_back("all entropies equal: no polarised regime detected");
  c.notes.emplace_back(
      "tau, Bonheme thresholds and KL epsilon/delta are engineering defaults, not calibrated values");
  return c;
}

}  // namespace lel
