#include "lel/model.hpp"

#include "lel/error.hpp"

#include <algorithm>
#include <string>

namespace lel {

std::string_view to_string(Estimator e) {
  switch (e) {
    case Estimator::histogram: return "histogram";
    case Estimator::knn: return "knn";
    case Estimator::gmm_mc: return "gmm_mc";
    case Estimator::renyi: return "renyi";
  }
  return "unknown";
}

Estimator parse_estimator(std::string_view name) {
  for (auto e : {Estimator::histogram, Estimator::knn, Estimator::gmm_mc, Estimator::renyi}) {
    if (to_string(e) == name) return e;
  }
  throw ParameterError("unknown estimator '" + std::string(name) +
                       "' (expected histogram, knn, gmm_mc or renyi)");
}

std::vector<Estimator> parse_estimator_list(std::string_view names) {
  std::vector<Estimator> out;
  std::size_t start = 0;
  while (start <= names.size()) {
    const auto end = std::min(names.find(',', start), names.size());
    const auto item = names.substr(start, end - start);
    if (item.empty()) throw ParameterError("empty estimator name in list");
    const auto e = parse_estimator(item);
    if (std::find(out.begin(), out.end(), e) != out.end()) {
      throw ParameterError("estimator '" + std::string(item) + "' listed twice");
    }
    out.push_back(e);
    start = end + 1;
  }
  return out;
}

std::string_view to_string(BinRule r) {
  switch (r) {
    case BinRule::freedman_diaconis: return "fd";
    case BinRule::sturges: return "sturges";
    case BinRule::scott: return "scott";
  }
  return "unknown";
}

BinRule parse_bin_rule(std::string_view name) {
  for (auto r : {BinRule::freedman_diaconis, BinRule::sturges, BinRule::scott}) {
    if (to_string(r) == name) return r;
  }
  throw ParameterError("unknown bin rule '" + std::string(name) + "' (expected fd, sturges or scott)");
}

std::string_view to_string(BandwidthRule::Kind k) {
  switch (k) {
    case BandwidthRule::Kind::median: return "median";
    case BandwidthRule::Kind::silverman: return "silverman";
    case BandwidthRule::Kind::fixed: return "fixed";
  }
  return "unknown";
}

BandwidthRule::Kind parse_bandwidth_kind(std::string_view name) {
  for (auto k : {BandwidthRule::Kind::median, BandwidthRule::Kind::silverman,
                 BandwidthRule::Kind::fixed}) {
    if (to_string(k) == name) return k;
  }
  throw ParameterError("unknown bandwidth rule '" + std::string(name) + "'");
}

void validate(const EstimatorConfig& c) {
  if (!(c.renyi_alpha > 0.0 && c.renyi_alpha <= 2.0) || c.renyi_alpha == 1.0) {
    throw ParameterError("renyi alpha must lie in (0, 2] and differ from 1 (use 1.01 for the Shannon limit)");
  }
  if (c.knn_k < 1) throw ParameterError("knn k must be a positive integer");
  if (c.gmm_max_components < 1) throw ParameterError("gmm max components must be >= 1");
  if (c.gmm_max_iterations < 1) throw ParameterError("gmm iterations must be >= 1");
  if (!(c.gmm_tolerance > 0.0)) throw ParameterError("gmm tolerance must be > 0");
  if (c.gmm_mc_samples < 1) throw ParameterError("gmm Monte Carlo sample count must be >= 1");
  if (c.gram_sample_cap < 2) throw ParameterError("gram sample cap must be >= 2");
  if (c.bandwidth.kind == BandwidthRule::Kind::fixed && !(c.bandwidth.value > 0.0)) {
    throw ParameterError("fixed bandwidth must be > 0");
  }
}

nlohmann::json to_json(const EstimatorConfig& c) {
  nlohmann::json j;
  j["estimator"] = to_string(c.estimator);
  j["bin_rule"] = to_string(c.bin_rule);
  j["knn_k"] = c.knn_k;
  j["gmm_max_components"] = c.gmm_max_components;
  j["gmm_max_iterations"] = c.gmm_max_iterations;
  j["gmm_tolerance"] = c.gmm_tolerance;
  j["gmm_mc_samples"] = c.gmm_mc_samples;
  j["renyi_alpha"] = c.renyi_alpha;
  j["bandwidth_rule"] = to_string(c.bandwidth.kind);
  if (c.bandwidth.kind == BandwidthRule::Kind::fixed) j["bandwidth"] = c.bandwidth.value;
  j["gram_sample_cap"] = c.gram_sample_cap;
  j["seed"] = c.seed;
  return j;
}

std::string_view to_string(Label l) {
  switch (l) {
    case Label::active: return "active";
    case Label::passive: return "passive";
    case Label::mixed: return "mixed";
    case Label::unclassified: return "unclassified";
  }
  return "unknown";
}

Label parse_label(std::string_view name) {
  for (auto l : {Label::active, Label::passive, Label::mixed, Label::unclassified}) {
    if (to_string(l) == name) return l;
  }
  throw FormatError("unknown label '" + std::string(name) + "'");
}

}  // namespace lel
