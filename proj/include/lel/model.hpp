#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lel {

// Provenance carried alongside a dump. Mirrors meta.json.
struct DumpMeta {
  std::string source = "unknown";
  std::optional<std::uint64_t> seed;
  nlohmann::json hyper_params = nlohmann::json::object();
};

// Mean (and optionally variance) representations of an encoder over N
// datapoints with d latent dimensions. Rows are datapoints, columns are
// dimensions. Treat as immutable once loaded.
struct LatentDump {
  Eigen::MatrixXd mu;
  std::optional<Eigen::MatrixXd> sigma_sq;
  std::optional<std::vector<int>> labels;
  DumpMeta meta;

  Eigen::Index n() const { return mu.rows(); }
  Eigen::Index d() const { return mu.cols(); }
  bool has_sigma() const { return sigma_sq.has_value(); }
};

enum class Estimator { histogram, knn, gmm_mc, renyi };

std::string_view to_string(Estimator e);
// Accepts "histogram", "knn", "gmm_mc", "renyi"; throws ParameterError.
Estimator parse_estimator(std::string_view name);
// Comma-separated list, order preserved, duplicates rejected.
std::vector<Estimator> parse_estimator_list(std::string_view names);

enum class BinRule { freedman_diaconis, sturges, scott };

std::string_view to_string(BinRule r);
BinRule parse_bin_rule(std::string_view name);

// Bandwidth for the Gaussian kernel of a Gram matrix.
struct BandwidthRule {
  enum class Kind { median, silverman, fixed };
  Kind kind = Kind::median;
  double value = 1.0;  // only read for Kind::fixed

  static BandwidthRule median() { return {Kind::median, 1.0}; }
  static BandwidthRule silverman() { return {Kind::silverman, 1.0}; }
  static BandwidthRule fixed(double sigma) { return {Kind::fixed, sigma}; }
};

std::string_view to_string(BandwidthRule::Kind k);
BandwidthRule::Kind parse_bandwidth_kind(std::string_view name);

struct EstimatorConfig {
  Estimator estimator = Estimator::knn;
  BinRule bin_rule = BinRule::freedman_diaconis;
  int knn_k = 10;
  int gmm_max_components = 5;
  int gmm_max_iterations = 100;
  double gmm_tolerance = 1e-6;
  int gmm_mc_samples = 20000;
  double renyi_alpha = 1.01;
  BandwidthRule bandwidth = BandwidthRule::median();
  int gram_sample_cap = 2000;
  std::uint64_t seed = 0;
};

// Throws ParameterError when a field is out of range. Sample-size dependent
// preconditions (k < N and friends) are checked by the estimators themselves.
void validate(const EstimatorConfig& config);

nlohmann::json to_json(const EstimatorConfig& config);

// Sentinel entropy, in nats, reported for zero-spread inputs.
inline constexpr double kDegenerateEntropy = -50.0;

struct KlSummary {
  double mean = 0.0;
  // min, q05, median, q95, max of the pointwise KL over datapoints.
  std::array<double, 5> quantiles{};
};

// Per-dimension summary of a dump.
struct DimensionStats {
  double mean_mu = 0.0;
  double var_mu = 0.0;
  double second_moment_mu = 0.0;
  std::map<std::string, double> entropy;  // estimator name -> nats
  std::vector<std::string> degenerate_estimators;
  double entropy_power = 0.0;
  std::optional<double> mean_sigma_sq;
  std::optional<double> var_sigma_sq;
  std::optional<KlSummary> kl;
  std::optional<double> mixed_score;
};

enum class Label { active, passive, mixed, unclassified };

std::string_view to_string(Label l);
Label parse_label(std::string_view name);

struct Classification {
  std::vector<Label> entropy_label;
  std::vector<Label> bonheme_label;
  std::vector<Label> kl_label;
  double tau_used = 0.0;
  double separation_score = 0.0;
  bool no_regime = false;
  // Per-dimension diagnostics behind the labels.
  std::vector<double> entropy_score;
  std::vector<double> kl_passive_fraction;
  std::vector<double> mixed_score;
  std::vector<std::string> notes;
};

}  // namespace lel
