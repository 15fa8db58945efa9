#pragma once

#include "lel/classifier.hpp"
#include "lel/downstream.hpp"
#include "lel/model.hpp"
#include "lel/statistics.hpp"
#include "lel/synthetic.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace lel::cli {

struct AnalysisResult {
  std::vector<Estimator> estimators;
  EstimatorConfig estimator_config;
  ClassifierConfig classifier_config;
  std::vector<DimensionStats> stats;
  std::vector<BoundCheck> bounds;
  Classification classification;
  std::vector<CriteriaAgreement> agreement;
};

nlohmann::json analysis_report(const LatentDump& dump, const AnalysisResult& result);

// Rows sorted by descending reference entropy.
void write_marginal_entropies(const AnalysisResult& result, const std::filesystem::path& file);

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& file);
void write_oracle_csv(const std::vector<double>& pis, const std::vector<double>& oracle,
                      const std::filesystem::path& file);

nlohmann::json curve_report(const std::vector<CurvePoint>& curve, const RegressionConfig& config,
                            int repeats, const std::string& estimator);
void write_curve_csv(const std::vector<CurvePoint>& curve, const std::filesystem::path& file);

// dim,label,oracle_entropy; an empty oracle cell means no closed form.
struct TruthRow {
  int dim = 0;
  std::string label;
  std::optional<double> oracle_entropy;
};
void write_ground_truth(const std::vector<TruthRow>& rows, const std::filesystem::path& file);

void write_json(const nlohmann::json& j, const std::filesystem::path& file);

}  // namespace lel::cli
