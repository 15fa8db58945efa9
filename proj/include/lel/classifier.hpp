#pragma once

#include "lel/model.hpp"

#include <Eigen/Dense>

#include <map>
#include <span>
#include <string>
#include <vector>

namespace lel {

enum class ThresholdMethod { largest_gap, otsu, fixed };

std::string_view to_string(ThresholdMethod m);
ThresholdMethod parse_threshold_method(std::string_view name);

struct Threshold {
  double tau = 0.0;
  // Largest consecutive gap between sorted entropies over their range; 0 when
  // every entropy is equal.
  double separation_score = 0.0;
  bool no_regime = false;
};

// fixed_value is only read for ThresholdMethod::fixed. Needs d >= 2.
Threshold select_threshold(std::span<const double> entropies, ThresholdMethod method,
                           double fixed_value = 0.0);

// active iff h > tau; a dimension sitting exactly on tau is passive.
std::vector<Label> entropy_classify(std::span<const double> entropies, double tau);

struct BonhemeThresholds {
  double t_act = 0.5;   // mean sigma below this: active
  double t_pas = 0.1;   // |mean sigma - 1| below this: passive candidate
  double t_var = 0.01;  // Var(sigma), Var(mu) ceilings for passive
  double t_mu = 0.1;    // |mean mu| ceiling for passive
  double mixed_cut = 0.5;
  double mixed_min_mass = 0.1;
};

// All unclassified when the dump has no sigma_sq.
std::vector<Label> bonheme_classify(const LatentDump& dump, const BonhemeThresholds& t = {});

struct KlCriterion {
  double epsilon = 0.01;
  double delta = 0.95;
};

// Fraction of datapoints whose pointwise KL on column j is below epsilon.
double kl_passive_fraction(const LatentDump& dump, Eigen::Index column, double epsilon);

// passive iff the fraction of datapoints with KL < epsilon is >= delta.
// Unclassified everywhere without sigma_sq.
std::vector<Label> kl_classify(const LatentDump& dump, const KlCriterion& c = {});

// Bernoulli entropy (nats) of sigma_sq binarised at cut; in [0, ln 2].
double mixed_score(std::span<const double> sigma_sq_column, double cut = 0.5);
double bernoulli_entropy(double p);

struct CriteriaAgreement {
  std::string first;
  std::string second;
  std::size_t compared = 0;  // dims where neither label is unclassified
  double agreement = 0.0;    // 1.0 when compared == 0
  // confusion[a][b]: dims labelled a by `first` and b by `second`, indexed by
  // Label, unclassified rows included for inspection.
  std::array<std::array<std::size_t, 4>, 4> confusion{};
};

std::vector<CriteriaAgreement> compare_criteria(
    const std::map<std::string, std::vector<Label>>& labels);

struct ClassifierConfig {
  ThresholdMethod tau_method = ThresholdMethod::largest_gap;
  double tau_fixed = 0.0;
  BonhemeThresholds bonheme;
  KlCriterion kl;
};

// Runs every applicable criterion on a dump, given per-dimension entropies
// from the reference estimator.
Classification classify(const LatentDump& dump, std::span<const double> entropies,
                        const ClassifierConfig& config = {});

}  // namespace lel
