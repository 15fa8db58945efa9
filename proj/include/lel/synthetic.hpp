#pragma once

#include "lel/model.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

namespace lel {

// z ~ (1 - pi) N(0, epsilon^2) + pi N(0, sigma^2), sigma^2 chosen so that
// Var(z) = target_var.
struct SpikeSlabSpec {
  double pi = 0.5;
  double epsilon = 0.05;
  double target_var = 1.0;
  int n = 100000;
  std::uint64_t seed = 0;
};

void validate(const SpikeSlabSpec& spec);

// (V - (1 - pi) eps^2) / pi
double slab_variance(const SpikeSlabSpec& spec);

struct SpikeSlabSample {
  Eigen::VectorXd values;
  double slab_variance = 0.0;
};

SpikeSlabSample spike_slab_sample(const SpikeSlabSpec& spec);

// Density of the two-component zero-mean mixture.
double spike_slab_density(double z, double pi, double spike_var, double slab_var);

// Differential entropy -int p log p of the mixture by adaptive Gauss-Kronrod
// quadrature over [-10 sqrt(V), 10 sqrt(V)].
double spike_slab_entropy(const SpikeSlabSpec& spec, double tolerance = 1e-8);

struct SweepRow {
  double pi = 0.0;
  Estimator estimator = Estimator::knn;
  double entropy = 0.0;
  double oracle_entropy = 0.0;
  double sample_variance = 0.0;
};

// One sample per pi (seeded from base.seed and the grid index); every
// estimator runs on that same sample.
std::vector<SweepRow> spike_slab_sweep(std::span<const double> pi_grid, const SpikeSlabSpec& base,
                                       std::span<const Estimator> estimators,
                                       const EstimatorConfig& config);

// Planted polarised regime, following the prototype histograms: active dims
// have spread means and sigma^2 near 0.01, passive dims have means near 0 and
// sigma^2 near 1, mixed dims switch between the two per datapoint.
struct PlantedSpec {
  int n_active = 8;
  int n_passive = 24;
  int n_mixed = 0;
  int n = 5000;
  double active_scale = 2.0;
  double mixed_p = 0.5;  // probability of the passive state on a mixed dim
  bool with_labels = true;
  double label_noise = 0.05;
  bool shuffle_layout = true;
  std::uint64_t seed = 0;
};

void validate(const PlantedSpec& spec);

struct PlantedDump {
  LatentDump dump;
  std::vector<Label> ground_truth;
};

PlantedDump planted_regime_dump(const PlantedSpec& spec);

// Differential entropy of the mean distribution of a planted dimension of
// the given kind (closed form for active/passive, quadrature for mixed).
double planted_mean_entropy(const PlantedSpec& spec, Label kind);

}  // namespace lel
