#include "lel/dump_io.hpp"
#include "lel/error.hpp"
#include "lel/estimators.hpp"
#include "lel/synthetic.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace lel;
using namespace lel::test;

namespace {

double population_variance(const Eigen::VectorXd& v) {
  return (v.array() - v.mean()).square().mean();
}

// Standard error of the sample variance of the mixture: sqrt((mu4 - V^2) / n)
// with mu4 = 3 ((1 - pi) eps^4 + pi sigma^4).
double variance_standard_error(const SpikeSlabSpec& s) {
  const double slab = slab_variance(s);
  const double mu4 = 3.0 * ((1.0 - s.pi) * std::pow(s.epsilon, 4) + s.pi * slab * slab);
  return std::sqrt((mu4 - s.target_var * s.target_var) / s.n);
}

}  // namespace

TEST_CASE("slab variance: examples") {
  SpikeSlabSpec s;
  s.pi = 0.5;
  // (1 - 0.5 * 0.05^2) / 0.5
  CHECK(slab_variance(s) == doctest::Approx(1.9975).epsilon(1e-12));
  s.pi = 1.0;
  CHECK(slab_variance(s) == 1.0);
}

TEST_CASE("spike-slab: pi = 1 is a pure standard normal") {
  SpikeSlabSpec s;
  s.pi = 1.0;
  s.n = 20000;
  s.seed = 4;
  const auto sample = spike_slab_sample(s);
  CHECK(sample.slab_variance == 1.0);
  CHECK(std::abs(population_variance(sample.values) - 1.0) <= 4.0 * std::sqrt(2.0 / s.n));
  CHECK(spike_slab_entropy(s) == doctest::Approx(gaussian_entropy(1.0)).epsilon(1e-8));
  CHECK(std::abs(knn_entropy(as_span(sample.values), 10).value - gaussian_entropy(1.0)) <= 0.1);
}

TEST_CASE("spike-slab: sample variance within 3 standard errors of V for every pi") {
  for (int k = 1; k <= 9; ++k) {
    SpikeSlabSpec s;
    s.pi = k / 10.0;
    s.n = 100000;
    s.seed = 100 + static_cast<std::uint64_t>(k);
    const auto sample = spike_slab_sample(s);
    CAPTURE(s.pi);
    CHECK(std::abs(population_variance(sample.values) - 1.0) <= 3.0 * variance_standard_error(s));
  }
}

TEST_CASE("spike-slab: invalid specs") {
  SpikeSlabSpec s;
  s.pi = 0.0;
  CHECK_THROWS_AS(validate(s), ParameterError);
  s.pi = 0.5;
  s.epsilon = 0.0;
  CHECK_THROWS_AS(validate(s), ParameterError);
  s.epsilon = 2.0;
  s.target_var = 1.0;  // (1 - pi) eps^2 = 2 > V
  CHECK_THROWS_AS(spike_slab_sample(s), ParameterError);
  s.epsilon = 0.05;
  s.n = 1;
  CHECK_THROWS_AS(validate(s), ParameterError);
}

TEST_CASE("spike-slab oracle: limits and monotonicity") {
  SpikeSlabSpec s;
  double previous = -1e9;
  for (int k = 1; k <= 10; ++k) {
    s.pi = k / 10.0;
    const double h = spike_slab_entropy(s);
    CHECK(h > previous);
    previous = h;
  }
  // Pure spike limit as pi -> 0.
  s.pi = 1e-6;
  s.target_var = 0.0025 + 1e-6;
  CHECK(spike_slab_entropy(s) == doctest::Approx(gaussian_entropy(0.0025)).epsilon(1e-3));
}

TEST_CASE("spike-slab sweep: shape and monotonicity for every estimator") {
  const std::vector<double> grid{0.1, 0.9};
  SpikeSlabSpec base;
  base.n = 20000;
  base.seed = 5;
  const std::vector<Estimator> est{Estimator::histogram, Estimator::knn, Estimator::gmm_mc,
                                   Estimator::renyi};
  EstimatorConfig cfg;
  cfg.bandwidth = BandwidthRule::silverman();
  cfg.gram_sample_cap = 800;
  const auto rows = spike_slab_sweep(grid, base, est, cfg);
  REQUIRE(rows.size() == 8);
  for (std::size_t e = 0; e < est.size(); ++e) {
    CAPTURE(to_string(est[e]));
    CHECK(rows[e].pi == 0.1);
    CHECK(rows[4 + e].pi == 0.9);
    CHECK(rows[4 + e].entropy > rows[e].entropy);
    CHECK(rows[e].oracle_entropy == spike_slab_entropy({0.1, 0.05, 1.0, 2, 0}));
  }
  const std::vector<double> bad{0.5, 1.5};
  CHECK_THROWS_AS(spike_slab_sweep(bad, base, est, cfg), ParameterError);
}

TEST_CASE("planted: layout, validity and entropy gap") {
  PlantedSpec spec;
  spec.seed = 6;
  const auto p = planted_regime_dump(spec);
  CHECK(validate(p.dump).empty());
  CHECK(p.dump.d() == 32);
  CHECK(p.dump.n() == 5000);
  CHECK(std::count(p.ground_truth.begin(), p.ground_truth.end(), Label::active) == 8);
  CHECK(std::count(p.ground_truth.begin(), p.ground_truth.end(), Label::passive) == 24);
  REQUIRE(p.dump.labels.has_value());
  CHECK(p.dump.labels->size() == 5000);

  const auto est = dimension_entropies(p.dump.mu, {});
  double min_active = 1e9;
  double max_passive = -1e9;
  for (std::size_t j = 0; j < p.ground_truth.size(); ++j) {
    const auto& col = p.dump.sigma_sq->col(static_cast<Eigen::Index>(j));
    if (p.ground_truth[j] == Label::active) {
      min_active = std::min(min_active, est[j].value);
      CHECK(col.mean() == doctest::Approx(0.01).epsilon(0.02));
    } else {
      max_passive = std::max(max_passive, est[j].value);
      CHECK(population_variance(col) < 0.01);
      CHECK(col.mean() == doctest::Approx(1.0).epsilon(0.02));
    }
  }
  CHECK(min_active - max_passive > 2.0);
}

TEST_CASE("planted: mixed dims switch state per datapoint") {
  PlantedSpec spec;
  spec.n_mixed = 4;
  spec.seed = 7;
  const auto p = planted_regime_dump(spec);
  for (std::size_t j = 0; j < p.ground_truth.size(); ++j) {
    if (p.ground_truth[j] != Label::mixed) continue;
    const auto col = p.dump.sigma_sq->col(static_cast<Eigen::Index>(j));
    const double high = (col.array() >= 0.5).cast<double>().mean();
    CHECK(high == doctest::Approx(0.5).epsilon(0.06));
  }
}

TEST_CASE("planted: all passive is the collapse analogue") {
  PlantedSpec collapsed;
  collapsed.n_active = 0;
  collapsed.n_passive = 10;
  collapsed.seed = 8;
  PlantedSpec healthy;
  healthy.seed = 8;
  const auto a = dimension_entropies(planted_regime_dump(collapsed).dump.mu, {});
  const auto b = dimension_entropies(planted_regime_dump(healthy).dump.mu, {});
  std::vector<double> hb;
  for (const auto& e : b) hb.push_back(e.value);
  std::sort(hb.begin(), hb.end(), std::greater<>());
  const double tau = 0.5 * (hb[7] + hb[8]);
  for (const auto& e : a) CHECK(e.value < tau);
}

TEST_CASE("planted: labels follow the active dims") {
  PlantedSpec spec;
  spec.seed = 9;
  spec.label_noise = 0.0;
  const auto p = planted_regime_dump(spec);
  const auto& y = *p.dump.labels;
  const double ones = std::count(y.begin(), y.end(), 1) / static_cast<double>(y.size());
  CHECK(ones > 0.3);
  CHECK(ones < 0.7);

  spec.with_labels = false;
  CHECK_FALSE(planted_regime_dump(spec).dump.labels.has_value());
}

TEST_CASE("planted: seeded determinism and seed sensitivity") {
  PlantedSpec spec;
  spec.n = 500;
  spec.n_mixed = 2;
  spec.seed = 10;
  const auto a = planted_regime_dump(spec);
  const auto b = planted_regime_dump(spec);
  CHECK(a.dump.mu == b.dump.mu);
  CHECK(*a.dump.sigma_sq == *b.dump.sigma_sq);
  CHECK(*a.dump.labels == *b.dump.labels);
  CHECK(a.ground_truth == b.ground_truth);
  spec.seed = 11;
  CHECK_FALSE(planted_regime_dump(spec).dump.mu == a.dump.mu);

  SpikeSlabSpec s;
  s.n = 1000;
  s.seed = 3;
  CHECK(spike_slab_sample(s).values == spike_slab_sample(s).values);
}

TEST_CASE("planted: invalid specs and mean entropies") {
  PlantedSpec spec;
  spec.n = 50;
  CHECK_THROWS_AS(planted_regime_dump(spec), ParameterError);
  spec.n = 1000;
  spec.n_active = spec.n_passive = 0;
  CHECK_THROWS_AS(planted_regime_dump(spec), ParameterError);
  spec.n_active = 1;
  spec.mixed_p = 1.0;
  CHECK_THROWS_AS(planted_regime_dump(spec), ParameterError);

  PlantedSpec ok;
  CHECK(planted_mean_entropy(ok, Label::active) == doctest::Approx(gaussian_entropy(4.0)));
  CHECK(planted_mean_entropy(ok, Label::passive) == doctest::Approx(gaussian_entropy(0.001)));
  const double mixed = planted_mean_entropy(ok, Label::mixed);
  CHECK(mixed < planted_mean_entropy(ok, Label::active));
  CHECK(mixed > planted_mean_entropy(ok, Label::passive));
}
