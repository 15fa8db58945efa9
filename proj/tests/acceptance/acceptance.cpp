// One PASS/FAIL line per acceptance criterion. Exit status is non-zero when
// any criterion fails.

#include "lel/classifier.hpp"
#include "lel/downstream.hpp"
#include "lel/estimators.hpp"
#include "lel/rng.hpp"
#include "lel/statistics.hpp"
#include "lel/synthetic.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#ifndef LEL_BIN_PATH
#define LEL_BIN_PATH "lel"
#endif

using namespace lel;
namespace fs = std::filesystem;

namespace {

const double kUnitGaussian = 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e);

// Failure details collected while a criterion runs.
struct Check {
  bool ok = true;
  std::vector<std::string> failures;
  std::ostringstream info;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (failures.size() < 8) failures.push_back(what);
    }
  }
};

std::string fmt(double v, int precision = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

int g_failed = 0;

void criterion(const std::string& name, double time_limit_s, const std::function<void(Check&)>& body) {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.require(false, std::string("exception: ") + e.what());
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (time_limit_s > 0.0) {
    c.require(elapsed < time_limit_s, "runtime " + fmt(elapsed, 1) + " s exceeds " + fmt(time_limit_s, 0) + " s");
  }
  if (!c.ok) ++g_failed;
  std::printf("%s  %-22s %6.1f s  %s\n", c.ok ? "PASS" : "FAIL", name.c_str(), elapsed, c.info.str().c_str());
  for (const auto& f : c.failures) std::printf("      - %s\n", f.c_str());
  std::fflush(stdout);
}

Eigen::VectorXd normal_sample(int n, double sd, std::uint64_t seed) {
  auto rng = make_rng(seed, 0x616363);
  std::normal_distribution<double> normal(0.0, sd);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

Eigen::MatrixXd normal_matrix(int n, int d, std::uint64_t seed) {
  auto rng = make_rng(seed, 0x6d6174);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd m(n, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < n; ++i) m(i, j) = normal(rng);
  return m;
}

std::span<const double> as_span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

std::vector<double> column_entropies(const LatentDump& dump, const EstimatorConfig& cfg) {
  std::vector<double> h;
  for (const auto& e : dimension_entropies(dump.mu, cfg)) h.push_back(e.value);
  return h;
}

PlantedSpec planted(std::uint64_t seed, int mixed = 0) {
  PlantedSpec s;
  s.n_active = 8;
  s.n_passive = 24;
  s.n_mixed = mixed;
  s.n = 5000;
  s.seed = seed;
  return s;
}

constexpr std::uint64_t kSeeds[] = {1, 2, 3, 4, 5};

void estimator_calibration(Check& c) {
  const Eigen::VectorXd g = normal_sample(10000, 1.0, 11);
  EstimatorConfig cfg;
  cfg.seed = 11;
  for (Estimator e : {Estimator::histogram, Estimator::knn, Estimator::gmm_mc}) {
    cfg.estimator = e;
    const double h = estimate_entropy(as_span(g), cfg).value;
    c.info << to_string(e) << "=" << fmt(h) << " ";
    c.require(std::abs(h - kUnitGaussian) <= 0.1, std::string(to_string(e)) + " on N(0,1): " + fmt(h));
  }
  auto rng = make_rng(12, 0x756e69);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd x(100000);
  for (auto& v : x) v = u(rng);
  const double hu = histogram_entropy(as_span(x), BinRule::freedman_diaconis).value;
  c.info << "histogram U(0,1)=" << fmt(hu);
  c.require(std::abs(hu) <= 0.05, "histogram on U(0,1): " + fmt(hu));
}

void renyi_checks(Check& c) {
  const int n = 64;
  GramMatrix j;
  j.entries = Eigen::MatrixXd::Constant(n, n, 1.0 / n);
  const double sj = renyi_entropy(j, 1.01).value;
  c.require(std::abs(sj) <= 1e-9, "J/N gram: " + fmt(sj, 12));

  GramMatrix id;
  id.entries = Eigen::MatrixXd::Identity(n, n) / n;
  const double si = renyi_entropy(id, 1.01).value;
  c.require(std::abs(si - std::log(n)) <= 1e-9, "I/N gram: " + fmt(si, 12));

  const double half = renyi_from_eigenvalues(Eigen::Vector2d(0.5, 0.5), 2.0);
  c.require(half == std::log(2.0), "{0.5, 0.5} at alpha 2: " + fmt(half, 17));

  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const int rows = 50 + 10 * t;
    const Eigen::MatrixXd x = normal_matrix(rows, 1 + t % 2, 100 + static_cast<std::uint64_t>(t));
    const auto gram = gram_matrix(x, BandwidthRule::median());
    const double diff = std::abs(renyi_entropy(gram, 1.01).value - renyi_entropy(gram, 0.99).value);
    worst = std::max(worst, diff);
    c.require(diff <= 0.02, "gram " + std::to_string(t) + ": |S1.01 - S0.99| = " + fmt(diff));
  }
  c.info << "S(J/N)=" << fmt(sj, 6) << " S(I/N)-logN=" << fmt(si - std::log(n), 6)
         << " max|S1.01-S0.99|=" << fmt(worst);
}

void spike_slab(Check& c) {
  std::vector<double> grid;
  for (int i = 1; i <= 9; ++i) grid.push_back(i / 10.0);
  SpikeSlabSpec base;
  base.epsilon = 0.05;
  base.target_var = 1.0;
  base.n = 100000;
  base.seed = 2024;
  const std::vector<Estimator> est = {Estimator::knn, Estimator::gmm_mc};
  EstimatorConfig cfg;
  cfg.seed = 2024;
  const auto rows = spike_slab_sweep(grid, base, est, cfg);

  double worst_var_z = 0.0;
  double worst_oracle = 0.0;
  for (const auto& r : rows) {
    if (r.estimator != Estimator::knn) continue;
    SpikeSlabSpec s = base;
    s.pi = r.pi;
    const double slab = slab_variance(s);
    const double eps2 = base.epsilon * base.epsilon;
    const double mu4 = 3.0 * ((1.0 - r.pi) * eps2 * eps2 + r.pi * slab * slab);
    const double se = std::sqrt((mu4 - 1.0) / base.n);
    const double z = std::abs(r.sample_variance - 1.0) / se;
    worst_var_z = std::max(worst_var_z, z);
    c.require(z <= 3.0, "pi=" + fmt(r.pi, 1) + ": sample variance " + fmt(r.sample_variance) + " is " +
                            fmt(z, 2) + " SE from 1");
  }
  for (Estimator e : est) {
    std::vector<const SweepRow*> mine;
    for (const auto& r : rows)
      if (r.estimator == e) mine.push_back(&r);
    c.info << to_string(e) << "=[";
    for (std::size_t i = 0; i < mine.size(); ++i) {
      c.info << (i ? " " : "") << fmt(mine[i]->entropy, 3);
      if (i > 0) {
        c.require(mine[i]->entropy > mine[i - 1]->entropy,
                  std::string(to_string(e)) + " not increasing at pi=" + fmt(mine[i]->pi, 1));
      }
      const double p = mine[i]->pi;
      if (std::abs(p - 0.3) < 1e-9 || std::abs(p - 0.5) < 1e-9 || std::abs(p - 0.7) < 1e-9) {
        const double err = std::abs(mine[i]->entropy - mine[i]->oracle_entropy);
        worst_oracle = std::max(worst_oracle, err);
        c.require(err <= 0.1, std::string(to_string(e)) + " at pi=" + fmt(p, 1) + ": " +
                                  fmt(mine[i]->entropy) + " vs oracle " + fmt(mine[i]->oracle_entropy));
      }
    }
    c.info << "] ";
  }
  c.info << "max var z=" << fmt(worst_var_z, 2) << " max |h-oracle|=" << fmt(worst_oracle);
}

void bound_chain(Check& c) {
  const std::vector<Estimator> est = {Estimator::knn};
  EstimatorConfig cfg;
  double min_ratio = 1e9;
  double max_gap = 0.0;
  for (auto seed : kSeeds) {
    const auto p = planted_regime_dump(planted(seed));
    cfg.seed = seed;
    const auto stats = compute_dimension_stats(p.dump, est, cfg);
    const auto bounds = check_bound_chain(stats, "knn", 0.05);
    for (std::size_t j = 0; j < bounds.size(); ++j) {
      const auto& b = bounds[j];
      const std::string where = "seed " + std::to_string(seed) + " dim " + std::to_string(j);
      c.require(b.chain_holds, where + ": E[mu^2]=" + fmt(b.second_moment, 6) + " Var=" +
                                   fmt(b.variance, 6) + " N=" + fmt(b.entropy_power, 6));
      // Every planted column of an 8/24/0 dump has Gaussian means.
      const double gap = std::abs(b.variance - b.entropy_power) / b.variance;
      max_gap = std::max(max_gap, gap);
      c.require(gap <= 0.1, where + ": Var vs entropy power differ by " + fmt(100 * gap, 1) + "%");
      min_ratio = std::min(min_ratio, b.variance / b.entropy_power);
    }
  }
  c.info << "min Var/N=" << fmt(min_ratio) << " max |Var-N|/Var=" << fmt(max_gap);
}

void classifier_recovery(Check& c) {
  EstimatorConfig cfg;
  ClassifierConfig cc;
  std::size_t dims = 0;
  for (auto seed : kSeeds) {
    const auto p = planted_regime_dump(planted(seed));
    cfg.seed = seed;
    const auto h = column_entropies(p.dump, cfg);
    const auto r = classify(p.dump, h, cc);
    for (std::size_t j = 0; j < h.size(); ++j) {
      const std::string where = "seed " + std::to_string(seed) + " dim " + std::to_string(j);
      c.require(r.entropy_label[j] == p.ground_truth[j], where + ": entropy label " +
                                                              std::string(to_string(r.entropy_label[j])));
      c.require(r.bonheme_label[j] == r.entropy_label[j], where + ": bonheme disagrees");
      c.require(r.kl_label[j] == r.entropy_label[j], where + ": kl disagrees");
      ++dims;
    }
  }

  double worst_mixed = 0.0;
  std::size_t mixed_dims = 0;
  for (auto seed : kSeeds) {
    auto spec = planted(seed, 4);
    spec.mixed_p = 0.5;
    const auto p = planted_regime_dump(spec);
    cfg.seed = seed;
    const auto h = column_entropies(p.dump, cfg);
    const auto r = classify(p.dump, h, cc);
    for (std::size_t j = 0; j < h.size(); ++j) {
      const std::string where = "mixed seed " + std::to_string(seed) + " dim " + std::to_string(j);
      if (p.ground_truth[j] == Label::mixed) {
        ++mixed_dims;
        const double dev = std::abs(r.mixed_score[j] - std::log(2.0));
        worst_mixed = std::max(worst_mixed, dev);
        c.require(dev <= 0.05, where + ": mixed_score " + fmt(r.mixed_score[j]));
        c.require(r.entropy_label[j] == Label::active, where + ": entropy label " +
                                                           std::string(to_string(r.entropy_label[j])));
      } else {
        c.require(r.entropy_label[j] == p.ground_truth[j], where + ": entropy label wrong");
        c.require(r.bonheme_label[j] == r.entropy_label[j], where + ": bonheme disagrees");
        c.require(r.kl_label[j] == r.entropy_label[j], where + ": kl disagrees");
      }
    }
  }
  c.info << dims << " dims recovered, " << mixed_dims << " mixed dims, max |score-ln2|=" << fmt(worst_mixed);
}

void kl_closed_form(Check& c) {
  const double a = gaussian_kl(0.0, 1.0);
  const double b = gaussian_kl(1.0, 1.0);
  const double e = gaussian_kl(0.0, std::numbers::e);
  c.require(std::abs(a) <= 1e-12, "(0,1): " + fmt(a, 15));
  c.require(std::abs(b - 0.5) <= 1e-12, "(1,1): " + fmt(b, 15));
  c.require(std::abs(e - 0.5 * (std::numbers::e - 2.0)) <= 1e-12, "(0,e): " + fmt(e, 15));
  double lowest = 1e9;
  for (int i = 0; i < 100; ++i) {
    const double mu = -5.0 + 10.0 * i / 99.0;
    for (int k = 0; k < 100; ++k) {
      const double s2 = std::exp(-6.0 + 9.0 * k / 99.0);
      const double kl = gaussian_kl(mu, s2);
      lowest = std::min(lowest, kl);
      c.require(kl >= 0.0, "negative KL at mu=" + fmt(mu) + " s2=" + fmt(s2, 6));
    }
  }
  c.info << "min KL on grid=" << fmt(lowest, 12);
}

void mutual_information_checks(Check& c) {
  EstimatorConfig smooth;
  smooth.bandwidth = BandwidthRule::silverman();
  double worst_resid = -1e9;
  double worst_indep = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Eigen::MatrixXd x = normal_matrix(500, 10, 300 + seed);
    const Eigen::VectorXd w = normal_sample(10, 1.0, 400 + seed);
    const Eigen::MatrixXd z = (x * w / std::sqrt(10.0)).array().tanh().matrix();
    const auto mi = mutual_information(x, z, smooth);
    const double resid = (mi.entropy_z - mi.value) / mi.joint_entropy;
    worst_resid = std::max(worst_resid, resid);
    c.require(mi.entropy_z - mi.value <= 0.05 * mi.joint_entropy,
              "seed " + std::to_string(seed) + ": S(B) - I = " + fmt(mi.entropy_z - mi.value) +
                  " > 0.05 S(A,B) = " + fmt(0.05 * mi.joint_entropy));

    const EstimatorConfig plain;
    const Eigen::MatrixXd xi = normal_sample(500, 1.0, 500 + seed);
    const Eigen::MatrixXd zi = normal_sample(500, 1.0, 600 + seed);
    const double indep = mutual_information(xi, zi, plain).value;
    worst_indep = std::max(worst_indep, std::abs(indep));
    c.require(std::abs(indep) <= 0.05, "seed " + std::to_string(seed) + ": independent I = " + fmt(indep));
  }
  c.info << "max (S(B)-I)/S(A,B)=" << fmt(worst_resid) << " max |I_indep|=" << fmt(worst_indep);
}

void downstream_curves(Check& c) {
  EstimatorConfig cfg;
  RegressionConfig rc;
  double max_plateau = -1.0;
  double min_norm_step = 1.0;
  for (auto seed : kSeeds) {
    const auto p = planted_regime_dump(planted(seed));
    cfg.seed = seed;
    rc.seed = seed;
    const auto h = column_entropies(p.dump, cfg);
    const auto curve = topn_curve(p.dump, h, rc, 1);
    const std::size_t n_active = 8;
    for (std::size_t i = 1; i < curve.size(); ++i) {
      const std::string where = "seed " + std::to_string(seed) + " n=" + std::to_string(i + 1);
      if (i >= n_active) {
        const double inc = curve[i].accuracy_raw - curve[i - 1].accuracy_raw;
        max_plateau = std::max(max_plateau, inc);
        c.require(inc <= 0.01, where + ": raw increment " + fmt(inc));
      }
      const double step = curve[i].accuracy_normalised - curve[i - 1].accuracy_normalised;
      min_norm_step = std::min(min_norm_step, step);
      c.require(step >= -0.02, where + ": normalised step " + fmt(step));
    }
    c.require(curve.back().accuracy_normalised >= curve.back().accuracy_raw - 0.02,
              "seed " + std::to_string(seed) + ": final normalised " + fmt(curve.back().accuracy_normalised) +
                  " < final raw " + fmt(curve.back().accuracy_raw) + " - 0.02");
  }

  // Central differences of the regularised loss at a random point.
  const int n = 60, p = 5, k = 3;
  Eigen::MatrixXd x(n, p + 1);
  x.leftCols(p) = normal_matrix(n, p, 700);
  x.col(p).setOnes();
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(n, k);
  for (int i = 0; i < n; ++i) y(i, i % k) = 1.0;
  const Eigen::MatrixXd w = normal_matrix(p + 1, k, 701) * 0.5;
  const double l2 = 1e-2;
  const auto lg = softmax_loss_and_gradient(w, x, y, l2);
  double worst = 0.0;
  const double h = 1e-6;
  for (int r = 0; r <= p; ++r) {
    for (int col = 0; col < k; ++col) {
      Eigen::MatrixXd wp = w, wm = w;
      wp(r, col) += h;
      wm(r, col) -= h;
      const double fd = (softmax_loss_and_gradient(wp, x, y, l2).loss -
                         softmax_loss_and_gradient(wm, x, y, l2).loss) / (2 * h);
      worst = std::max(worst, std::abs(fd - lg.gradient(r, col)));
    }
  }
  c.require(worst <= 1e-5, "gradient vs finite differences: " + fmt(worst, 9));
  c.info << "max raw increment after n_active=" << fmt(max_plateau) << " min normalised step="
         << fmt(min_norm_step) << " grad err=" << std::scientific << worst;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_lel(const std::string& args) {
  const std::string cmd = std::string("'") + LEL_BIN_PATH + "' " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void determinism(Check& c) {
  const fs::path root = fs::temp_directory_path() / ("lel_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  const auto q = [](const fs::path& p) { return "'" + p.string() + "'"; };
  c.require(run_lel("synth --planted --n 2000 --seed 9 --out " + q(root / "dump")) == 0, "synth for inputs failed");

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"synth-planted", "synth --planted --n 2000 --seed 9"},
      {"synth-spike-slab", "synth --spike-slab --pi 0.3 --n 20000 --seed 9"},
      {"analyze", "analyze " + q(root / "dump") + " --estimator knn,histogram,gmm_mc,renyi --gram-cap 500 --seed 9"},
      {"sweep", "sweep --n 5000 --seed 9"},
      {"sweep-oracle", "sweep --oracle-only"},
      {"downstream", "downstream " + q(root / "dump") + " --repeats 2 --epochs 100 --seed 9"},
  };
  int files = 0;
  for (const auto& [name, args] : commands) {
    const fs::path a = root / (name + "_a");
    const fs::path b = root / (name + "_b");
    const int ra = run_lel(args + " --out " + q(a));
    const int rb = run_lel(args + " --out " + q(b));
    c.require(ra == 0 && rb == 0, name + ": exit codes " + std::to_string(ra) + ", " + std::to_string(rb));
    if (ra != 0 || rb != 0) continue;
    int here = 0;
    for (const auto& e : fs::recursive_directory_iterator(a)) {
      if (!e.is_regular_file()) continue;
      const auto rel = fs::relative(e.path(), a);
      c.require(fs::exists(b / rel) && slurp(e.path()) == slurp(b / rel), name + ": " + rel.string() + " differs");
      ++here;
    }
    c.require(here > 0, name + ": no output files");
    files += here;
  }
  fs::remove_all(root);
  c.info << commands.size() << " commands, " << files << " files compared";
}

}  // namespace

int main() {
  criterion("estimator-calibration", 10.0, estimator_calibration);
  criterion("renyi-formula", 0.0, renyi_checks);
  criterion("spike-slab-sweep", 120.0, spike_slab);
  criterion("bound-chain", 0.0, bound_chain);
  criterion("classifier-recovery", 0.0, classifier_recovery);
  criterion("kl-closed-form", 0.0, kl_closed_form);
  criterion("mi-containment", 0.0, mutual_information_checks);
  criterion("downstream-curves", 180.0, downstream_curves);
  criterion("determinism", 0.0, determinism);
  std::printf("%d criteria failed\n", g_failed);
  return g_failed == 0 ? 0 : 1;
}
