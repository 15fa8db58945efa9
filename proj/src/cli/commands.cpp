#include "lel/cli.hpp"

#include "lel/classifier.hpp"
#include "lel/downstream.hpp"
#include "lel/dump_io.hpp"
#include "lel/error.hpp"
#include "lel/estimators.hpp"
#include "lel/statistics.hpp"
#include "lel/synthetic.hpp"
#include "report.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

namespace lel {
namespace {

namespace fs = std::filesystem;

struct GlobalOptions {
  std::uint64_t seed = 0;
  std::string out = ".";
  std::string estimator = "knn";
  double alpha = 1.01;
  int k = 10;
  std::string bins = "fd";
  std::string bandwidth = "median";
  int gram_cap = 2000;
  int gmm_components = 5;
  int mc_samples = 20000;
  double tau = 0.0;
  std::string tau_method = "largest-gap";
  double epsilon = 0.01;
  double delta = 0.95;
  BonhemeThresholds bonheme;
};

struct SynthOptions {
  bool spike_slab = false;
  bool planted = false;
  double pi = 0.5;
  double spike_std = 0.05;
  double variance = 1.0;
  int n = 0;  // 0: per-mode default
  int active = 8;
  int passive = 24;
  int mixed = 0;
  double active_scale = 2.0;
  double mixed_p = 0.5;
  double label_noise = 0.05;
  bool no_labels = false;
};

struct SweepOptions {
  std::vector<double> pi_grid{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  double spike_std = 0.05;
  double variance = 1.0;
  int n = 100000;
  bool oracle_only = false;
};

struct DownstreamOptions {
  int repeats = 5;
  RegressionConfig regression;
};

EstimatorConfig estimator_config(const GlobalOptions& g) {
  EstimatorConfig c;
  c.knn_k = g.k;
  c.renyi_alpha = g.alpha;
  c.bin_rule = parse_bin_rule(g.bins);
  c.bandwidth.kind = parse_bandwidth_kind(g.bandwidth);
  c.gram_sample_cap = g.gram_cap;
  c.gmm_max_components = g.gmm_components;
  c.gmm_mc_samples = g.mc_samples;
  c.seed = g.seed;
  if (c.knn_k < 1) throw ParameterError("--k must be >= 1");
  if (c.gram_sample_cap < 2) throw ParameterError("--gram-cap must be >= 2");
  if (c.gmm_max_components < 1) throw ParameterError("--gmm-components must be >= 1");
  if (c.gmm_mc_samples < 1) throw ParameterError("--mc-samples must be >= 1");
  if (c.bandwidth.kind == BandwidthRule::Kind::fixed) {
    throw ParameterError("--bandwidth accepts median or silverman");
  }
  validate(c);
  return c;
}

ClassifierConfig classifier_config(const GlobalOptions& g, bool tau_given) {
  ClassifierConfig c;
  c.tau_method = tau_given ? ThresholdMethod::fixed : parse_threshold_method(g.tau_method);
  if (c.tau_method == ThresholdMethod::fixed && !tau_given) {
    throw ParameterError("--tau-method fixed needs --tau");
  }
  c.tau_fixed = g.tau;
  c.bonheme = g.bonheme;
  c.kl = {g.epsilon, g.delta};
  return c;
}

fs::path prepare_out(const std::string& out) {
  const fs::path dir(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + out);
  return dir;
}

int cmd_analyze(const GlobalOptions& g, bool tau_given, const std::string& dump_path) {
  const auto dump = load_dump(dump_path);
  cli::AnalysisResult r;
  r.estimators = parse_estimator_list(g.estimator);
  r.estimator_config = estimator_config(g);
  r.estimator_config.estimator = r.estimators.front();
  r.classifier_config = classifier_config(g, tau_given);

  r.stats = compute_dimension_stats(dump, r.estimators, r.estimator_config);
  const std::string ref(to_string(r.estimators.front()));
  r.bounds = check_bound_chain(r.stats, ref);
  std::vector<double> h;
  for (const auto& s : r.stats) h.push_back(s.entropy.at(ref));
  r.classification = classify(dump, h, r.classifier_config);
  std::map<std::string, std::vector<Label>> by_criterion{{"entropy", r.classification.entropy_label},
                                                         {"bonheme", r.classification.bonheme_label},
                                                         {"kl", r.classification.kl_label}};
  r.agreement = compare_criteria(by_criterion);

  const auto dir = prepare_out(g.out);
  cli::write_json(cli::analysis_report(dump, r), dir / "report.json");
  cli::write_marginal_entropies(r, dir / "marginal_entropies.csv");

  const auto active = std::count(r.classification.entropy_label.begin(),
                                 r.classification.entropy_label.end(), Label::active);
  std::cout << "analyzed " << dump.n() << " x " << dump.d() << " dump: " << active << " active, "
            << dump.d() - active << " passive (tau " << format_real(r.classification.tau_used)
            << ", separation " << format_real(r.classification.separation_score) << ")\n";
  return 0;
}

int cmd_synth(const GlobalOptions& g, const SynthOptions& o) {
  if (o.spike_slab == o.planted) throw ParameterError("synth needs exactly one of --spike-slab, --planted");
  const auto dir = prepare_out(g.out);
  std::vector<cli::TruthRow> truth;
  LatentDump dump;

  if (o.spike_slab) {
    SpikeSlabSpec spec;
    spec.pi = o.pi;
    spec.epsilon = o.spike_std;
    spec.target_var = o.variance;
    spec.n = o.n > 0 ? o.n : 100000;
    spec.seed = g.seed;
    const auto sample = spike_slab_sample(spec);
    dump.mu = sample.values;
    dump.meta.source = "synthetic/spike-slab";
    dump.meta.seed = g.seed;
    dump.meta.hyper_params = {{"pi", spec.pi},
                              {"epsilon", spec.epsilon},
                              {"target_var", spec.target_var},
                              {"slab_variance", sample.slab_variance},
                              {"n", spec.n}};
    truth.push_back({0, "spike-slab", spike_slab_entropy(spec)});
  } else {
    PlantedSpec spec;
    spec.n_active = o.active;
    spec.n_passive = o.passive;
    spec.n_mixed = o.mixed;
    spec.n = o.n > 0 ? o.n : 5000;
    spec.active_scale = o.active_scale;
    spec.mixed_p = o.mixed_p;
    spec.label_noise = o.label_noise;
    spec.with_labels = !o.no_labels;
    spec.seed = g.seed;
    auto planted = planted_regime_dump(spec);
    dump = std::move(planted.dump);
    for (std::size_t j = 0; j < planted.ground_truth.size(); ++j) {
      const Label l = planted.ground_truth[j];
      truth.push_back({static_cast<int>(j), std::string(to_string(l)), planted_mean_entropy(spec, l)});
    }
  }
  save_dump(dump, dir);
  cli::write_ground_truth(truth, dir / "ground_truth.csv");
  std::cout << "wrote " << dump.n() << " x " << dump.d() << " dump to " << dir.string() << "\n";
  return 0;
}

int cmd_sweep(const GlobalOptions& g, bool estimator_given, bool bandwidth_given, const SweepOptions& o) {
  if (o.pi_grid.empty()) throw ParameterError("--pi-grid is empty");
  SpikeSlabSpec base;
  base.epsilon = o.spike_std;
  base.target_var = o.variance;
  base.n = o.n;
  base.seed = g.seed;
  const auto dir = prepare_out(g.out);

  if (o.oracle_only) {
    std::vector<double> oracle;
    for (double pi : o.pi_grid) {
      auto spec = base;
      spec.pi = pi;
      oracle.push_back(spike_slab_entropy(spec));
    }
    cli::write_oracle_csv(o.pi_grid, oracle, dir / "sweep.csv");
  } else {
    const auto estimators =
        estimator_given ? parse_estimator_list(g.estimator)
                        : std::vector<Estimator>{Estimator::histogram, Estimator::knn,
                                                 Estimator::gmm_mc, Estimator::renyi};
    auto ecfg = estimator_config(g);
    // The variance is fixed across the grid, so Silverman keeps the kernel
    // width constant; the median rule would track the spike instead.
    if (!bandwidth_given) ecfg.bandwidth = BandwidthRule::silverman();
    const auto rows = spike_slab_sweep(o.pi_grid, base, estimators, ecfg);
    cli::write_sweep_csv(rows, dir / "sweep.csv");
  }
  std::cout << "wrote " << (dir / "sweep.csv").string() << "\n";
  return 0;
}

int cmd_downstream(const GlobalOptions& g, const DownstreamOptions& o, const std::string& dump_path) {
  const auto dump = load_dump(dump_path);
  if (!dump.labels) throw ParameterError("downstream needs a dump with labels.csv");
  const auto estimators = parse_estimator_list(g.estimator);
  auto ecfg = estimator_config(g);
  ecfg.estimator = estimators.front();
  std::vector<double> h;
  for (const auto& e : dimension_entropies(dump.mu, ecfg)) h.push_back(e.value);

  auto rcfg = o.regression;
  rcfg.seed = g.seed;
  const auto curve = topn_curve(dump, h, rcfg, o.repeats);
  const auto dir = prepare_out(g.out);
  cli::write_curve_csv(curve, dir / "curve.csv");
  cli::write_json(cli::curve_report(curve, rcfg, o.repeats, std::string(to_string(estimators.front()))),
                  dir / "curve.json");
  std::cout << "wrote " << curve.size() << " curve points to " << dir.string() << "\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Latent entropy diagnostics for mean/variance representation dumps", "lel"};
  app.require_subcommand(1);

  GlobalOptions g;
  app.option_defaults()->always_capture_default();
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--out", g.out, "Output directory");
  auto* estimator_opt =
      app.add_option("--estimator", g.estimator, "Estimator(s): histogram, knn, gmm_mc, renyi (comma list)");
  app.add_option("--alpha", g.alpha, "Renyi order");
  app.add_option("--k", g.k, "kNN neighbour index");
  app.add_option("--bins", g.bins, "Histogram bin rule: fd, sturges, scott");
  auto* bandwidth_opt =
      app.add_option("--bandwidth", g.bandwidth, "Gram bandwidth rule: median, silverman (sweep: silverman)");
  app.add_option("--gram-cap", g.gram_cap, "Maximum rows in a Gram matrix");
  app.add_option("--gmm-components", g.gmm_components, "Largest mixture considered by BIC");
  app.add_option("--mc-samples", g.mc_samples, "Monte Carlo draws for the mixture entropy");
  auto* tau_opt = app.add_option("--tau", g.tau, "Fixed entropy threshold (implies --tau-method fixed)");
  app.add_option("--tau-method", g.tau_method, "largest-gap, otsu or fixed");
  app.add_option("--epsilon", g.epsilon, "KL criterion epsilon");
  app.add_option("--delta", g.delta, "KL criterion delta");
  app.add_option("--t-act", g.bonheme.t_act, "Bonheme: mean sigma below this is active");
  app.add_option("--t-pas", g.bonheme.t_pas, "Bonheme: |mean sigma - 1| ceiling for passive");
  app.add_option("--t-var", g.bonheme.t_var, "Bonheme: variance ceiling for passive");
  app.add_option("--t-mu", g.bonheme.t_mu, "Bonheme: |mean mu| ceiling for passive");
  app.add_option("--mixed-cut", g.bonheme.mixed_cut, "sigma^2 cut for the mixed score");

  std::string dump_path;
  auto* analyze = app.add_subcommand("analyze", "Per-dimension statistics, bound chain and classification");
  analyze->fallthrough();
  analyze->add_option("dump", dump_path, "Dump directory")->required();

  SynthOptions so;
  auto* synth = app.add_subcommand("synth", "Write a synthetic dump with ground truth");
  synth->fallthrough();
  synth->add_flag("--spike-slab", so.spike_slab, "One spike-and-slab column");
  synth->add_flag("--planted", so.planted, "Planted active/passive/mixed dimensions");
  synth->add_option("--pi", so.pi, "Slab probability");
  synth->add_option("--spike-std", so.spike_std, "Spike standard deviation");
  synth->add_option("--variance", so.variance, "Target variance");
  synth->add_option("--n", so.n, "Sample count (default 100000 spike-slab, 5000 planted)");
  synth->add_option("--active", so.active, "Active dimensions");
  synth->add_option("--passive", so.passive, "Passive dimensions");
  synth->add_option("--mixed", so.mixed, "Mixed dimensions");
  synth->add_option("--active-scale", so.active_scale, "Std of active means");
  synth->add_option("--mixed-p", so.mixed_p, "Passive-state probability on mixed dims");
  synth->add_option("--label-noise", so.label_noise, "Fraction of flipped labels");
  synth->add_flag("--no-labels", so.no_labels, "Skip labels.csv");

  SweepOptions sw;
  auto* sweep = app.add_subcommand("sweep", "Spike-and-slab entropy sweep over pi");
  sweep->fallthrough();
  sweep->add_option("--pi-grid", sw.pi_grid, "Comma-separated pi values")->delimiter(',');
  sweep->add_option("--spike-std", sw.spike_std, "Spike standard deviation");
  sweep->add_option("--variance", sw.variance, "Target variance");
  sweep->add_option("--n", sw.n, "Samples per pi");
  sweep->add_flag("--oracle-only", sw.oracle_only, "Only the quadrature entropies");

  DownstreamOptions ds;
  auto* downstream = app.add_subcommand("downstream", "Accuracy of top-n entropy-ranked dimensions");
  downstream->fallthrough();
  downstream->add_option("dump", dump_path, "Dump directory with labels")->required();
  downstream->add_option("--repeats", ds.repeats, "Train/test splits averaged per point");
  downstream->add_option("--lr", ds.regression.learning_rate, "Learning rate");
  downstream->add_option("--epochs", ds.regression.epochs, "Gradient descent epochs");
  downstream->add_option("--l2", ds.regression.l2, "L2 penalty");
  downstream->add_option("--train-fraction", ds.regression.train_fraction, "Training split fraction");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    const bool tau_given = tau_opt->count() > 0;
    if (analyze->parsed()) return cmd_analyze(g, tau_given, dump_path);
    if (synth->parsed()) return cmd_synth(g, so);
    if (sweep->parsed()) return cmd_sweep(g, estimator_opt->count() > 0, bandwidth_opt->count() > 0, sw);
    if (downstream->parsed()) return cmd_downstream(g, ds, dump_path);
    return 2;
  } catch (const ParameterError& e) {
    std::cerr << "parameter error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace lel
