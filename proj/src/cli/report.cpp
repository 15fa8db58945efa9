#include "report.hpp"

#include "lel/dump_io.hpp"
#include "lel/error.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

namespace lel::cli {
namespace {

std::ofstream open_out(const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw IoError("cannot write " + file.string());
  return out;
}

nlohmann::json labels_json(const std::vector<Label>& labels) {
  auto j = nlohmann::json::array();
  for (Label l : labels) j.push_back(std::string(to_string(l)));
  return j;
}

nlohmann::json label_counts(const std::vector<Label>& labels) {
  nlohmann::json j = nlohmann::json::object();
  for (auto l : {Label::active, Label::passive, Label::mixed, Label::unclassified}) {
    j[std::string(to_string(l))] = std::count(labels.begin(), labels.end(), l);
  }
  return j;
}

}  // namespace

nlohmann::json analysis_report(const LatentDump& dump, const AnalysisResult& r) {
  const auto& c = r.classification;
  const auto& cc = r.classifier_config;
  nlohmann::json report;
  report["schema"] = 1;
  report["dump"] = {{"source", dump.meta.source},
                    {"n", dump.n()},
                    {"d", dump.d()},
                    {"has_sigma", dump.has_sigma()},
                    {"has_labels", dump.labels.has_value()}};
  auto est = nlohmann::json::array();
  for (Estimator e : r.estimators) est.push_back(std::string(to_string(e)));
  report["estimators"] = est;
  report["reference_estimator"] = std::string(to_string(r.estimators.front()));
  report["estimator_config"] = to_json(r.estimator_config);

  auto dims = nlohmann::json::array();
  for (std::size_t j = 0; j < r.stats.size(); ++j) {
    const auto& s = r.stats[j];
    nlohmann::json dj;
    dj["dim"] = j;
    dj["mean_mu"] = s.mean_mu;
    dj["var_mu"] = s.var_mu;
    dj["second_moment_mu"] = s.second_moment_mu;
    dj["entropy"] = s.entropy;
    dj["degenerate_estimators"] = s.degenerate_estimators;
    dj["entropy_power"] = s.entropy_power;
    if (s.mean_sigma_sq) dj["mean_sigma_sq"] = *s.mean_sigma_sq;
    if (s.var_sigma_sq) dj["var_sigma_sq"] = *s.var_sigma_sq;
    if (s.kl) {
      dj["kl"] = {{"mean", s.kl->mean},
                  {"min", s.kl->quantiles[0]},
                  {"q05", s.kl->quantiles[1]},
                  {"median", s.kl->quantiles[2]},
                  {"q95", s.kl->quantiles[3]},
                  {"max", s.kl->quantiles[4]}};
    }
    if (s.mixed_score) dj["mixed_score"] = *s.mixed_score;
    const auto& b = r.bounds[j];
    dj["bound_check"] = {{"second_moment", b.second_moment},
                         {"variance", b.variance},
                         {"entropy_power", b.entropy_power},
                         {"chain_holds", b.chain_holds},
                         {"slack", b.slack}};
    dj["labels"] = {{"entropy", std::string(to_string(c.entropy_label[j]))},
                    {"bonheme", std::string(to_string(c.bonheme_label[j]))},
                    {"kl", std::string(to_string(c.kl_label[j]))}};
    dims.push_back(std::move(dj));
  }
  report["dimensions"] = std::move(dims);

  nlohmann::json cls;
  cls["tau_method"] = std::string(to_string(cc.tau_method));
  cls["tau_used"] = c.tau_used;
  cls["separation_score"] = c.separation_score;
  cls["no_regime"] = c.no_regime;
  cls["criteria"] = {
      {"entropy", {{"labels", labels_json(c.entropy_label)}, {"counts", label_counts(c.entropy_label)}}},
      {"bonheme",
       {{"labels", labels_json(c.bonheme_label)},
        {"counts", label_counts(c.bonheme_label)},
        {"thresholds",
         {{"t_act", cc.bonheme.t_act},
          {"t_pas", cc.bonheme.t_pas},
          {"t_var", cc.bonheme.t_var},
          {"t_mu", cc.bonheme.t_mu},
          {"mixed_cut", cc.bonheme.mixed_cut},
          {"mixed_min_mass", cc.bonheme.mixed_min_mass}}}}},
      {"kl",
       {{"labels", labels_json(c.kl_label)},
        {"counts", label_counts(c.kl_label)},
        {"epsilon", cc.kl.epsilon},
        {"delta", cc.kl.delta},
        {"passive_fraction", c.kl_passive_fraction}}}};
  cls["entropy_score"] = c.entropy_score;
  cls["mixed_score"] = c.mixed_score;
  report["classification"] = std::move(cls);
  report["separation_score"] = c.separation_score;

  auto agree = nlohmann::json::array();
  for (const auto& a : r.agreement) {
    auto confusion = nlohmann::json::array();
    for (const auto& row : a.confusion) confusion.push_back(row);
    agree.push_back({{"first", a.first},
                     {"second", a.second},
                     {"compared", a.compared},
                     {"agreement", a.agreement},
                     {"confusion_order", {"active", "passive", "mixed", "unclassified"}},
                     {"confusion", confusion}});
  }
  report["agreement"] = std::move(agree);
  report["bound_chain_holds"] = std::all_of(r.bounds.begin(), r.bounds.end(),
                                            [](const BoundCheck& b) { return b.chain_holds; });
  report["notes"] = c.notes;
  return report;
}

void write_marginal_entropies(const AnalysisResult& r, const std::filesystem::path& file) {
  const std::string ref(to_string(r.estimators.front()));
  std::vector<std::size_t> order(r.stats.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return r.stats[a].entropy.at(ref) > r.stats[b].entropy.at(ref);
  });
  auto out = open_out(file);
  out << "rank,dim";
  for (Estimator e : r.estimators) out << ',' << to_string(e);
  out << ",label_entropy\n";
  for (std::size_t k = 0; k < order.size(); ++k) {
    const std::size_t j = order[k];
    out << k << ',' << j;
    for (Estimator e : r.estimators) out << ',' << format_real(r.stats[j].entropy.at(std::string(to_string(e))));
    out << ',' << to_string(r.classification.entropy_label[j]) << '\n';
  }
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& file) {
  auto out = open_out(file);
  out << "pi,estimator,entropy,oracle_entropy,sample_variance\n";
  for (const auto& r : rows) {
    out << format_real(r.pi) << ',' << to_string(r.estimator) << ',' << format_real(r.entropy) << ','
        << format_real(r.oracle_entropy) << ',' << format_real(r.sample_variance) << '\n';
  }
}

void write_oracle_csv(const std::vector<double>& pis, const std::vector<double>& oracle,
                      const std::filesystem::path& file) {
  auto out = open_out(file);
  out << "pi,oracle_entropy\n";
  for (std::size_t i = 0; i < pis.size(); ++i) {
    out << format_real(pis[i]) << ',' << format_real(oracle[i]) << '\n';
  }
}

nlohmann::json curve_report(const std::vector<CurvePoint>& curve, const RegressionConfig& config,
                            int repeats, const std::string& estimator) {
  nlohmann::json j;
  j["schema"] = 1;
  j["estimator"] = estimator;
  j["repeats"] = repeats;
  j["regression"] = {{"learning_rate", config.learning_rate},
                     {"epochs", config.epochs},
                     {"l2", config.l2},
                     {"train_fraction", config.train_fraction},
                     {"seed", config.seed}};
  auto pts = nlohmann::json::array();
  for (const auto& p : curve) {
    pts.push_back({{"n", p.n_dims},
                   {"accuracy_raw", p.accuracy_raw},
                   {"accuracy_raw_std", p.accuracy_raw_std},
                   {"accuracy_normalised", p.accuracy_normalised},
                   {"accuracy_normalised_std", p.accuracy_normalised_std},
                   {"dims_used", p.dims_used}});
  }
  j["curve"] = std::move(pts);
  return j;
}

void write_curve_csv(const std::vector<CurvePoint>& curve, const std::filesystem::path& file) {
  auto out = open_out(file);
  out << "n,accuracy_raw,accuracy_normalised,accuracy_raw_std,accuracy_normalised_std\n";
  for (const auto& p : curve) {
    out << p.n_dims << ',' << format_real(p.accuracy_raw) << ',' << format_real(p.accuracy_normalised)
        << ',' << format_real(p.accuracy_raw_std) << ',' << format_real(p.accuracy_normalised_std)
        << '\n';
  }
}

void write_ground_truth(const std::vector<TruthRow>& rows, const std::filesystem::path& file) {
  auto out = open_out(file);
  out << "dim,label,oracle_entropy\n";
  for (const auto& r : rows) {
    out << r.dim << ',' << r.label << ',';
    if (r.oracle_entropy) out << format_real(*r.oracle_entropy);
    out << '\n';
  }
}

void write_json(const nlohmann::json& j, const std::filesystem::path& file) {
  auto out = open_out(file);
  out << j.dump(2) << '\n';
}

}  // namespace lel::cli
