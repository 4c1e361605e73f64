#include "monah/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "monah/errors.hpp"
#include "monah/util.hpp"

namespace monah {

using nlohmann::ordered_json;

std::vector<std::string> ExperimentData::session_ids() const {
  std::vector<std::string> ids;
  ids.reserve(features.size());
  for (const auto& f : features) ids.push_back(f.session_id);
  return ids;
}

ExperimentData experiment_data(std::vector<Session> sessions, const Lexicon& lexicon) {
  ExperimentData d;
  std::vector<SessionMeta> meta;
  for (const auto& s : sessions) meta.push_back(s.meta);
  d.features.resize(sessions.size());
  parallel_for(sessions.size(), [&](std::size_t i) { d.features[i] = compute_features(sessions[i], meta, lexicon); });
  for (const auto& s : sessions) d.labels.push_back(binarize_label(s.meta.rapport_score));
  d.sessions = std::move(sessions);
  return d;
}

ExperimentData load_experiment_data(const CorpusManifest& manifest, const Lexicon& lexicon) {
  return experiment_data(load_corpus(manifest), lexicon);
}

namespace {

std::string canonical(const std::string& config) { return WeaveConfig::parse(config).format(); }

std::vector<std::vector<std::string>> read_csv_rows(std::istream& is, const std::string& source,
                                                    const std::vector<std::string>& header) {
  std::string line;
  if (!std::getline(is, line)) throw ParseError(source, 1, "missing header");
  std::vector<std::string> got;
  for (auto f : split(trim(line), ',')) got.emplace_back(trim(f));
  if (got != header) throw SchemaError("header", source + ": unexpected header '" + std::string(trim(line)) + "'");
  std::vector<std::vector<std::string>> rows;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> row;
    for (auto f : split(trim(line), ',')) row.emplace_back(trim(f));
    if (row.size() != header.size())
      throw ParseError(source, line_no, "expected " + std::to_string(header.size()) + " fields");
    rows.push_back(std::move(row));
  }
  return rows;
}

int parse_fold(const std::string& s, const std::string& source, std::size_t line) {
  const auto v = parse_double(s);
  if (!v || *v < 0 || *v != std::floor(*v)) throw ParseError(source, line, "bad fold index '" + s + "'");
  return static_cast<int>(*v);
}

ExternalAucs densify(const std::map<std::string, std::map<int, double>>& sparse, const std::string& source) {
  ExternalAucs out;
  for (const auto& [config, folds] : sparse) {
    std::vector<double> v;
    int expect = 0;
    for (const auto& [f, a] : folds) {
      if (f != expect++) throw SchemaError("fold", source + ": missing fold " + std::to_string(expect - 1) + " for " + config);
      v.push_back(a);
    }
    out[config] = std::move(v);
  }
  return out;
}

}  // namespace

ExternalAucs read_aucs_csv(std::istream& is, const std::string& source) {
  const auto rows = read_csv_rows(is, source, {"config", "fold", "auc"});
  std::map<std::string, std::map<int, double>> sparse;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const auto a = parse_double(r[2]);
    if (!a || *a < 0 || *a > 1) throw ParseError(source, i + 2, "bad auc '" + r[2] + "'");
    sparse[canonical(r[0])][parse_fold(r[1], source, i + 2)] = *a;
  }
  return densify(sparse, source);
}

ExternalAucs read_scores_csv(std::istream& is, const std::string& source) {
  const auto rows = read_csv_rows(is, source, {"config", "fold", "session_id", "probability", "label"});
  std::map<std::string, std::map<int, std::vector<ScoredLabel>>> scored;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const auto p = parse_double(r[3]);
    if (!p) throw ParseError(source, i + 2, "bad probability '" + r[3] + "'");
    if (r[4] != "0" && r[4] != "1") throw ParseError(source, i + 2, "label must be 0 or 1");
    scored[canonical(r[0])][parse_fold(r[1], source, i + 2)].push_back({*p, r[4] == "1"});
  }
  std::map<std::string, std::map<int, double>> sparse;
  for (const auto& [config, folds] : scored)
    for (const auto& [f, s] : folds) sparse[config][f] = auc(s);
  return densify(sparse, source);
}

FoldScores FoldScores::of(std::vector<double> aucs) {
  FoldScores s;
  s.mean = monah::mean(aucs);
  s.sd = sample_sd(aucs);
  s.fold_aucs = std::move(aucs);
  return s;
}

CorpusStats fold_stats(const ExperimentData& data, const FoldAssignment& folds, int fold) {
  const auto train = folds.train_indices(fold);
  std::vector<CoarseFeatureVector> vectors;
  std::vector<Session> sessions;
  for (auto i : train) {
    vectors.push_back(data.features[i]);
    if (!data.sessions.empty()) sessions.push_back(data.sessions[i]);
  }
  auto stats = fit_stats(vectors);
  if (!sessions.empty()) stats = merge(std::move(stats), fit_turn_stats(sessions));
  return stats;
}

Dataset design_matrix(const ExperimentData& data, const CorpusStats& stats, const WeaveConfig& config,
                      const FeatureRegistry& reg) {
  Dataset d;
  std::vector<std::size_t> cols;
  for (std::size_t j = 0; j < reg.size(); ++j) {
    if (!config.includes(reg[j])) continue;
    cols.push_back(j);
    d.feature_names.push_back(reg[j].name);
  }
  constexpr double absent = std::numeric_limits<double>::quiet_NaN();
  for (const auto& v : data.features) {
    std::vector<double> row;
    row.reserve(cols.size());
    for (auto j : cols) {
      const auto* st = stats.find(reg[j].name);
      row.push_back(v.values[j] && st ? z_score(*v.values[j], *st) : absent);
    }
    d.rows.push_back(std::move(row));
  }
  d.labels = data.labels;
  return d;
}

namespace {

Dataset subset(const Dataset& d, const std::vector<std::size_t>& idx) {
  Dataset out;
  out.feature_names = d.feature_names;
  for (auto i : idx) {
    out.rows.push_back(d.rows[i]);
    out.labels.push_back(d.labels[i]);
  }
  return out;
}

void write_fold_outputs(const ExperimentData& data, const ExperimentOptions& opt, int fold, const CorpusStats& stats) {
  const auto dir = opt.out / ("fold" + std::to_string(fold));
  fs::create_directories(dir);
  write_file((opt.out / ("stats_fold" + std::to_string(fold) + ".json")).string(), stats.to_json());
  if (data.sessions.empty()) return;
  std::string coarse;
  for (std::size_t i = 0; i < data.features.size(); ++i) {
    for (const auto& c : opt.configs) {
      const auto text = weave_coarse(data.features[i], stats, WeaveConfig::parse(c));
      coarse += ordered_json{{"session_id", data.features[i].session_id}, {"config", canonical(c)}, {"text", text}}
                    .dump() +
                "\n";
    }
  }
  write_file((dir / "coarse.jsonl").string(), coarse);
  const auto cfg = WeaveConfig::parse(opt.narrative_config);
  fs::create_directories(dir / "narratives");
  parallel_for(data.sessions.size(), [&](std::size_t i) {
    const auto n = weave(data.sessions[i], data.features[i], stats, cfg);
    write_narrative(n, dir / "narratives" / (n.session_id + ".json"));
  });
}

}  // namespace

namespace {
void compare_rows(ExperimentReport& report);
}

void attach_external(ExperimentReport& report, const ExternalAucs& han) {
  for (auto& r : report.rows) {
    const auto cfg = WeaveConfig::parse(r.config);
    r.han_coarse.reset();
    r.han_fine.reset();
    if (auto it = han.find(cfg.format()); it != han.end()) r.han_coarse = FoldScores::of(it->second);
    auto fine_cfg = cfg;
    fine_cfg.verbatim = true;
    fine_cfg.fine_prosody = fine_cfg.fine_actions = Level::Full;
    if (auto it = han.find(fine_cfg.format()); it != han.end()) r.han_fine = FoldScores::of(it->second);
    for (const auto* s : {&r.han_coarse, &r.han_fine})
      if (*s && s->value().fold_aucs.size() != r.tree.fold_aucs.size())
        throw LengthMismatch("configuration " + r.config + ": external fold count differs from the tree's");
  }
  compare_rows(report);
}

namespace {

void compare_rows(ExperimentReport& report) {
  const auto base_it = std::find_if(report.rows.begin(), report.rows.end(),
                                    [&](const ConfigResult& r) { return r.config == report.baseline; });
  if (base_it == report.rows.end()) throw ConfigError("report has no baseline row " + report.baseline);
  const auto base = *base_it;
  for (auto& r : report.rows) {
    r.tree_vs_baseline.reset();
    r.han_coarse_vs_baseline.reset();
    r.han_fine_vs_baseline.reset();
    r.han_coarse_vs_tree.reset();
    r.han_fine_vs_coarse.reset();
    if (r.config != report.baseline) {
      r.tree_vs_baseline = paired_compare(r.tree.fold_aucs, base.tree.fold_aucs, Tail::One);
      if (r.han_coarse && base.han_coarse)
        r.han_coarse_vs_baseline = paired_compare(r.han_coarse->fold_aucs, base.han_coarse->fold_aucs, Tail::One);
      if (r.han_fine && base.han_fine)
        r.han_fine_vs_baseline = paired_compare(r.han_fine->fold_aucs, base.han_fine->fold_aucs, Tail::One);
    }
    if (r.han_coarse) r.han_coarse_vs_tree = paired_compare(r.han_coarse->fold_aucs, r.tree.fold_aucs, Tail::Two);
    if (r.han_coarse && r.han_fine)
      r.han_fine_vs_coarse = paired_compare(r.han_fine->fold_aucs, r.han_coarse->fold_aucs, Tail::Two);
  }
}

}  // namespace

ExperimentReport run_experiment(const ExperimentData& data, const ExperimentOptions& opt) {
  if (data.features.size() != data.labels.size()) throw LengthMismatch("run_experiment: features and labels differ");
  if (opt.trials < 1) throw ConfigError("run_experiment: trials must be >= 1");
  std::vector<std::string> configs = opt.configs;
  if (std::find(configs.begin(), configs.end(), opt.baseline) == configs.end()) configs.insert(configs.begin(), opt.baseline);
  for (const auto& c : configs)
    if (!WeaveConfig::parse(c).any_coarse()) throw ConfigError("run_experiment: configuration '" + c + "' has no coarse family");

  ExperimentReport report;
  report.seed = opt.seed;
  report.trials = opt.trials;
  report.baseline = opt.baseline;
  report.folds = stratified_folds(data.session_ids(), data.labels, opt.folds, opt.seed);
  const int k = opt.folds;

  std::vector<CorpusStats> stats(static_cast<std::size_t>(k));
  parallel_for(stats.size(), [&](std::size_t f) { stats[f] = fold_stats(data, report.folds, static_cast<int>(f)); });
  if (!opt.out.empty()) {
    fs::create_directories(opt.out);
    for (int f = 0; f < k; ++f) write_fold_outputs(data, opt, f, stats[static_cast<std::size_t>(f)]);
  }

  for (const auto& c : configs) {
    const auto cfg = WeaveConfig::parse(c);
    std::vector<Dataset> train(stats.size()), test(stats.size());
    for (std::size_t f = 0; f < stats.size(); ++f) {
      const auto full = design_matrix(data, stats[f], cfg);
      train[f] = subset(full, report.folds.train_indices(static_cast<int>(f)));
      test[f] = subset(full, report.folds.test_indices(static_cast<int>(f)));
    }
    const FoldEvaluator evaluate = [&](const TreeParams& params) {
      std::vector<double> aucs(stats.size());
      parallel_for(stats.size(), [&](std::size_t f) {
        const auto model = fit_tree(train[f], params);
        std::vector<double> scores;
        for (const auto& row : test[f].rows) scores.push_back(predict_proba(model, row));
        aucs[f] = auc(scores, test[f].labels);
      });
      return aucs;
    };
    ConfigResult row;
    row.config = c;
    row.search = random_search(evaluate, opt.trials, opt.seed);
    row.best_trial = row.search.best_trial;
    row.best_params = row.search.best().params;
    row.tree = FoldScores::of(row.search.best().fold_aucs);
    report.rows.push_back(std::move(row));
  }
  attach_external(report, opt.han);
  if (!opt.out.empty()) write_report(report, data, opt.out);
  return report;
}

namespace {

ordered_json optional_number(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

ordered_json comparison_json(const std::optional<Comparison>& c, char symbol) {
  if (!c) return nullptr;
  return {{"tail", c->tail == Tail::One ? "one" : "two"},
          {"mean_diff", c->mean_diff},
          {"sd_diff", c->sd_diff},
          {"t", optional_number(c->t)},
          {"p", optional_number(c->p)},
          {"ci95", {c->ci_low, c->ci_high}},
          {"marker", c->marker(symbol)}};
}

ordered_json scores_json(const std::optional<FoldScores>& s) {
  if (!s) return nullptr;
  return {{"fold_aucs", s->fold_aucs}, {"mean", s->mean}, {"sd", s->sd}};
}

std::string cell(const std::optional<FoldScores>& s, const std::optional<Comparison>& vs_base) {
  if (!s) return "-";
  std::string out = format_fixed(s->mean, 3);
  if (vs_base) {
    const auto m = vs_base->marker('*');
    if (!m.empty()) out += " " + m;
  }
  return out + " (" + format_fixed(s->sd, 3) + ")";
}

std::string diff_cell(const std::optional<Comparison>& c) {
  if (!c) return "-";
  const auto m = c->marker('^');
  std::string out = m.empty() ? "" : m + " ";
  return out + "[" + format_fixed(c->ci_low, 3) + ", " + format_fixed(c->ci_high, 3) + "]";
}

}  // namespace

std::string ExperimentReport::to_json() const {
  ordered_json rows_json = ordered_json::array();
  for (const auto& r : rows) {
    const auto& p = r.best_params;
    rows_json.push_back(
        {{"config", r.config},
         {"tree",
          {{"fold_aucs", r.tree.fold_aucs},
           {"mean", r.tree.mean},
           {"sd", r.tree.sd},
           {"best_trial", r.best_trial + 1},
           {"params", {{"cp", p.cp}, {"max_depth", p.max_depth}, {"min_split", p.min_split}}},
           {"vs_baseline", comparison_json(r.tree_vs_baseline, '*')}}},
         {"han_coarse", scores_json(r.han_coarse)},
         {"han_coarse_vs_baseline", comparison_json(r.han_coarse_vs_baseline, '*')},
         {"han_coarse_vs_tree", comparison_json(r.han_coarse_vs_tree, '^')},
         {"han_fine", scores_json(r.han_fine)},
         {"han_fine_vs_baseline", comparison_json(r.han_fine_vs_baseline, '*')},
         {"han_fine_vs_coarse", comparison_json(r.han_fine_vs_coarse, '^')}});
  }
  ordered_json doc = {{"seed", seed},   {"folds", folds.k}, {"trials", trials},
                      {"baseline", baseline}, {"rows", rows_json}};
  return doc.dump(2) + "\n";
}

ExperimentReport ExperimentReport::from_json(const std::string& text, const std::string& source) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(source, 1, e.what());
  }
  ExperimentReport rep;
  try {
    rep.seed = doc.at("seed").get<std::uint64_t>();
    rep.folds.k = doc.at("folds").get<int>();
    rep.folds.seed = rep.seed;
    rep.trials = doc.at("trials").get<std::size_t>();
    rep.baseline = doc.at("baseline").get<std::string>();
    for (const auto& j : doc.at("rows")) {
      ConfigResult r;
      r.config = j.at("config").get<std::string>();
      const auto& t = j.at("tree");
      r.tree = FoldScores::of(t.at("fold_aucs").get<std::vector<double>>());
      r.best_trial = t.at("best_trial").get<std::size_t>() - 1;
      r.best_params.cp = t.at("params").at("cp").get<double>();
      r.best_params.max_depth = t.at("params").at("max_depth").get<int>();
      r.best_params.min_split = t.at("params").at("min_split").get<int>();
      for (auto [key, dst] : {std::pair{"han_coarse", &r.han_coarse}, std::pair{"han_fine", &r.han_fine}})
        if (j.contains(key) && !j.at(key).is_null())
          *dst = FoldScores::of(j.at(key).at("fold_aucs").get<std::vector<double>>());
      rep.rows.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("report", source + ": " + e.what());
  }
  // Comparisons are a pure function of the fold AUCs.
  compare_rows(rep);
  return rep;
}

std::string ExperimentReport::to_markdown() const {
  std::ostringstream os;
  os << "| Coarse Inputs | Tree | Coarse-only (HAN) | Coarse-only vs. Tree | Coarse + Fine (HAN) | Coarse + Fine vs. "
        "Coarse-only |\n";
  os << "|---|---|---|---|---|---|\n";
  for (const auto& r : rows) {
    os << "| " << r.config << " | " << cell(r.tree, r.tree_vs_baseline) << " | "
       << cell(r.han_coarse, r.han_coarse_vs_baseline) << " | " << diff_cell(r.han_coarse_vs_tree) << " | "
       << cell(r.han_fine, r.han_fine_vs_baseline) << " | " << diff_cell(r.han_fine_vs_coarse) << " |\n";
  }
  os << "\nMean five-fold AUC (sd). * vs. " << baseline << " (one-tailed paired t), ^ column-wise (two-tailed); "
     << "***/^^^ p<0.01, **/^^ p<0.05, */^ p<0.10. Intervals are 95% CIs of the paired difference.\n";
  return os.str();
}

void ExperimentReport::write_curves_csv(std::ostream& os) const {
  os << "config,trials,best_mean_auc\n";
  for (const auto& r : rows) {
    const auto best = r.search.cumulative_best();
    for (std::size_t i = 0; i < best.size(); ++i) os << r.config << ',' << i + 1 << ',' << format_double(best[i]) << '\n';
  }
}

void ExperimentReport::write_trials_csv(std::ostream& os) const {
  os << "config,trial,cp,max_depth,min_split,mean_auc,sd_auc,best_so_far\n";
  for (const auto& r : rows) monah::write_trials_csv(os, r.search, r.config);
}

void write_report(const ExperimentReport& report, const ExperimentData& data, const fs::path& dir) {
  fs::create_directories(dir);
  write_file((dir / "report.json").string(), report.to_json());
  write_file((dir / "report.md").string(), report.to_markdown());
  std::ostringstream curves, trials, labels;
  report.write_curves_csv(curves);
  report.write_trials_csv(trials);
  write_labels_csv(labels, data.session_ids(), data.labels);
  write_file((dir / "curves.csv").string(), curves.str());
  write_file((dir / "trials.csv").string(), trials.str());
  write_file((dir / "labels.csv").string(), labels.str());
  write_file((dir / "folds.json").string(), report.folds.to_json());
}

}  // namespace monah
