// monah: command-line driver over the corpus, feature, narrative and report files.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "monah/errors.hpp"
#include "monah/eval.hpp"
#include "monah/experiment.hpp"
#include "monah/features.hpp"
#include "monah/ingest.hpp"
#include "monah/narrative.hpp"
#include "monah/synth.hpp"
#include "monah/tree.hpp"
#include "monah/util.hpp"
#include "monah/viz.hpp"

namespace fs = std::filesystem;
using namespace monah;

namespace {

struct Args {
  std::string corpus;
  std::string config = "DAPSMH-vpa";
  std::string configs = "D'A'P',H,DH,PAH,APMH,APSMH,DAPSMH";
  std::uint64_t seed = 1;
  std::size_t trials = 20;
  int folds = 5;
  std::string out;
  std::string lexicon;
  bool coarse_only = false;
  std::string attentions;
  std::string features;
  std::string stats;
  std::string narrative;
  std::string fold_assignment;
  int fold = -1;
  std::string han_aucs;
  std::string han_scores;
  std::string run;
  std::size_t n = 200;
  double signal = 1.0;
  double positive_rate = 0.4;
};

Lexicon lexicon_for(const Args& a) { return a.lexicon.empty() ? Lexicon::builtin() : Lexicon::load(a.lexicon); }

std::vector<CoarseFeatureVector> features_for(const Args& a, const std::vector<Session>& sessions) {
  if (!a.features.empty()) {
    std::ifstream in(a.features);
    if (!in) throw IoError("cannot open " + a.features);
    return read_features_csv(in, a.features);
  }
  return experiment_data(sessions, lexicon_for(a)).features;
}

std::vector<std::string> split_configs(const std::string& s) {
  std::vector<std::string> out;
  for (auto part : split(s, ','))
    if (!trim(part).empty()) out.emplace_back(trim(part));
  if (out.empty()) throw ConfigError("no configurations given");
  return out;
}

ExternalAucs external_for(const Args& a) {
  ExternalAucs out;
  if (!a.han_aucs.empty()) {
    std::ifstream in(a.han_aucs);
    if (!in) throw IoError("cannot open " + a.han_aucs);
    out = read_aucs_csv(in, a.han_aucs);
  }
  if (!a.han_scores.empty()) {
    std::ifstream in(a.han_scores);
    if (!in) throw IoError("cannot open " + a.han_scores);
    for (auto& [k, v] : read_scores_csv(in, a.han_scores)) out[k] = std::move(v);
  }
  return out;
}

void emit(const Args& a, const std::string& content, const std::string& default_name = "") {
  if (a.out.empty()) {
    std::cout << content;
    return;
  }
  fs::path p = a.out;
  if (!default_name.empty() && fs::is_directory(p)) p /= default_name;
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  write_file(p.string(), content);
}

int cmd_synth(const Args& a) {
  SynthConfig cfg;
  cfg.n_sessions = a.n;
  cfg.seed = a.seed;
  cfg.positive_rate = a.positive_rate;
  cfg.signal = SynthSignal::defaults().scaled(a.signal);
  std::cout << fs::absolute(synth_corpus(cfg, a.out)).string() << "\n";
  return 0;
}

int cmd_ingest_check(Args a) {
  if (a.corpus.empty() && !std::getline(std::cin, a.corpus)) throw ConfigError("no corpus manifest given");
  const auto manifest = load_manifest(std::string(trim(a.corpus)));
  std::size_t violations = 0;
  for (const auto& e : manifest.sessions) {
    try {
      load_session(manifest, e);
      load_meta(manifest, e);
    } catch (const ValidationError& err) {
      for (const auto& v : err.violations()) std::cout << v << "\n";
      violations += err.violations().size();
    }
  }
  std::cout << manifest.sessions.size() << " sessions, " << violations << " violations\n";
  return violations == 0 ? 0 : 1;
}

int cmd_features(const Args& a) {
  const auto data = load_experiment_data(load_manifest(a.corpus), lexicon_for(a));
  std::ostringstream os;
  write_features_csv(os, data.features);
  emit(a, os.str(), "features.csv");
  return 0;
}

int cmd_fit_stats(const Args& a) {
  const auto manifest = load_manifest(a.corpus);
  auto sessions = load_corpus(manifest);
  auto vectors = features_for(a, sessions);
  if (!a.fold_assignment.empty()) {
    if (a.fold < 0) throw ConfigError("--fold is required with --fold-assignment");
    const auto folds = FoldAssignment::from_json(read_file(a.fold_assignment), a.fold_assignment);
    std::map<std::string, int> fold_of;
    for (std::size_t i = 0; i < folds.session_ids.size(); ++i) fold_of[folds.session_ids[i]] = folds.fold[i];
    std::vector<Session> ts;
    std::vector<CoarseFeatureVector> tv;
    for (std::size_t i = 0; i < sessions.size(); ++i) {
      auto it = fold_of.find(sessions[i].meta.session_id);
      if (it == fold_of.end()) throw SchemaError("folds", "session " + sessions[i].meta.session_id + " has no fold");
      if (it->second == a.fold) continue;
      ts.push_back(std::move(sessions[i]));
      tv.push_back(vectors.at(i));
    }
    sessions = std::move(ts);
    vectors = std::move(tv);
  }
  emit(a, merge(fit_stats(vectors), fit_turn_stats(sessions)).to_json(), "stats.json");
  return 0;
}

int cmd_weave(const Args& a) {
  if (a.out.empty()) throw ConfigError("--out is required");
  const auto sessions = load_corpus(load_manifest(a.corpus));
  const auto vectors = features_for(a, sessions);
  if (a.stats.empty()) throw ConfigError("--stats is required");
  const auto stats = CorpusStats::from_json(read_file(a.stats), a.stats);
  auto cfg = WeaveConfig::parse(a.config);
  if (a.coarse_only) cfg = cfg.coarse_only();
  fs::create_directories(a.out);
  std::vector<std::vector<std::string>> warnings(sessions.size());
  parallel_for(sessions.size(), [&](std::size_t i) {
    const auto n = weave(sessions[i], vectors.at(i), stats, cfg, &warnings[i]);
    write_narrative(n, fs::path(a.out) / (n.session_id + ".json"));
  });
  for (std::size_t i = 0; i < sessions.size(); ++i)
    for (const auto& w : warnings[i]) std::cerr << w << "\n";
  std::cout << sessions.size() << " narratives written to " << a.out << "\n";
  return 0;
}

int cmd_train_tree(const Args& a) {
  if (a.out.empty()) throw ConfigError("--out is required");
  const auto data = load_experiment_data(load_manifest(a.corpus), lexicon_for(a));
  const auto cfg = WeaveConfig::parse(a.config).coarse_only();
  ExperimentOptions opt;
  opt.configs = {cfg.format()};
  opt.baseline = cfg.format();
  opt.trials = a.trials;
  opt.folds = a.folds;
  opt.seed = a.seed;
  const auto report = run_experiment(data, opt);
  const auto& row = report.rows.front();

  auto stats = fit_stats(data.features);
  const auto model = fit_tree(design_matrix(data, stats, cfg), row.best_params);
  fs::create_directories(a.out);
  write_file((fs::path(a.out) / "tree.json").string(), model.to_json());
  write_file((fs::path(a.out) / "stats.json").string(), stats.to_json());
  std::ostringstream trials;
  report.write_trials_csv(trials);
  write_file((fs::path(a.out) / "trials.csv").string(), trials.str());
  std::cout << cfg.format() << ": mean CV AUC " << format_fixed(row.tree.mean, 3) << " (" << format_fixed(row.tree.sd, 3)
            << "), " << model.split_count() << " splits, depth " << model.depth() << "\n";
  return 0;
}

int cmd_evaluate(const Args& a) {
  const auto data = load_experiment_data(load_manifest(a.corpus), lexicon_for(a));
  ExperimentOptions opt;
  opt.configs = split_configs(a.configs);
  opt.trials = a.trials;
  opt.folds = a.folds;
  opt.seed = a.seed;
  opt.han = external_for(a);
  opt.out = a.out;
  const auto report = run_experiment(data, opt);
  std::cout << report.to_markdown();
  return 0;
}

int cmd_render(const Args& a) {
  if (a.out.empty()) throw ConfigError("--out is required");
  if (a.narrative.empty()) throw ConfigError("--narrative is required");
  std::vector<fs::path> files;
  if (fs::is_directory(a.narrative)) {
    for (const auto& e : fs::directory_iterator(a.narrative))
      if (e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
  } else {
    files.push_back(a.narrative);
  }
  std::map<std::string, AttentionRecord> att;
  if (!a.attentions.empty())
    for (auto& r : parse_attentions(read_file(a.attentions), a.attentions)) att.emplace(r.session_id, std::move(r));
  fs::create_directories(a.out);
  for (const auto& f : files) {
    const auto n = read_narrative(f);
    std::optional<AttentionRecord> rec;
    if (auto it = att.find(n.session_id); it != att.end()) rec = it->second;
    write_file((fs::path(a.out) / (n.session_id + ".html")).string(), render_conversation(n, rec));
    if (rec) write_file((fs::path(a.out) / (n.session_id + ".svg")).string(), render_thumbnail(*rec));
  }
  std::cout << files.size() << " sessions rendered to " << a.out << "\n";
  return 0;
}

int cmd_report(const Args& a) {
  if (a.run.empty()) throw ConfigError("--run is required");
  const auto path = fs::path(a.run) / "report.json";
  auto report = ExperimentReport::from_json(read_file(path.string()), path.string());
  attach_external(report, external_for(a));
  write_file(path.string(), report.to_json());
  write_file((fs::path(a.run) / "report.md").string(), report.to_markdown());
  std::cout << report.to_markdown();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multimodal narrative pipeline"};
  app.require_subcommand(1);
  Args a;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus");
  synth->add_option("--n", a.n, "Number of sessions");
  synth->add_option("--seed", a.seed);
  synth->add_option("--signal", a.signal, "Scale applied to the default class signal (0 for none)");
  synth->add_option("--positive-rate", a.positive_rate)->check(CLI::Range(0.01, 0.99));
  synth->add_option("--out", a.out, "Output directory")->required();

  auto* check = app.add_subcommand("ingest-check", "Validate every session of a corpus");
  check->add_option("--corpus", a.corpus, "manifest.json (read from stdin if omitted)");

  auto* feats = app.add_subcommand("features", "Compute coarse features to CSV");
  feats->add_option("--corpus", a.corpus)->required();
  feats->add_option("--lexicon", a.lexicon);
  feats->add_option("--out", a.out);

  auto* fit = app.add_subcommand("fit-stats", "Fit standardisation stats on training sessions");
  fit->add_option("--corpus", a.corpus)->required();
  fit->add_option("--features", a.features);
  fit->add_option("--fold-assignment", a.fold_assignment, "folds.json; the chosen fold is held out");
  fit->add_option("--fold", a.fold);
  fit->add_option("--lexicon", a.lexicon);
  fit->add_option("--out", a.out);

  auto* weave_cmd = app.add_subcommand("weave", "Write narratives");
  weave_cmd->add_option("--corpus", a.corpus)->required();
  weave_cmd->add_option("--stats", a.stats)->required();
  weave_cmd->add_option("--config", a.config);
  weave_cmd->add_flag("--coarse-only", a.coarse_only);
  weave_cmd->add_option("--features", a.features);
  weave_cmd->add_option("--lexicon", a.lexicon);
  weave_cmd->add_option("--out", a.out)->required();

  auto* train = app.add_subcommand("train-tree", "Tune and fit a tree for one configuration");
  train->add_option("--corpus", a.corpus)->required();
  train->add_option("--config", a.config);
  train->add_option("--seed", a.seed);
  train->add_option("--trials", a.trials)->check(CLI::PositiveNumber);
  train->add_option("--folds", a.folds)->check(CLI::Range(2, 100));
  train->add_option("--lexicon", a.lexicon);
  train->add_option("--out", a.out)->required();

  auto* eval = app.add_subcommand("evaluate", "Cross-validated comparison of configurations");
  eval->add_option("--corpus", a.corpus)->required();
  eval->add_option("--config,--configs", a.configs, "Comma-separated configurations");
  eval->add_option("--seed", a.seed);
  eval->add_option("--trials", a.trials)->check(CLI::PositiveNumber);
  eval->add_option("--folds", a.folds)->check(CLI::Range(2, 100));
  eval->add_option("--han-aucs", a.han_aucs);
  eval->add_option("--han-scores", a.han_scores);
  eval->add_option("--lexicon", a.lexicon);
  eval->add_option("--out", a.out);

  auto* render = app.add_subcommand("render", "HTML and SVG views of narratives");
  render->add_option("--narrative", a.narrative, "Narrative file or directory")->required();
  render->add_option("--attentions", a.attentions);
  render->add_option("--out", a.out)->required();

  auto* report = app.add_subcommand("report", "Rebuild a report with external AUCs");
  report->add_option("--run", a.run, "Directory holding report.json")->required();
  report->add_option("--han-aucs", a.han_aucs);
  report->add_option("--han-scores", a.han_scores);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*synth) return cmd_synth(a);
    if (*check) return cmd_ingest_check(a);
    if (*feats) return cmd_features(a);
    if (*fit) return cmd_fit_stats(a);
    if (*weave_cmd) return cmd_weave(a);
    if (*train) return cmd_train_tree(a);
    if (*eval) return cmd_evaluate(a);
    if (*render) return cmd_render(a);
    if (*report) return cmd_report(a);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
