#pragma once

// Cross-validated comparison of input configurations: tree random search per
// configuration, optional external narrative-model AUCs, and the report.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "monah/eval.hpp"
#include "monah/features.hpp"
#include "monah/ingest.hpp"
#include "monah/narrative.hpp"
#include "monah/tree.hpp"

namespace monah {

struct ExperimentData {
  std::vector<Session> sessions;  // may be empty when only features are known
  std::vector<CoarseFeatureVector> features;
  std::vector<bool> labels;

  std::vector<std::string> session_ids() const;
};

ExperimentData load_experiment_data(const CorpusManifest& manifest, const Lexicon& lexicon = Lexicon::builtin());
ExperimentData experiment_data(std::vector<Session> sessions, const Lexicon& lexicon = Lexicon::builtin());

/// Fold AUCs keyed by canonical configuration string.
using ExternalAucs = std::map<std::string, std::vector<double>>;

/// aucs.csv: config,fold,auc
ExternalAucs read_aucs_csv(std::istream& is, const std::string& source = "aucs.csv");
/// scores.csv: config,fold,session_id,probability,label; AUC computed per fold.
ExternalAucs read_scores_csv(std::istream& is, const std::string& source = "scores.csv");

struct FoldScores {
  std::vector<double> fold_aucs;
  double mean = 0.0;
  double sd = 0.0;  // sample sd

  static FoldScores of(std::vector<double> aucs);
};

struct ConfigResult {
  std::string config;  // as given
  SearchResult search;  // empty when loaded from report.json
  std::size_t best_trial = 0;
  TreeParams best_params;
  FoldScores tree;
  std::optional<Comparison> tree_vs_baseline;  // one-tailed
  std::optional<FoldScores> han_coarse;
  std::optional<Comparison> han_coarse_vs_baseline;
  std::optional<Comparison> han_coarse_vs_tree;  // two-tailed
  std::optional<FoldScores> han_fine;
  std::optional<Comparison> han_fine_vs_baseline;
  std::optional<Comparison> han_fine_vs_coarse;  // two-tailed
};

struct ExperimentOptions {
  std::vector<std::string> configs{"D'A'P'", "H", "DH", "PAH", "APMH", "APSMH", "DAPSMH"};
  std::string baseline = "D'A'P'";
  std::size_t trials = 20;
  int folds = 5;
  std::uint64_t seed = 1;
  ExternalAucs han;
  std::filesystem::path out;  // empty: nothing written
  std::string narrative_config = "DAPSMH-vpa";
};

struct ExperimentReport {
  std::uint64_t seed = 0;
  std::size_t trials = 0;
  std::string baseline;
  FoldAssignment folds;
  std::vector<ConfigResult> rows;

  std::string to_json() const;
  static ExperimentReport from_json(const std::string& text, const std::string& source = "report.json");
  std::string to_markdown() const;
  void write_curves_csv(std::ostream& os) const;
  void write_trials_csv(std::ostream& os) const;
};

/// Coarse and turn-level stats from the training folds of `fold` only.
CorpusStats fold_stats(const ExperimentData& data, const FoldAssignment& folds, int fold);

/// z-transformed design matrix for the registry entries enabled by `config`.
Dataset design_matrix(const ExperimentData& data, const CorpusStats& stats, const WeaveConfig& config,
                      const FeatureRegistry& reg = FeatureRegistry::builtin());

/// Fills the narrative-model columns and every comparison from current fold AUCs.
void attach_external(ExperimentReport& report, const ExternalAucs& han);

ExperimentReport run_experiment(const ExperimentData& data, const ExperimentOptions& options);

/// Writes report.json, report.md, trials.csv, curves.csv, folds.json and labels.csv into `dir`.
void write_report(const ExperimentReport& report, const ExperimentData& data, const std::filesystem::path& dir);

}  // namespace monah
