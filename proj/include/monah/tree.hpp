#pragma once

// CART classification tree (Gini) with rpart-style cp / maxdepth / minsplit
// controls, plus random-search tuning over those controls.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace monah {

/// Row-major design matrix. NaN marks an absent value.
struct Dataset {
  std::vector<std::string> feature_names;
  std::vector<std::vector<double>> rows;
  std::vector<bool> labels;

  std::size_t size() const noexcept { return rows.size(); }
};

struct TreeParams {
  double cp = 1e-8;
  int max_depth = 20;
  int min_split = 20;
  int min_bucket = 0;  // 0: derived as round(min_split / 3), at least 1
  std::uint64_t seed = 0;

  int effective_min_bucket() const;
  friend bool operator==(const TreeParams&, const TreeParams&) = default;
};

struct TreeNode {
  int feature = -1;  // -1 for leaves
  double threshold = 0.0;  // x <= threshold goes left
  int left = -1;
  int right = -1;
  bool absent_left = true;  // routing for absent values (majority branch at fit time)
  std::size_t n = 0;
  std::size_t positives = 0;
  double probability = 0.0;
  int depth = 0;

  bool is_leaf() const noexcept { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct TreeModel {
  std::vector<std::string> feature_names;
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  TreeParams params;

  int depth() const;
  std::size_t split_count() const;
  std::string to_json() const;
  static TreeModel from_json(const std::string& text);

  friend bool operator==(const TreeModel&, const TreeModel&) = default;
};

/// Greedy Gini splitting. A split is kept when its impurity decrease relative
/// to the root's total impurity is at least cp. Throws EmptyData.
TreeModel fit_tree(const Dataset& data, const TreeParams& params);

/// Leaf positive fraction for a row aligned with model.feature_names.
double predict_proba(const TreeModel& model, std::span<const double> row);
/// Named lookup; throws UnknownFeature if a split feature is missing from `x`.
double predict_proba(const TreeModel& model, const std::map<std::string, std::optional<double>>& x);

/// Draws cp log-uniform in [1e-9, 1e-7], max_depth in [1, 20], min_split in [20, 80].
TreeParams sample_tree_params(std::mt19937_64& rng);

struct TrialRecord {
  std::size_t trial = 0;
  TreeParams params;
  std::vector<double> fold_aucs;
  double mean_auc = 0.0;
  double sd_auc = 0.0;  // sample sd across folds
};

struct SearchResult {
  std::size_t best_trial = 0;
  std::vector<TrialRecord> trials;

  const TrialRecord& best() const { return trials.at(best_trial); }
  /// Best mean AUC among the first N trials, for N = 1..trials.
  std::vector<double> cumulative_best() const;
};

using FoldEvaluator = std::function<std::vector<double>(const TreeParams&)>;

/// Samples `trials` parameter sets and keeps the first with the highest mean
/// fold AUC. Throws ConfigError when trials < 1.
SearchResult random_search(const FoldEvaluator& evaluate, std::size_t trials, std::uint64_t seed);

void write_trials_csv(std::ostream& os, const SearchResult& result, const std::string& config = {});

}  // namespace monah
