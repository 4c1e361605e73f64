#pragma once

// Rank AUC, stratified folds, paired fold comparisons.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace monah {

struct ScoredLabel {
  double score = 0.0;
  bool positive = false;
};

/// Mann-Whitney AUC with tied scores counted as half. Throws DegenerateLabels.
double auc(std::span<const ScoredLabel> scored);
double auc(std::span<const double> scores, const std::vector<bool>& labels);

struct FoldAssignment {
  int k = 5;
  std::uint64_t seed = 0;
  std::vector<std::string> session_ids;
  std::vector<int> fold;  // parallel to session_ids

  std::vector<std::size_t> test_indices(int f) const;
  std::vector<std::size_t> train_indices(int f) const;
  std::string to_json() const;
  static FoldAssignment from_json(const std::string& text, const std::string& source = "folds.json");

  friend bool operator==(const FoldAssignment&, const FoldAssignment&) = default;
};

/// Shuffles each class with `seed` and deals it round-robin; negatives continue
/// where the positives stopped. Throws InsufficientClassCount.
FoldAssignment stratified_folds(const std::vector<std::string>& session_ids, const std::vector<bool>& labels,
                                int k = 5, std::uint64_t seed = 0);

enum class Tail { One, Two };

struct Comparison {
  Tail tail = Tail::Two;
  std::size_t n = 0;
  double mean_diff = 0.0;
  double sd_diff = 0.0;          // sample sd
  std::optional<double> t;       // absent when the difference is a nonzero constant
  std::optional<double> p;
  double ci_low = 0.0;
  double ci_high = 0.0;

  /// "***" p<0.01, "**" p<0.05, "*" p<0.10, "" otherwise, "n/a" without a p-value.
  std::string marker(char symbol = '*') const;
};

/// Paired t-test on a - b. One-tailed tests a > b. Throws LengthMismatch.
Comparison paired_compare(std::span<const double> a, std::span<const double> b, Tail tail);

double mean(std::span<const double> xs);
double sample_sd(std::span<const double> xs);

void write_labels_csv(std::ostream& os, const std::vector<std::string>& session_ids, const std::vector<bool>& labels);

}  // namespace monah
