#include "monah/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

#include "monah/errors.hpp"

namespace monah {

double auc(std::span<const ScoredLabel> scored) {
  std::vector<ScoredLabel> s(scored.begin(), scored.end());
  std::sort(s.begin(), s.end(), [](const ScoredLabel& a, const ScoredLabel& b) { return a.score < b.score; });
  double pos = 0, neg = 0, rank_sum = 0;
  for (std::size_t i = 0; i < s.size();) {
    std::size_t j = i;
    while (j < s.size() && s[j].score == s[i].score) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t q = i; q < j; ++q) {
      if (s[q].positive) {
        pos += 1;
        rank_sum += avg_rank;
      } else {
        neg += 1;
      }
    }
    i = j;
  }
  if (pos == 0 || neg == 0) throw DegenerateLabels("auc: need at least one positive and one negative");
  return (rank_sum - pos * (pos + 1) / 2) / (pos * neg);
}

double auc(std::span<const double> scores, const std::vector<bool>& labels) {
  if (scores.size() != labels.size()) throw LengthMismatch("auc: scores and labels differ in length");
  std::vector<ScoredLabel> s(scores.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = {scores[i], labels[i]};
  return auc(s);
}

std::vector<std::size_t> FoldAssignment::test_indices(int f) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold.size(); ++i)
    if (fold[i] == f) out.push_back(i);
  return out;
}

std::vector<std::size_t> FoldAssignment::train_indices(int f) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold.size(); ++i)
    if (fold[i] != f) out.push_back(i);
  return out;
}

std::string FoldAssignment::to_json() const {
  nlohmann::ordered_json folds = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < session_ids.size(); ++i)
    folds.push_back({{"session_id", session_ids[i]}, {"fold", fold[i]}});
  nlohmann::ordered_json doc = {{"k", k}, {"seed", seed}, {"folds", folds}};
  return doc.dump(2) + "\n";
}

FoldAssignment FoldAssignment::from_json(const std::string& text, const std::string& source) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(source, 1, e.what());
  }
  FoldAssignment fa;
  try {
    fa.k = doc.at("k").get<int>();
    fa.seed = doc.at("seed").get<std::uint64_t>();
    for (const auto& j : doc.at("folds")) {
      fa.session_ids.push_back(j.at("session_id").get<std::string>());
      const int f = j.at("fold").get<int>();
      if (f < 0 || f >= fa.k) throw SchemaError("fold", source + ": fold index out of range");
      fa.fold.push_back(f);
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("folds", source + ": " + e.what());
  }
  return fa;
}

FoldAssignment stratified_folds(const std::vector<std::string>& session_ids, const std::vector<bool>& labels, int k,
                                std::uint64_t seed) {
  if (session_ids.size() != labels.size()) throw LengthMismatch("stratified_folds: ids and labels differ in length");
  if (k < 2) throw ConfigError("stratified_folds: k must be >= 2");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] ? pos : neg).push_back(i);
  const auto ku = static_cast<std::size_t>(k);
  if (pos.size() < ku || neg.size() < ku)
    throw InsufficientClassCount("stratified_folds: each class needs at least " + std::to_string(k) + " sessions (" +
                                 std::to_string(pos.size()) + " positive, " + std::to_string(neg.size()) +
                                 " negative)");
  std::mt19937_64 rng(seed);
  std::shuffle(pos.begin(), pos.end(), rng);
  std::shuffle(neg.begin(), neg.end(), rng);
  FoldAssignment fa;
  fa.k = k;
  fa.seed = seed;
  fa.session_ids = session_ids;
  fa.fold.assign(session_ids.size(), 0);
  std::size_t slot = 0;
  for (auto i : pos) fa.fold[i] = static_cast<int>(slot++ % ku);
  for (auto i : neg) fa.fold[i] = static_cast<int>(slot++ % ku);
  return fa;
}

double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sample_sd(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

std::string Comparison::marker(char symbol) const {
  if (!p) return "n/a";
  if (*p < 0.01) return std::string(3, symbol);
  if (*p < 0.05) return std::string(2, symbol);
  if (*p < 0.10) return std::string(1, symbol);
  return "";
}

Comparison paired_compare(std::span<const double> a, std::span<const double> b, Tail tail) {
  if (a.size() != b.size()) throw LengthMismatch("paired_compare: fold AUC lists differ in length");
  if (a.size() < 2) throw InsufficientData("paired_compare: need at least two paired folds");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = a[i] - b[i];
  Comparison c;
  c.tail = tail;
  c.n = d.size();
  c.mean_diff = mean(d);
  c.sd_diff = sample_sd(d);
  const bool constant = std::all_of(d.begin(), d.end(), [&](double x) { return x == d[0]; });
  if (constant) {
    c.mean_diff = d[0];
    c.sd_diff = 0.0;
    c.ci_low = c.ci_high = d[0];
    if (d[0] == 0.0) {
      c.t = 0.0;
      c.p = 1.0;
    }
    return c;
  }
  const double n = static_cast<double>(c.n);
  const double se = c.sd_diff / std::sqrt(n);
  const boost::math::students_t dist(n - 1);
  const double t = c.mean_diff / se;
  c.t = t;
  c.p = tail == Tail::One ? boost::math::cdf(boost::math::complement(dist, t))
                          : 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
  const double q = boost::math::quantile(dist, 0.975);
  c.ci_low = c.mean_diff - q * se;
  c.ci_high = c.mean_diff + q * se;
  return c;
}

void write_labels_csv(std::ostream& os, const std::vector<std::string>& session_ids, const std::vector<bool>& labels) {
  os << "session_id,label\n";
  for (std::size_t i = 0; i < session_ids.size(); ++i) os << session_ids[i] << ',' << (labels.at(i) ? 1 : 0) << '\n';
}

}  // namespace monah
