#include "monah/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include <json.hpp>

#include "monah/errors.hpp"
#include "monah/util.hpp"

namespace monah {

int TreeParams::effective_min_bucket() const {
  if (min_bucket > 0) return min_bucket;
  return std::max(1, static_cast<int>(std::lround(min_split / 3.0)));
}

int TreeModel::depth() const {
  int d = 0;
  for (const auto& n : nodes) d = std::max(d, n.depth);
  return d;
}

std::size_t TreeModel::split_count() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return !n.is_leaf(); }));
}

namespace {

/// n * Gini impurity, from class counts.
double weighted_gini(double pos, double n) {
  if (n <= 0) return 0.0;
  const double neg = n - pos;
  return n - (pos * pos + neg * neg) / n;
}

struct Split {
  int feature = -1;
  double threshold = 0.0;
  bool absent_left = true;
  double gain = 0.0;
};

class Builder {
 public:
  Builder(const Dataset& data, const TreeParams& params) : data_(data), params_(params) {}

  TreeModel build() {
    std::vector<std::size_t> all(data_.size());
    std::iota(all.begin(), all.end(), 0);
    std::size_t pos = 0;
    for (auto i : all) pos += data_.labels[i] ? 1 : 0;
    root_impurity_ = weighted_gini(static_cast<double>(pos), static_cast<double>(all.size()));
    model_.feature_names = data_.feature_names;
    model_.params = params_;
    grow(all, 0);
    return std::move(model_);
  }

 private:
  int grow(const std::vector<std::size_t>& idx, int depth) {
    TreeNode node;
    node.n = idx.size();
    for (auto i : idx) node.positives += data_.labels[i] ? 1 : 0;
    node.probability = static_cast<double>(node.positives) / static_cast<double>(node.n);
    node.depth = depth;
    const int id = static_cast<int>(model_.nodes.size());
    model_.nodes.push_back(node);

    const bool pure = node.positives == 0 || node.positives == node.n;
    if (pure || depth >= params_.max_depth || node.n < static_cast<std::size_t>(params_.min_split)) return id;
    const auto split = best_split(idx, node.positives);
    if (!split || root_impurity_ <= 0.0 || split->gain / root_impurity_ < params_.cp) return id;

    std::vector<std::size_t> left, right;
    for (auto i : idx) {
      const double x = data_.rows[i][static_cast<std::size_t>(split->feature)];
      const bool go_left = std::isnan(x) ? split->absent_left : x <= split->threshold;
      (go_left ? left : right).push_back(i);
    }
    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    auto& self = model_.nodes[static_cast<std::size_t>(id)];
    self.feature = split->feature;
    self.threshold = split->threshold;
    self.absent_left = split->absent_left;
    self.left = l;
    self.right = r;
    return id;
  }

  std::optional<Split> best_split(const std::vector<std::size_t>& idx, std::size_t positives) const {
    const double n = static_cast<double>(idx.size());
    const double parent = weighted_gini(static_cast<double>(positives), n);
    const auto min_bucket = static_cast<double>(params_.effective_min_bucket());
    std::optional<Split> best;
    std::vector<std::pair<double, bool>> xs;
    for (std::size_t f = 0; f < data_.feature_names.size(); ++f) {
      xs.clear();
      double absent_n = 0, absent_pos = 0;
      for (auto i : idx) {
        const double x = data_.rows[i][f];
        if (std::isnan(x)) {
          absent_n += 1;
          absent_pos += data_.labels[i] ? 1 : 0;
        } else {
          xs.emplace_back(x, data_.labels[i]);
        }
      }
      std::sort(xs.begin(), xs.end());
      double left_n = 0, left_pos = 0;
      const double present_n = static_cast<double>(xs.size());
      for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
        left_n += 1;
        left_pos += xs[k].second ? 1 : 0;
        if (xs[k].first == xs[k + 1].first) continue;
        double thr = 0.5 * (xs[k].first + xs[k + 1].first);
        if (thr >= xs[k + 1].first) thr = xs[k].first;
        const bool absent_left = left_n >= present_n - left_n;
        const double ln = left_n + (absent_left ? absent_n : 0);
        const double lp = left_pos + (absent_left ? absent_pos : 0);
        const double rn = n - ln;
        const double rp = static_cast<double>(positives) - lp;
        if (ln < min_bucket || rn < min_bucket) continue;
        const double gain = parent - weighted_gini(lp, ln) - weighted_gini(rp, rn);
        if (gain <= 0.0) continue;
        if (!best || gain > best->gain + 1e-9) {
          best = Split{static_cast<int>(f), thr, absent_left, gain};
        }
      }
    }
    return best;
  }

  const Dataset& data_;
  const TreeParams& params_;
  TreeModel model_;
  double root_impurity_ = 0.0;
};

}  // namespace

TreeModel fit_tree(const Dataset& data, const TreeParams& params) {
  if (data.rows.empty()) throw EmptyData("fit_tree: no training rows");
  if (data.rows.size() != data.labels.size()) throw LengthMismatch("fit_tree: rows and labels differ in length");
  for (const auto& r : data.rows)
    if (r.size() != data.feature_names.size()) throw LengthMismatch("fit_tree: row width differs from feature count");
  return Builder(data, params).build();
}

double predict_proba(const TreeModel& model, std::span<const double> row) {
  if (model.nodes.empty()) throw EmptyData("predict_proba: empty model");
  std::size_t at = 0;
  while (!model.nodes[at].is_leaf()) {
    const auto& node = model.nodes[at];
    const auto f = static_cast<std::size_t>(node.feature);
    if (f >= row.size()) throw UnknownFeature(model.feature_names.at(f));
    const double x = row[f];
    const bool left = std::isnan(x) ? node.absent_left : x <= node.threshold;
    at = static_cast<std::size_t>(left ? node.left : node.right);
  }
  return model.nodes[at].probability;
}

double predict_proba(const TreeModel& model, const std::map<std::string, std::optional<double>>& x) {
  std::vector<double> row(model.feature_names.size(), std::nan(""));
  for (const auto& node : model.nodes) {
    if (node.is_leaf()) continue;
    const auto& name = model.feature_names[static_cast<std::size_t>(node.feature)];
    auto it = x.find(name);
    if (it == x.end()) throw UnknownFeature(name);
    if (it->second) row[static_cast<std::size_t>(node.feature)] = *it->second;
  }
  return predict_proba(model, row);
}

std::string TreeModel::to_json() const {
  nlohmann::ordered_json nodes_json = nlohmann::ordered_json::array();
  for (const auto& n : nodes) {
    nlohmann::ordered_json j = {{"depth", n.depth}, {"n", n.n}, {"positives", n.positives}, {"probability", n.probability}};
    if (!n.is_leaf()) {
      j["feature"] = feature_names[static_cast<std::size_t>(n.feature)];
      j["threshold"] = n.threshold;
      j["absent"] = n.absent_left ? "left" : "right";
      j["left"] = n.left;
      j["right"] = n.right;
    }
    nodes_json.push_back(std::move(j));
  }
  nlohmann::ordered_json doc = {
      {"params", {{"cp", params.cp}, {"max_depth", params.max_depth}, {"min_split", params.min_split},
                  {"min_bucket", params.effective_min_bucket()}, {"seed", params.seed}}},
      {"features", feature_names},
      {"nodes", nodes_json}};
  return doc.dump(2) + "\n";
}

TreeModel TreeModel::from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("tree.json", 1, e.what());
  }
  TreeModel m;
  try {
    const auto& p = doc.at("params");
    m.params.cp = p.at("cp").get<double>();
    m.params.max_depth = p.at("max_depth").get<int>();
    m.params.min_split = p.at("min_split").get<int>();
    m.params.min_bucket = p.at("min_bucket").get<int>();
    m.params.seed = p.at("seed").get<std::uint64_t>();
    m.feature_names = doc.at("features").get<std::vector<std::string>>();
    for (const auto& j : doc.at("nodes")) {
      TreeNode n;
      n.depth = j.at("depth").get<int>();
      n.n = j.at("n").get<std::size_t>();
      n.positives = j.at("positives").get<std::size_t>();
      n.probability = j.at("probability").get<double>();
      if (j.contains("feature")) {
        const auto name = j.at("feature").get<std::string>();
        auto it = std::find(m.feature_names.begin(), m.feature_names.end(), name);
        if (it == m.feature_names.end()) throw UnknownFeature(name);
        n.feature = static_cast<int>(it - m.feature_names.begin());
        n.threshold = j.at("threshold").get<double>();
        n.absent_left = j.at("absent").get<std::string>() == "left";
        n.left = j.at("left").get<int>();
        n.right = j.at("right").get<int>();
      }
      m.nodes.push_back(n);
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("tree", std::string("tree.json: ") + e.what());
  }
  return m;
}

TreeParams sample_tree_params(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> log_cp(std::log(1e-9), std::log(1e-7));
  std::uniform_int_distribution<int> depth(1, 20);
  std::uniform_int_distribution<int> split(20, 80);
  TreeParams p;
  p.cp = std::exp(log_cp(rng));
  p.max_depth = depth(rng);
  p.min_split = split(rng);
  p.seed = rng();
  return p;
}

std::vector<double> SearchResult::cumulative_best() const {
  std::vector<double> out;
  double best = -1.0;
  for (const auto& t : trials) {
    best = std::max(best, t.mean_auc);
    out.push_back(best);
  }
  return out;
}

SearchResult random_search(const FoldEvaluator& evaluate, std::size_t trials, std::uint64_t seed) {
  if (trials < 1) throw ConfigError("random_search: trials must be >= 1");
  std::mt19937_64 rng(seed);
  SearchResult result;
  for (std::size_t t = 0; t < trials; ++t) {
    TrialRecord rec;
    rec.trial = t;
    rec.params = sample_tree_params(rng);
    rec.fold_aucs = evaluate(rec.params);
    if (rec.fold_aucs.empty()) throw EmptyData("random_search: evaluator returned no folds");
    const auto k = static_cast<double>(rec.fold_aucs.size());
    rec.mean_auc = std::accumulate(rec.fold_aucs.begin(), rec.fold_aucs.end(), 0.0) / k;
    double ss = 0.0;
    for (double a : rec.fold_aucs) ss += (a - rec.mean_auc) * (a - rec.mean_auc);
    rec.sd_auc = rec.fold_aucs.size() > 1 ? std::sqrt(ss / (k - 1)) : 0.0;
    if (t == 0 || rec.mean_auc > result.trials[result.best_trial].mean_auc) result.best_trial = t;
    result.trials.push_back(std::move(rec));
  }
  return result;
}

void write_trials_csv(std::ostream& os, const SearchResult& result, const std::string& config) {
  const auto best = result.cumulative_best();
  for (std::size_t i = 0; i < result.trials.size(); ++i) {
    const auto& t = result.trials[i];
    os << config << ',' << t.trial + 1 << ',' << format_double(t.params.cp) << ',' << t.params.max_depth << ','
       << t.params.min_split << ',' << format_double(t.mean_auc) << ',' << format_double(t.sd_auc) << ','
       << format_double(best[i]) << '\n';
  }
}

}  // namespace monah
