#include <doctest.h>

#include <cmath>
#include <sstream>

#include "monah/errors.hpp"
#include "monah/eval.hpp"
#include "monah/tree.hpp"
#include "oracles.hpp"

using namespace monah;

namespace {

Dataset separable_1d() {
  Dataset d;
  d.feature_names = {"x"};
  for (int i = -10; i <= 10; ++i) {
    if (i == 0) continue;
    d.rows.push_back({static_cast<double>(i)});
    d.labels.push_back(i > 0);
  }
  return d;
}

Dataset noisy(std::uint64_t seed, std::size_t n, std::size_t p) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Dataset d;
  for (std::size_t f = 0; f < p; ++f) d.feature_names.push_back("f" + std::to_string(f));
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> r(p);
    for (auto& x : r) x = g(rng);
    d.labels.push_back(r[0] + 0.5 * r[1] + g(rng) > 0);
    d.rows.push_back(std::move(r));
  }
  return d;
}

TreeParams loose() {
  TreeParams p;
  p.cp = 0.0;
  p.max_depth = 20;
  p.min_split = 2;
  p.min_bucket = 1;
  return p;
}

}  // namespace

TEST_CASE("separable data with depth budget 1") {
  const auto d = separable_1d();
  auto p = loose();
  p.max_depth = 1;
  const auto m = fit_tree(d, p);
  CHECK(m.split_count() == 1);
  CHECK(m.nodes[0].threshold > -1.0);
  CHECK(m.nodes[0].threshold < 1.0);
  std::vector<double> scores;
  for (const auto& r : d.rows) scores.push_back(predict_proba(m, r));
  CHECK(auc(scores, d.labels) == 1.0);
  const std::vector<double> far{5.0};
  CHECK(predict_proba(m, far) == 1.0);
}

TEST_CASE("stopping rules") {
  auto d = separable_1d();
  d.rows.resize(19);
  d.labels.resize(19);
  auto p = loose();
  p.min_split = 20;
  CHECK(fit_tree(d, p).nodes.size() == 1);

  Dataset pure;
  pure.feature_names = {"x"};
  for (int i = 0; i < 30; ++i) {
    pure.rows.push_back({static_cast<double>(i)});
    pure.labels.push_back(true);
  }
  CHECK(fit_tree(pure, loose()).nodes.size() == 1);

  CHECK_THROWS_AS(fit_tree(Dataset{}, loose()), EmptyData);
}

TEST_CASE("single leaf predicts the base rate") {
  Dataset d;
  d.feature_names = {"x"};
  for (int i = 0; i < 10; ++i) {
    d.rows.push_back({1.0});
    d.labels.push_back(i < 3);
  }
  const auto m = fit_tree(d, loose());
  REQUIRE(m.nodes.size() == 1);
  const std::vector<double> any{42.0};
  CHECK(predict_proba(m, any) == doctest::Approx(0.3));
}

TEST_CASE("absent values follow the recorded majority branch") {
  Dataset d;
  d.feature_names = {"x"};
  // 7 negatives on the left, 3 positives on the right, 2 absent positives.
  for (int i = 0; i < 7; ++i) d.rows.push_back({static_cast<double>(i)}), d.labels.push_back(false);
  for (int i = 0; i < 3; ++i) d.rows.push_back({10.0 + i}), d.labels.push_back(true);
  for (int i = 0; i < 2; ++i) d.rows.push_back({std::nan("")}), d.labels.push_back(true);
  auto p = loose();
  p.max_depth = 1;
  const auto m = fit_tree(d, p);
  REQUIRE_FALSE(m.nodes[0].is_leaf());
  CHECK(m.nodes[0].absent_left);
  const auto& left = m.nodes[static_cast<std::size_t>(m.nodes[0].left)];
  const std::vector<double> missing{std::nan("")};
  CHECK(predict_proba(m, missing) == left.probability);
  CHECK(left.n == 9);

  std::map<std::string, std::optional<double>> named{{"x", std::nullopt}};
  CHECK(predict_proba(m, named) == left.probability);
  std::map<std::string, std::optional<double>> unnamed{{"y", 1.0}};
  CHECK_THROWS_AS(predict_proba(m, unnamed), UnknownFeature);
}

TEST_CASE("randomized fits respect depth and min_split") {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 30; ++k) {
    const auto d = noisy(100 + k, 120, 4);
    auto p = sample_tree_params(rng);
    const auto m = fit_tree(d, p);
    CHECK(m.depth() <= p.max_depth);
    for (const auto& n : m.nodes) {
      if (n.is_leaf()) continue;
      CHECK(n.n >= static_cast<std::size_t>(p.min_split));
      CHECK(m.nodes[static_cast<std::size_t>(n.left)].n >= static_cast<std::size_t>(p.effective_min_bucket()));
      CHECK(m.nodes[static_cast<std::size_t>(n.right)].n >= static_cast<std::size_t>(p.effective_min_bucket()));
      CHECK(m.nodes[static_cast<std::size_t>(n.left)].n + m.nodes[static_cast<std::size_t>(n.right)].n == n.n);
    }
  }
}

TEST_CASE("larger cp never adds splits") {
  const auto d = noisy(7, 300, 5);
  auto p = loose();
  std::size_t prev = SIZE_MAX;
  for (double cp : {0.0, 1e-4, 1e-3, 1e-2, 3e-2, 1e-1, 0.5}) {
    p.cp = cp;
    const auto s = fit_tree(d, p).split_count();
    CHECK(s <= prev);
    prev = s;
  }
  CHECK(prev == 0);
}

TEST_CASE("first split matches exhaustive search") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> size(4, 12), feats(1, 3);
  int checked = 0;
  for (int k = 0; k < 100; ++k) {
    Dataset d;
    const int p = feats(rng), n = size(rng);
    for (int f = 0; f < p; ++f) d.feature_names.push_back("f" + std::to_string(f));
    for (int i = 0; i < n; ++i) {
      std::vector<double> r(static_cast<std::size_t>(p));
      for (auto& x : r) x = u(rng);
      d.rows.push_back(r);
      d.labels.push_back(u(rng) < 0.5);
    }
    const auto ref = oracle::best_gini_split(d.rows, d.labels);
    const auto m = fit_tree(d, loose());
    if (ref.feature < 0) continue;
    const double root = n * oracle::gini(static_cast<std::size_t>(std::count(d.labels.begin(), d.labels.end(), true)),
                                         static_cast<std::size_t>(n));
    if (root - ref.child_impurity <= 1e-12) {
      CHECK(m.nodes[0].is_leaf());
      continue;
    }
    REQUIRE_FALSE(m.nodes[0].is_leaf());
    const auto& l = m.nodes[static_cast<std::size_t>(m.nodes[0].left)];
    const auto& r = m.nodes[static_cast<std::size_t>(m.nodes[0].right)];
    const double got = l.n * oracle::gini(l.positives, l.n) + r.n * oracle::gini(r.positives, r.n);
    CHECK(got == doctest::Approx(ref.child_impurity).epsilon(1e-12));
    if (ref.maximisers == 1) {
      CHECK(m.nodes[0].feature == ref.feature);
      CHECK(m.nodes[0].threshold == ref.threshold);
    }
    ++checked;
  }
  CHECK(checked > 50);
}

TEST_CASE("model json round-trips") {
  const auto d = noisy(9, 200, 3);
  auto p = loose();
  p.max_depth = 4;
  const auto m = fit_tree(d, p);
  const auto back = TreeModel::from_json(m.to_json());
  CHECK(back.nodes == m.nodes);
  CHECK(back.feature_names == m.feature_names);
  CHECK(back.to_json() == m.to_json());
}

TEST_CASE("parameter sampling ranges") {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000; ++i) {
    const auto p = sample_tree_params(rng);
    CHECK(p.cp >= 1e-9);
    CHECK(p.cp <= 1e-7);
    CHECK(p.max_depth >= 1);
    CHECK(p.max_depth <= 20);
    CHECK(p.min_split >= 20);
    CHECK(p.min_split <= 80);
  }
  TreeParams q;
  q.min_split = 20;
  CHECK(q.effective_min_bucket() == 7);
  q.min_split = 1;
  CHECK(q.effective_min_bucket() == 1);
}

TEST_CASE("random search") {
  int calls = 0;
  const FoldEvaluator eval = [&](const TreeParams& p) {
    ++calls;
    return std::vector<double>{0.5 + p.max_depth / 100.0, 0.5};
  };
  const auto one = random_search(eval, 1, 4);
  CHECK(one.best_trial == 0);
  CHECK(calls == 1);

  const auto a = random_search(eval, 20, 4);
  const auto b = random_search(eval, 20, 4);
  CHECK(a.best().params == b.best().params);
  CHECK(a.best_trial == b.best_trial);
  const auto curve = a.cumulative_best();
  REQUIRE(curve.size() == 20);
  for (std::size_t i = 1; i < curve.size(); ++i) CHECK(curve[i] >= curve[i - 1]);
  CHECK(curve.back() == a.best().mean_auc);
  for (std::size_t i = 0; i < a.best_trial; ++i) CHECK(a.trials[i].mean_auc < a.best().mean_auc);

  const auto tied = random_search([](const TreeParams&) { return std::vector<double>{0.6}; }, 5, 1);
  CHECK(tied.best_trial == 0);
  CHECK_THROWS_AS(random_search(eval, 0, 1), ConfigError);

  std::ostringstream os;
  write_trials_csv(os, a, "DH");
  CHECK(os.str().rfind("DH,1,", 0) == 0);
}
