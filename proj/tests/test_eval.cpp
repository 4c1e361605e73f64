#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "monah/errors.hpp"
#include "monah/eval.hpp"
#include "oracles.hpp"

using namespace monah;

namespace {

std::vector<std::string> ids(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("s" + std::to_string(i));
  return out;
}

std::vector<bool> labels(std::size_t pos, std::size_t neg) {
  std::vector<bool> out(pos, true);
  out.resize(pos + neg, false);
  return out;
}

}  // namespace

TEST_CASE("auc examples") {
  const std::vector<ScoredLabel> perfect{{0.9, true}, {0.8, true}, {0.1, false}, {0.2, false}};
  CHECK(auc(perfect) == 1.0);
  const std::vector<ScoredLabel> three_of_four{{0.8, true}, {0.3, true}, {0.5, false}, {0.1, false}};
  CHECK(auc(three_of_four) == 0.75);
  const std::vector<ScoredLabel> ties{{0.4, true}, {0.4, false}, {0.4, true}, {0.4, false}};
  CHECK(auc(ties) == 0.5);
  const std::vector<ScoredLabel> one_class{{0.4, true}, {0.5, true}};
  CHECK_THROWS_AS(auc(one_class), DegenerateLabels);
  const std::vector<double> s{0.1, 0.2};
  CHECK_THROWS_AS(auc(s, std::vector<bool>{true}), LengthMismatch);
}

TEST_CASE("auc agrees with the pairwise count") {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> size(2, 30), level(0, 5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const int n = size(rng);
    std::vector<double> scores;
    std::vector<bool> y;
    for (int i = 0; i < n; ++i) {
      scores.push_back(k % 2 ? level(rng) / 5.0 : u(rng));
      y.push_back(i == 0 ? true : i == 1 ? false : u(rng) < 0.4);
    }
    CHECK(std::abs(auc(scores, y) - oracle::pairwise_auc(scores, y)) <= 1e-12);
  }
}

TEST_CASE("balanced classes split evenly") {
  const auto f = stratified_folds(ids(20), labels(10, 10), 5, 3);
  for (int k = 0; k < 5; ++k) {
    int pos = 0, neg = 0;
    for (auto i : f.test_indices(k)) (i < 10 ? pos : neg)++;
    CHECK(pos == 2);
    CHECK(neg == 2);
    CHECK(f.test_indices(k).size() + f.train_indices(k).size() == 20);
  }
}

TEST_CASE("uneven classes differ by at most one per fold") {
  const auto y = labels(7, 13);
  const auto f = stratified_folds(ids(20), y, 5, 11);
  int lo = 100, hi = -1, slo = 100, shi = -1;
  for (int k = 0; k < 5; ++k) {
    int pos = 0;
    const auto t = f.test_indices(k);
    for (auto i : t) pos += y[i];
    lo = std::min(lo, pos);
    hi = std::max(hi, pos);
    slo = std::min(slo, static_cast<int>(t.size()));
    shi = std::max(shi, static_cast<int>(t.size()));
  }
  CHECK(hi - lo <= 1);
  CHECK(shi - slo <= 1);
}

TEST_CASE("fold assignment is seeded and serialisable") {
  const auto y = labels(9, 21);
  const auto a = stratified_folds(ids(30), y, 5, 42);
  CHECK(stratified_folds(ids(30), y, 5, 42) == a);
  CHECK_FALSE(stratified_folds(ids(30), y, 5, 43) == a);
  CHECK(FoldAssignment::from_json(a.to_json()) == a);
  CHECK_THROWS_AS(stratified_folds(ids(10), labels(3, 7), 5, 1), InsufficientClassCount);
}

TEST_CASE("paired comparison: zero difference") {
  const std::vector<double> a{0.6, 0.7, 0.65, 0.58, 0.61};
  const auto c = paired_compare(a, a, Tail::Two);
  REQUIRE(c.t);
  REQUIRE(c.p);
  CHECK(*c.t == 0.0);
  CHECK(*c.p == 1.0);
  CHECK(c.ci_low == 0.0);
  CHECK(c.ci_high == 0.0);
  CHECK(c.marker().empty());
}

TEST_CASE("paired comparison: constant nonzero difference") {
  // Binary fractions so every difference is exactly 0.125.
  const std::vector<double> a{0.625, 0.875, 0.75, 0.625, 0.5}, b{0.5, 0.75, 0.625, 0.5, 0.375};
  const auto c = paired_compare(a, b, Tail::One);
  CHECK_FALSE(c.t);
  CHECK_FALSE(c.p);
  CHECK(c.ci_low == 0.125);
  CHECK(c.ci_high == 0.125);
  CHECK(c.marker() == "n/a");
}

TEST_CASE("paired comparison: hand-computed reference") {
  // d = {0.02, -0.01, 0.03, 0.00, 0.01}: mean 0.01, sd sqrt(0.001/4) = 0.0158114,
  // se 0.00707107, t = 1.41421, half-width 2.776 * se = 0.019629.
  const std::vector<double> b{0.5, 0.5, 0.5, 0.5, 0.5};
  const std::vector<double> a{0.52, 0.49, 0.53, 0.50, 0.51};
  const auto two = paired_compare(a, b, Tail::Two);
  CHECK(two.n == 5);
  CHECK(two.mean_diff == doctest::Approx(0.01));
  CHECK(two.sd_diff == doctest::Approx(0.0158114).epsilon(1e-5));
  REQUIRE(two.t);
  CHECK(*two.t == doctest::Approx(1.41421).epsilon(1e-5));
  CHECK(two.ci_low == doctest::Approx(0.01 - 0.019629).epsilon(1e-3));
  CHECK(two.ci_high == doctest::Approx(0.01 + 0.019629).epsilon(1e-3));
  REQUIRE(two.p);
  CHECK(*two.p == doctest::Approx(0.2302).epsilon(1e-3));
  const auto one = paired_compare(a, b, Tail::One);
  CHECK(*one.p == doctest::Approx(*two.p / 2));
  const auto rev = paired_compare(b, a, Tail::One);
  CHECK(*rev.p == doctest::Approx(1 - *two.p / 2));
  CHECK_THROWS_AS(paired_compare(a, std::span(b).first(4), Tail::Two), LengthMismatch);
}

TEST_CASE("significance markers") {
  Comparison c;
  c.p = 0.005;
  CHECK(c.marker() == "***");
  c.p = 0.03;
  CHECK(c.marker() == "**");
  c.p = 0.07;
  CHECK(c.marker('^') == "^");
  c.p = 0.2;
  CHECK(c.marker().empty());
}

TEST_CASE("summary helpers and labels.csv") {
  const std::vector<double> x{1, 2, 3, 4};
  CHECK(mean(x) == 2.5);
  CHECK(sample_sd(x) == doctest::Approx(std::sqrt(5.0 / 3.0)));
  std::ostringstream os;
  write_labels_csv(os, {"a", "b"}, {true, false});
  CHECK(os.str() == "session_id,label\na,1\nb,0\n");
}
