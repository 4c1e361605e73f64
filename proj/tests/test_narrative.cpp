#include <doctest.h>

#include "monah/errors.hpp"
#include "monah/narrative.hpp"
#include "support.hpp"

using namespace monah;
using test::W;
constexpr auto D = Speaker::Doctor;
constexpr auto P = Speaker::Patient;

namespace {

/// Stats that put every present value of `v` at z = 0.
CorpusStats neutral_stats(const CoarseFeatureVector& v) {
  CorpusStats s;
  const auto& reg = FeatureRegistry::builtin();
  for (std::size_t i = 0; i < reg.size(); ++i) s.entries[reg[i].name] = {v.values[i].value_or(0.0), 1.0, 10};
  return s;
}

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

}  // namespace

TEST_CASE("training stats") {
  const auto& reg = FeatureRegistry::builtin();
  std::vector<CoarseFeatureVector> vs(3);
  for (auto& v : vs) v.values.assign(reg.size(), std::nullopt);
  vs[0].values[0] = 4.0;
  vs[1].values[0] = 6.0;
  for (auto& v : vs) v.values[1] = 3.0;
  vs[0].values[2] = 1.0;
  const auto s = fit_stats(vs);
  REQUIRE(s.find(reg[0].name));
  CHECK(s.find(reg[0].name)->mean == 5.0);
  CHECK(s.find(reg[0].name)->sd == 1.0);
  CHECK(s.find(reg[0].name)->n == 2);
  CHECK(s.find(reg[1].name)->sd == 0.0);
  CHECK_FALSE(s.find(reg[2].name));
  CHECK_FALSE(s.find(reg[3].name));
  CHECK_THROWS_AS(fit_stats(std::span(vs).first(1)), InsufficientData);
  CHECK(CorpusStats::from_json(s.to_json()) == s);
}

TEST_CASE("z scores") {
  CHECK(z_score(5, StatEntry{5, 2, 3}) == 0.0);
  CHECK(z_score(9, StatEntry{5, 2, 3}) == 2.0);
  CHECK(z_score(7, StatEntry{5, 0, 3}) == 0.0);
  CorpusStats s;
  CHECK_THROWS_AS(z_score(1.0, s, "doctor_word_count"), MissingStats);
}

TEST_CASE("buckets") {
  CHECK(bucket(1.5) == Bucket::High);
  CHECK(bucket(-2.5) == Bucket::VeryLow);
  CHECK(bucket(0) == Bucket::Neutral);
  CHECK(bucket(-2.0) == Bucket::Low);
  CHECK(bucket(2.0) == Bucket::High);
  CHECK(bucket(1.0) == Bucket::Neutral);
  CHECK(bucket(-1.0) == Bucket::Neutral);
  CHECK(bucket_word(Bucket::VeryHigh) == "very high");
  CHECK(bucket_word(Bucket::Neutral).empty());
}

TEST_CASE("config strings") {
  CHECK(WeaveConfig::parse("PAH").format() == "APH");
  CHECK(WeaveConfig::parse("D'A'P'").format() == "D'A'P'");
  CHECK(WeaveConfig::parse("DAPSMH-vpa").format() == "DAPSMH-vpa");
  CHECK(WeaveConfig::parse("vp'a'").format() == "vp'a'");
  const auto c = WeaveConfig::parse("DH-vpa");
  CHECK(c.coarse_only() == WeaveConfig::parse("DH"));
  CHECK_FALSE(c.coarse_only().any_fine());
  CHECK_THROWS_AS(WeaveConfig::parse("DX"), ConfigError);
  CHECK_THROWS_AS(WeaveConfig::parse("DD"), ConfigError);
  CHECK_THROWS_AS(WeaveConfig::parse(""), ConfigError);
  CHECK_THROWS_AS(WeaveConfig::parse("D-q"), ConfigError);
  for (const char* s : {"H", "DH", "APH", "APMH", "APSMH", "DAPSMH", "D'A'P'", "DAPSMH-v", "DAPSMH-vp'", "A'"})
    CHECK(WeaveConfig::parse(WeaveConfig::parse(s).format()) == WeaveConfig::parse(s));
}

TEST_CASE("fine template pieces") {
  CHECK(number_word(4) == "four");
  CHECK(number_word(12) == "twelve");
  CHECK(delay_phrase(450) == "after four hundred milliseconds");
  CHECK(delay_phrase(200) == "after two hundred milliseconds");
  CHECK(delay_phrase(1900) == "after twelve hundred milliseconds");
  CHECK_FALSE(delay_phrase(150));
  CHECK(delay_length_word(0.5) == "short");
  CHECK(delay_length_word(1.5) == "long");
  CHECK(delay_length_word(2.5) == "significantly long");
  CHECK(speed_adverb(2.4) == "very quickly");
  CHECK(speed_adverb(1.5) == "quickly");
  CHECK(speed_adverb(0.2).empty());
  CHECK(speed_adverb(-3).empty());
}

TEST_CASE("coarse clauses") {
  const auto g = test::load_golden();
  auto stats = neutral_stats(g.vector);
  const auto cfg = WeaveConfig::parse("DAPSMH");
  const auto plain = weave_coarse(g.vector, stats, cfg);
  CHECK(plain == "the doctor is female. the patient is male.");

  auto& wc = stats.entries["doctor_word_count"];
  wc.mean = *g.vector.get("doctor_word_count") - 1.4;
  CHECK(weave_coarse(g.vector, stats, cfg) == "doctor number of words high. the doctor is female. the patient is male.");

  std::vector<std::string> warnings;
  stats.entries.erase("doctor_word_count");
  CHECK(weave_coarse(g.vector, stats, cfg, &warnings) == plain);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0] == "g001: no stats for doctor_word_count, clause skipped");
}

TEST_CASE("fine clauses") {
  auto s = test::session_from("f", {W{D, "hello", 0, 400}, W{P, "hi", 850, 1000}, W{D, "so", 1100, 1200}});
  s.events = std::vector<FeatureEvent>{{EventKind::Smile, D, 1150, 1600}};
  CorpusStats stats;
  stats.entries["doctor_turn_speech_rate"] = {1.0, 0.5, 10};  // "so" at 10 words/s is z = 18
  stats.entries["patient_turn_speech_rate"] = {6.67, 1.0, 10};
  const auto fine = weave_fine(s, stats, WeaveConfig::parse("vpa"));
  REQUIRE(fine.size() == 3);
  CHECK(fine[0].text == "the doctor very quickly said hello");
  // Session delays {450, 100}: 450 sits exactly at z = 1.
  CHECK(fine[1].text == "after four hundred milliseconds a long delay the patient said hi");
  CHECK(fine[2].text == "the doctor very quickly said the doctor smiled so");

  CHECK(weave_fine(s, stats, WeaveConfig::parse("DH")).empty());
  const auto verbatim = weave_fine(s, stats, WeaveConfig::parse("v"));
  CHECK(verbatim[0].text == "hello");
  CHECK(verbatim[1].text == "hi");
  const auto prime = weave_fine(s, stats, WeaveConfig::parse("va'"));
  CHECK(prime[2].text == "so");
}

TEST_CASE("AU coverage") {
  TalkTurn t;
  t.speaker = D;
  t.start_ms = 1000;
  t.end_ms = 4000;
  std::vector<AuFrame> f;
  for (Millis ms = 1000; ms <= 4000; ms += 1000) f.push_back({D, ms, AuId::AU05, 1.0, true});
  CHECK(au_covers_turn(f, D, AuId::AU05, t));
  CHECK_FALSE(au_covers_turn(f, P, AuId::AU05, t));
  CHECK_FALSE(au_covers_turn(f, D, AuId::AU17, t));
  f[2].present = false;
  CHECK_FALSE(au_covers_turn(f, D, AuId::AU05, t));
}

TEST_CASE("fixture narrative matches the goldens") {
  const auto g = test::load_golden();
  std::vector<std::string> warnings;
  const auto n = weave(g.session, g.vector, g.stats, WeaveConfig::parse("DAPSMH-vpa"), &warnings);
  CHECK(n.coarse_text + "\n" == test::golden("fixture_coarse.txt"));
  CHECK(test::fine_text(n.fine_turns) == test::golden("fixture_fine.txt"));
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0] == "g001: no stats for mimicry_tone_dtw, clause skipped");
  CHECK(contains(test::golden("fixture_fine.txt"), "after four hundred milliseconds"));
  CHECK(contains(test::golden("fixture_fine.txt"), "after twelve hundred milliseconds"));
}

TEST_CASE("coarse-only weaves no fine turns") {
  const auto g = test::load_golden();
  const auto n = weave(g.session, g.vector, g.stats, WeaveConfig::parse("DAPSMH-vpa").coarse_only());
  CHECK(n.fine_turns.empty());
  CHECK_FALSE(n.coarse_text.empty());
}
