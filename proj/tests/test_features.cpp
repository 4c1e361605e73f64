#include <doctest.h>

#include <sstream>

#include "monah/errors.hpp"
#include "monah/features.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace monah;
using test::W;
constexpr auto D = Speaker::Doctor;
constexpr auto P = Speaker::Patient;

namespace {

std::optional<double> part(const FeatureParts& parts, const std::string& name) {
  for (const auto& [n, v] : parts)
    if (n == name) return v;
  FAIL("no part named " << name);
  return std::nullopt;
}

Session two_speaker(std::size_t doctor_words, std::size_t patient_words) {
  Session s;
  s.meta.session_id = "x";
  std::vector<WordToken> ws;
  Millis t = 0;
  for (std::size_t i = 0; i < doctor_words; ++i, t += 10) ws.push_back({"d" + std::to_string(i), t, t + 5, D});
  for (std::size_t i = 0; i < patient_words; ++i, t += 10) ws.push_back({"p" + std::to_string(i), t, t + 5, P});
  s.turns = segment(ws);
  compute_delays(s.turns);
  return s;
}

SessionMeta meta(std::string id, std::string assessor, int day, RapportScore r) {
  SessionMeta m;
  m.session_id = std::move(id);
  m.assessor_id = std::move(assessor);
  m.assessed_at = *parse_iso8601("2021-01-01T00:00:00Z") + std::chrono::days(day);
  m.rapport_score = r;
  return m;
}

}  // namespace

TEST_CASE("checked-in registry matches the builtin one") {
  const auto& reg = FeatureRegistry::builtin();
  const auto text = read_file((test::data_dir() / "registry.json").string());
  CHECK(FeatureRegistry::from_json(text).specs() == reg.specs());
  CHECK(reg.size() == 97);
  CHECK(reg.find("doctor_word_count") == 0);
  CHECK_THROWS_AS(reg.index_of("doctor_shoe_size"), UnknownFeature);
  for (const auto& s : reg.specs())
    if (s.family == Family::Demographics) CHECK(s.prime);
}

TEST_CASE("talkativeness") {
  const auto d = compute_demographics(two_speaker(60, 40));
  CHECK(part(d, "doctor_word_proportion") == doctest::Approx(0.6));
  CHECK(part(d, "doctor_distinct_word_count") == 60.0);

  auto s = test::session_from("y", {W{D, "yes", 0, 10}, W{D, "yes", 20, 30}, W{D, "yes", 40, 50}});
  const auto y = compute_demographics(s);
  CHECK(part(y, "doctor_word_count") == 3.0);
  CHECK(part(y, "doctor_distinct_word_count") == 1.0);
  CHECK(part(y, "patient_word_count") == 0.0);
}

TEST_CASE("event counts and AU summaries") {
  auto s = test::session_from("a", {W{D, "a", 0, 100}, W{P, "b", 200, 300}});
  s.events = std::vector<FeatureEvent>{};
  for (int i = 0; i < 3; ++i) s.events->push_back({EventKind::Laughter, P, i * 10, i * 10 + 5});
  s.au_frames = std::vector<AuFrame>{};
  for (int i = 0; i < 3; ++i) s.au_frames->push_back({D, i * 1000, AuId::AU05, 1.0, true});
  for (double x : {0.0, 2.0, 4.0}) s.au_frames->push_back({P, 0, AuId::AU17, x, true});
  const auto a = compute_actions(s);
  CHECK(part(a, "patient_laughter_count") == 3.0);
  CHECK(part(a, "doctor_laughter_count") == 0.0);
  CHECK(part(a, "doctor_au05_min") == 1.0);
  CHECK(part(a, "doctor_au05_max") == 1.0);
  CHECK(part(a, "doctor_au05_mean") == 1.0);
  CHECK(part(a, "doctor_au05_var") == 0.0);
  CHECK(part(a, "patient_au17_mean") == doctest::Approx(2.0));
  CHECK(part(a, "patient_au17_var") == doctest::Approx(8.0 / 3.0));
  CHECK_FALSE(part(a, "patient_au25_mean"));

  s.events.reset();
  CHECK_FALSE(part(compute_actions(s), "patient_laughter_count"));
}

TEST_CASE("prosody") {
  auto s = test::session_from("p", {W{D, "a", 0, 100}, W{P, "b", 200, 300}, W{D, "c", 600, 700}});
  s.tone_frames = std::vector<ToneFrame>{{P, 200, 300, 0.2, 0.0, 0.0}, {P, 200, 300, 0.4, 0.0, 0.0}};
  const auto p = compute_prosody(s);
  CHECK(part(p, "doctor_delay_mean") == 300.0);
  CHECK(part(p, "patient_delay_mean") == 100.0);
  CHECK(part(p, "patient_tone_happy_mean") == doctest::Approx(0.3));
  CHECK_FALSE(part(p, "doctor_tone_happy_mean"));

  auto d = test::session_from("q", {W{D, "a", 0, 100}, W{P, "b", 200, 300}, W{D, "c", 600, 700}, W{P, "d", 1000, 1100},
                                    W{D, "e", 1400, 1500}});
  CHECK(part(compute_prosody(d), "doctor_delay_mean") == 300.0);
  d.turns[2].delay_before_ms = 100;
  d.turns[4].delay_before_ms = 300;
  CHECK(part(compute_prosody(d), "doctor_delay_mean") == 200.0);

  auto one = test::session_from("r", {W{D, "a", 0, 100}});
  CHECK_FALSE(part(compute_prosody(one), "doctor_delay_mean"));
}

TEST_CASE("sentiment and question heuristics") {
  auto s = test::session_from("s", {W{D, "the", 0, 10}, W{D, "table", 20, 30}});
  const auto none = score_sentiment(s.turns[0], Lexicon::builtin());
  CHECK(none.composite == 0.0);
  CHECK(none.neutral == 1.0);

  auto good = test::session_from("g", {W{D, "good", 0, 10}, W{D, "great", 20, 30}});
  const auto sg = score_sentiment(good.turns[0], Lexicon::builtin());
  CHECK(sg.composite > 0.0);
  CHECK(sg.composite <= 1.0);
  CHECK(sg.positive + sg.neutral + sg.negative == doctest::Approx(1.0));

  auto open = test::session_from("o", {W{D, "what", 0, 1}, W{D, "brings", 2, 3}, W{D, "you", 4, 5},
                                       W{D, "here", 6, 7}, W{D, "today", 8, 9}});
  CHECK(classify_question(open.turns[0]) == QuestionType::Open);
  auto closed = test::session_from("c", {W{D, "do", 0, 1}, W{D, "you", 2, 3}, W{D, "smoke", 4, 5}});
  CHECK(classify_question(closed.turns[0]) == QuestionType::Closed);
  auto plain = test::session_from("n", {W{D, "okay", 0, 1}});
  CHECK(classify_question(plain.turns[0]) == QuestionType::None);
}

TEST_CASE("lexicon parsing") {
  const auto lex = Lexicon::parse("good\t1.9\nbad\t-2.5\n");
  CHECK(lex.size() == 2);
  CHECK(lex.valence("bad") == -2.5);
  CHECK_FALSE(lex.valence("table"));
  CHECK_THROWS_AS(Lexicon::parse("good\tvery\n"), ParseError);
  CHECK(Lexicon::builtin().size() > 50);
}

TEST_CASE("dtw") {
  const std::vector<double> a{1, 2, 3};
  CHECK(dtw_distance(a, a) == 0.0);
  const std::vector<double> x{1, 2}, y{2, 2};
  CHECK(dtw_distance(x, y) == 1.0);
  CHECK(oracle::dtw(x, y) == 1.0);
  CHECK_THROWS_AS(dtw_distance({}, a), EmptySeries);

  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> len(1, 6);
  std::normal_distribution<double> v(0.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    std::vector<double> p(len(rng)), q(len(rng));
    for (auto& e : p) e = v(rng);
    for (auto& e : q) e = v(rng);
    CHECK(dtw_distance(p, q) == oracle::dtw(p, q));
    CHECK(dtw_distance(p, q) == dtw_distance(q, p));
  }
}

TEST_CASE("mimicry") {
  Session s = test::session_from("m", {W{D, "a", 0, 500}, W{D, "b", 500, 1000}, W{P, "c", 1200, 1700},
                                       W{P, "d", 1700, 2200}});
  const auto m = compute_mimicry(s);
  CHECK(part(m, "mimicry_speech_rate_dtw") == 0.0);
  CHECK_FALSE(part(m, "mimicry_tone_dtw"));

  const auto g = test::load_golden();
  const auto series = mimicry_series(g.session);
  const auto& r = series.speech_rate;
  CHECK(g.vector.get("mimicry_speech_rate_dtw") == oracle::dtw(r[0], r[1]));
  CHECK(g.vector.get("mimicry_tone_happy_dtw") == oracle::dtw(series.happy[0], series.happy[1]));
}

TEST_CASE("assessor history counts strictly earlier sessions") {
  const std::vector<SessionMeta> all{meta("a", "sp1", 0, RapportScore::PassPlus), meta("b", "sp1", 1, RapportScore::Pass),
                                     meta("c", "sp1", 2, RapportScore::PassPlus), meta("d", "sp1", 3, RapportScore::Fail),
                                     meta("e", "sp2", 4, RapportScore::Fail), meta("f", "sp2", 4, RapportScore::Pass)};
  const auto d = compute_history(all, "d");
  CHECK(part(d, "patient_num_past_sessions") == 3.0);
  CHECK(part(d, "patient_prop_max_marks") == doctest::Approx(2.0 / 3.0));
  const auto a = compute_history(all, "a");
  CHECK(part(a, "patient_num_past_sessions") == 0.0);
  CHECK_FALSE(part(a, "patient_prop_max_marks"));
  CHECK(part(compute_history(all, "e"), "patient_num_past_sessions") == 0.0);
  CHECK(part(compute_history(all, "f"), "patient_num_past_sessions") == 0.0);
}

TEST_CASE("full vectors") {
  const auto g = test::load_golden();
  CHECK(g.vector.values.size() == FeatureRegistry::builtin().size());
  const std::vector<SessionMeta> metas{g.session.meta};
  CHECK(compute_features(g.session, metas, Lexicon::builtin()) == g.vector);

  auto no_tone = g.session;
  no_tone.tone_frames.reset();
  const auto v = compute_features(no_tone, metas, Lexicon::builtin());
  const auto& reg = FeatureRegistry::builtin();
  for (std::size_t i = 0; i < reg.size(); ++i) {
    const auto& n = reg[i].name;
    if (n.find("tone") != std::string::npos) CHECK_FALSE(v.values[i]);
    else CHECK(v.values[i] == g.vector.values[i]);
  }
}

TEST_CASE("features.csv round-trips with absent cells") {
  const auto g = test::load_golden();
  auto other = g.vector;
  other.session_id = "g002";
  other.values[3].reset();
  const std::vector<CoarseFeatureVector> vs{g.vector, other};
  std::stringstream ss;
  write_features_csv(ss, vs);
  CHECK(read_features_csv(ss) == vs);
}
