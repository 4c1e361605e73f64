#include "monah/features.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <set>

#include "monah/errors.hpp"
#include "monah/segmentation.hpp"
#include "monah/util.hpp"

namespace monah {

extern const char* const kDefaultLexiconTsv;

// ---------------------------------------------------------------------------
// Lexicon and per-turn semantics

const Lexicon& Lexicon::builtin() {
  static const Lexicon lex = parse(kDefaultLexiconTsv, "builtin lexicon");
  return lex;
}

Lexicon Lexicon::parse(std::string_view tsv, const std::string& source) {
  std::unordered_map<std::string, double> valences;
  std::size_t line_no = 0;
  for (auto line : split(tsv, '\n')) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    auto cols = split(line, '\t');
    if (cols.size() < 2) throw ParseError(source, line_no, "expected word<TAB>valence");
    auto v = parse_double(cols[1]);
    if (!v) throw ParseError(source, line_no, "bad valence");
    if (*v < -4.0 || *v > 4.0) throw ParseError(source, line_no, "valence out of [-4,4]");
    valences[to_lower_ascii(trim(cols[0]))] = *v;
  }
  return Lexicon(std::move(valences));
}

Lexicon Lexicon::load(const std::filesystem::path& path) { return parse(read_file(path.string()), path.string()); }

std::optional<double> Lexicon::valence(std::string_view word) const {
  auto it = valences_.find(std::string(word));
  if (it == valences_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::pair<std::string, double>> Lexicon::entries() const {
  std::vector<std::pair<std::string, double>> out(valences_.begin(), valences_.end());
  std::sort(out.begin(), out.end());
  return out;
}

TurnSentiment score_sentiment(const TalkTurn& turn, const Lexicon& lexicon) {
  TurnSentiment out;
  if (turn.words.empty()) return out;
  double sum = 0.0;
  std::size_t pos = 0, neg = 0;
  for (const auto& w : turn.words) {
    if (auto v = lexicon.valence(w.text)) {
      sum += *v;
      if (*v > 0) ++pos;
      if (*v < 0) ++neg;
    }
  }
  // VADER normalisation with alpha = 15.
  out.composite = std::clamp(sum / std::sqrt(sum * sum + 15.0), -1.0, 1.0);
  const auto n = static_cast<double>(turn.words.size());
  out.positive = static_cast<double>(pos) / n;
  out.negative = static_cast<double>(neg) / n;
  out.neutral = 1.0 - out.positive - out.negative;
  return out;
}

QuestionType classify_question(const TalkTurn& turn) {
  static const std::set<std::string, std::less<>> kOpen{"what", "how",  "why",  "when",    "where",
                                                        "who",  "which", "tell", "describe"};
  static const std::set<std::string, std::less<>> kClosed{"do",   "does", "did",   "is",    "are",  "was",
                                                          "were", "have", "has",   "had",   "can",  "could",
                                                          "would", "will", "shall", "may",  "any"};
  if (turn.words.empty()) return QuestionType::None;
  const auto& first = turn.words.front().text;
  if (kOpen.contains(first)) return QuestionType::Open;
  if (kClosed.contains(first)) return QuestionType::Closed;
  return QuestionType::None;
}

// ---------------------------------------------------------------------------
// Numeric helpers

double dtw_distance(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw EmptySeries("dtw_distance: empty series");
  constexpr double inf = std::numeric_limits<double>::infinity();
  // Row-wise over a; cost[j] holds the cumulative cost of cell (i, j).
  std::vector<double> prev(b.size(), inf), cur(b.size(), inf);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      const double local = std::abs(a[i] - b[j]);
      double best;
      if (i == 0 && j == 0) {
        best = 0.0;
      } else {
        best = inf;
        if (i > 0) best = std::min(best, prev[j]);
        if (j > 0) best = std::min(best, cur[j - 1]);
        if (i > 0 && j > 0) best = std::min(best, prev[j - 1]);
      }
      cur[j] = best + local;
    }
    std::swap(prev, cur);
  }
  return prev.back();
}

std::optional<Summary> summarize(std::span<const double> xs) {
  if (xs.empty()) return std::nullopt;
  Summary s;
  s.min = *std::min_element(xs.begin(), xs.end());
  s.max = *std::max_element(xs.begin(), xs.end());
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - s.mean) * (x - s.mean);
  s.variance = ss / static_cast<double>(xs.size());
  return s;
}

namespace {

std::optional<double> mean_of(std::span<const double> xs) {
  if (xs.empty()) return std::nullopt;
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

std::string key(Speaker s, std::string_view base) { return std::string(to_string(s)) + "_" + std::string(base); }

bool overlaps(Millis a0, Millis a1, Millis b0, Millis b1) { return a0 <= b1 && a1 >= b0; }

}  // namespace

std::optional<ToneMean> turn_tone(const Session& session, const TalkTurn& turn) {
  if (!session.tone_frames) return std::nullopt;
  double h = 0, s = 0, a = 0;
  std::size_t n = 0;
  for (const auto& f : *session.tone_frames) {
    if (f.speaker != turn.speaker || !overlaps(f.start_ms, f.end_ms, turn.start_ms, turn.end_ms)) continue;
    h += f.happy;
    s += f.sad;
    a += f.angry;
    ++n;
  }
  if (n == 0) return std::nullopt;
  const auto d = static_cast<double>(n);
  return ToneMean{h / d, s / d, a / d};
}

MimicrySeries mimicry_series(const Session& session) {
  MimicrySeries out;
  for (const auto& turn : session.turns) {
    const auto k = index(turn.speaker);
    if (auto r = speech_rate(turn)) out.speech_rate[k].push_back(*r);
    if (auto t = turn_tone(session, turn)) {
      out.happy[k].push_back(t->happy);
      out.sad[k].push_back(t->sad);
      out.angry[k].push_back(t->angry);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Families

FeatureParts compute_demographics(const Session& session) {
  FeatureParts out;
  std::array<std::size_t, 2> words{0, 0};
  std::array<std::set<std::string>, 2> distinct;
  for (const auto& turn : session.turns) {
    for (const auto& w : turn.words) {
      ++words[index(w.speaker)];
      distinct[index(w.speaker)].insert(w.text);
    }
  }
  const auto total = words[0] + words[1];
  for (auto s : kSpeakers) {
    const auto k = index(s);
    out.emplace_back(key(s, "word_count"), static_cast<double>(words[k]));
    out.emplace_back(key(s, "distinct_word_count"), static_cast<double>(distinct[k].size()));
    out.emplace_back(key(s, "word_proportion"),
                     total == 0 ? std::nullopt
                                : std::optional<double>(static_cast<double>(words[k]) / static_cast<double>(total)));
    const auto& p = session.meta.personality[k];
    out.emplace_back(key(s, "openness"), p.openness);
    out.emplace_back(key(s, "conscientiousness"), p.conscientiousness);
    out.emplace_back(key(s, "extraversion"), p.extraversion);
    out.emplace_back(key(s, "agreeableness"), p.agreeableness);
    out.emplace_back(key(s, "neuroticism"), p.neuroticism);
    out.emplace_back(key(s, "gender_female"), session.meta.gender[k] == Gender::Female ? 1.0 : 0.0);
  }
  return out;
}

FeatureParts compute_actions(const Session& session) {
  FeatureParts out;
  for (auto s : kSpeakers) {
    std::array<std::optional<double>, 6> counts{};
    if (session.events) {
      std::array<double, 6> c{};
      for (const auto& e : *session.events)
        if (e.speaker == s) c[static_cast<std::size_t>(e.kind)] += 1.0;
      for (std::size_t i = 0; i < c.size(); ++i) counts[i] = c[i];
    }
    out.emplace_back(key(s, "laughter_count"), counts[static_cast<std::size_t>(EventKind::Laughter)]);
    out.emplace_back(key(s, "nod_count"), counts[static_cast<std::size_t>(EventKind::Nod)]);
    out.emplace_back(key(s, "lean_forward_count"), counts[static_cast<std::size_t>(EventKind::LeanForward)]);
    out.emplace_back(key(s, "smile_count"), counts[static_cast<std::size_t>(EventKind::Smile)]);
    out.emplace_back(key(s, "posiface_positive_count"), counts[static_cast<std::size_t>(EventKind::PosiFacePositive)]);
    out.emplace_back(key(s, "posiface_negative_count"), counts[static_cast<std::size_t>(EventKind::PosiFaceNegative)]);

    for (auto au : kAuIds) {
      std::vector<double> xs;
      if (session.au_frames)
        for (const auto& f : *session.au_frames)
          if (f.speaker == s && f.au == au && f.present) xs.push_back(f.intensity);
      const auto sum = summarize(xs);
      const std::string code = "au" + std::string(au_code(au));
      out.emplace_back(key(s, code + "_min"), sum ? std::optional(sum->min) : std::nullopt);
      out.emplace_back(key(s, code + "_max"), sum ? std::optional(sum->max) : std::nullopt);
      out.emplace_back(key(s, code + "_mean"), sum ? std::optional(sum->mean) : std::nullopt);
      out.emplace_back(key(s, code + "_var"), sum ? std::optional(sum->variance) : std::nullopt);
    }
  }
  return out;
}

FeatureParts compute_prosody(const Session& session) {
  FeatureParts out;
  for (auto s : kSpeakers) {
    std::vector<double> delays, rates, happy, sad, angry;
    for (const auto& turn : session.turns) {
      if (turn.speaker != s) continue;
      if (turn.delay_before_ms) delays.push_back(static_cast<double>(*turn.delay_before_ms));
      if (auto r = speech_rate(turn)) rates.push_back(*r);
    }
    if (session.tone_frames) {
      for (const auto& f : *session.tone_frames) {
        if (f.speaker != s) continue;
        happy.push_back(f.happy);
        sad.push_back(f.sad);
        angry.push_back(f.angry);
      }
    }
    const auto d = summarize(delays);
    out.emplace_back(key(s, "delay_min"), d ? std::optional(d->min) : std::nullopt);
    out.emplace_back(key(s, "delay_max"), d ? std::optional(d->max) : std::nullopt);
    out.emplace_back(key(s, "delay_mean"), d ? std::optional(d->mean) : std::nullopt);
    out.emplace_back(key(s, "delay_var"), d ? std::optional(d->variance) : std::nullopt);
    out.emplace_back(key(s, "speech_rate_mean"), mean_of(rates));
    out.emplace_back(key(s, "tone_happy_mean"), mean_of(happy));
    out.emplace_back(key(s, "tone_sad_mean"), mean_of(sad));
    out.emplace_back(key(s, "tone_angry_mean"), mean_of(angry));
  }
  return out;
}

FeatureParts compute_semantics(const Session& session, const Lexicon& lexicon) {
  FeatureParts out;
  for (auto s : kSpeakers) {
    std::vector<double> comp, pos, neu, neg;
    std::size_t open = 0, closed = 0, turns = 0;
    for (const auto& turn : session.turns) {
      if (turn.speaker != s) continue;
      ++turns;
      const auto sent = score_sentiment(turn, lexicon);
      comp.push_back(sent.composite);
      pos.push_back(sent.positive);
      neu.push_back(sent.neutral);
      neg.push_back(sent.negative);
      switch (classify_question(turn)) {
        case QuestionType::Open: ++open; break;
        case QuestionType::Closed: ++closed; break;
        case QuestionType::None: break;
      }
    }
    auto prop = [&](std::size_t k) {
      return turns == 0 ? std::nullopt
                        : std::optional<double>(static_cast<double>(k) / static_cast<double>(turns));
    };
    out.emplace_back(key(s, "sentiment_composite"), mean_of(comp));
    out.emplace_back(key(s, "sentiment_positive"), mean_of(pos));
    out.emplace_back(key(s, "sentiment_neutral"), mean_of(neu));
    out.emplace_back(key(s, "sentiment_negative"), mean_of(neg));
    out.emplace_back(key(s, "open_question_prop"), prop(open));
    out.emplace_back(key(s, "closed_question_prop"), prop(closed));
  }
  return out;
}

FeatureParts compute_mimicry(const Session& session) {
  const auto series = mimicry_series(session);
  auto dtw = [](const std::array<std::vector<double>, 2>& s) -> std::optional<double> {
    if (s[0].empty() || s[1].empty()) return std::nullopt;
    return dtw_distance(s[0], s[1]);
  };
  const auto rate = dtw(series.speech_rate);
  const auto happy = dtw(series.happy);
  const auto sad = dtw(series.sad);
  const auto angry = dtw(series.angry);
  std::optional<double> tone;
  if (happy && sad && angry) tone = *happy + *sad + *angry;
  return {{"mimicry_speech_rate_dtw", rate},
          {"mimicry_tone_happy_dtw", happy},
          {"mimicry_tone_sad_dtw", sad},
          {"mimicry_tone_angry_dtw", angry},
          {"mimicry_tone_dtw", tone}};
}

FeatureParts compute_history(std::span<const SessionMeta> all_meta, std::string_view target) {
  auto it = std::find_if(all_meta.begin(), all_meta.end(),
                         [&](const SessionMeta& m) { return m.session_id == target; });
  if (it == all_meta.end()) throw Error("compute_history: unknown session " + std::string(target));
  std::size_t count = 0, top = 0;
  for (const auto& m : all_meta) {
    if (m.assessor_id != it->assessor_id || !(m.assessed_at < it->assessed_at)) continue;
    ++count;
    if (m.rapport_score == RapportScore::PassPlus) ++top;
  }
  std::optional<double> prop;
  if (count > 0) prop = static_cast<double>(top) / static_cast<double>(count);
  return {{"patient_num_past_sessions", static_cast<double>(count)}, {"patient_prop_max_marks", prop}};
}

CoarseFeatureVector assemble(std::string session_id, std::span<const FeatureParts> parts,
                             const FeatureRegistry& reg) {
  CoarseFeatureVector v;
  v.session_id = std::move(session_id);
  v.values.assign(reg.size(), std::nullopt);
  for (const auto& part : parts)
    for (const auto& [name, value] : part) v.values[reg.index_of(name)] = value;
  return v;
}

CoarseFeatureVector compute_features(const Session& session, std::span<const SessionMeta> all_meta,
                                     const Lexicon& lexicon) {
  const std::array<FeatureParts, 6> parts{compute_demographics(session),
                                          compute_actions(session),
                                          compute_prosody(session),
                                          compute_semantics(session, lexicon),
                                          compute_mimicry(session),
                                          compute_history(all_meta, session.meta.session_id)};
  return assemble(session.meta.session_id, parts);
}

// ---------------------------------------------------------------------------
// features.csv

void write_features_csv(std::ostream& os, std::span<const CoarseFeatureVector> vectors,
                        const FeatureRegistry& reg) {
  os << "session_id";
  for (const auto& s : reg.specs()) os << ',' << s.name;
  os << '\n';
  for (const auto& v : vectors) {
    os << v.session_id;
    for (std::size_t i = 0; i < reg.size(); ++i) {
      os << ',';
      if (i < v.values.size() && v.values[i]) os << format_double(*v.values[i]);
    }
    os << '\n';
  }
}

std::vector<CoarseFeatureVector> read_features_csv(std::istream& is, const std::string& source,
                                                   const FeatureRegistry& reg) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(is, line)) throw ParseError(source, 1, "missing header");
  ++line_no;
  const auto header = split(trim(line), ',');
  if (header.empty() || header[0] != "session_id") throw SchemaError("session_id", source + ": first column must be session_id");
  std::vector<std::size_t> columns;
  for (std::size_t c = 1; c < header.size(); ++c) columns.push_back(reg.index_of(header[c]));

  std::vector<CoarseFeatureVector> out;
  while (std::getline(is, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty()) continue;
    const auto cells = split(body, ',');
    if (cells.size() != header.size()) throw ParseError(source, line_no, "wrong number of cells");
    CoarseFeatureVector v;
    v.session_id = std::string(cells[0]);
    v.values.assign(reg.size(), std::nullopt);
    for (std::size_t c = 1; c < cells.size(); ++c) {
      if (trim(cells[c]).empty()) continue;
      auto d = parse_double(cells[c]);
      if (!d) throw ParseError(source, line_no, "bad number in column " + std::string(header[c]));
      v.values[columns[c - 1]] = *d;
    }
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace monah
