#include "monah/narrative.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include <json.hpp>

#include "monah/errors.hpp"
#include "monah/segmentation.hpp"

namespace monah {

// ---------------------------------------------------------------------------
// Statistics

const StatEntry* CorpusStats::find(std::string_view name) const {
  auto it = entries.find(std::string(name));
  return it == entries.end() ? nullptr : &it->second;
}

std::string CorpusStats::to_json() const {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  for (const auto& [name, e] : entries) doc[name] = {{"mean", e.mean}, {"sd", e.sd}, {"n", e.n}};
  return doc.dump(2) + "\n";
}

CorpusStats CorpusStats::from_json(const std::string& text, const std::string& source) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(source, 1, e.what());
  }
  if (!doc.is_object()) throw SchemaError("stats", source + ": expected an object");
  CorpusStats out;
  for (const auto& [name, e] : doc.items()) {
    for (const char* key : {"mean", "sd", "n"})
      if (!e.contains(key)) throw SchemaError(key, source + ": " + name + " missing '" + key + "'");
    out.entries[name] = {e["mean"].get<double>(), e["sd"].get<double>(), e["n"].get<std::size_t>()};
  }
  return out;
}

namespace {

std::optional<StatEntry> fit_entry(const std::vector<double>& xs) {
  if (xs.size() < 2) return std::nullopt;
  const auto s = summarize(xs);
  return StatEntry{s->mean, std::sqrt(s->variance), xs.size()};
}

}  // namespace

CorpusStats fit_stats(std::span<const CoarseFeatureVector> training, const FeatureRegistry& reg) {
  if (training.size() < 2) throw InsufficientData("fit_stats needs at least two training vectors");
  CorpusStats out;
  for (std::size_t i = 0; i < reg.size(); ++i) {
    std::vector<double> xs;
    for (const auto& v : training)
      if (i < v.values.size() && v.values[i]) xs.push_back(*v.values[i]);
    if (auto e = fit_entry(xs)) out.entries[reg[i].name] = *e;
  }
  return out;
}

CorpusStats fit_turn_stats(std::span<const Session> training) {
  std::array<std::array<std::vector<double>, 4>, 2> xs;  // speaker x {rate, happy, sad, angry}
  for (const auto& session : training) {
    for (const auto& turn : session.turns) {
      auto& slot = xs[index(turn.speaker)];
      if (auto r = speech_rate(turn)) slot[0].push_back(*r);
      if (auto t = turn_tone(session, turn)) {
        slot[1].push_back(t->happy);
        slot[2].push_back(t->sad);
        slot[3].push_back(t->angry);
      }
    }
  }
  static constexpr std::array<std::string_view, 4> kChannels{"speech_rate", "tone_happy", "tone_sad", "tone_angry"};
  CorpusStats out;
  for (auto s : kSpeakers)
    for (std::size_t c = 0; c < kChannels.size(); ++c)
      if (auto e = fit_entry(xs[index(s)][c]))
        out.entries[std::string(to_string(s)) + "_turn_" + std::string(kChannels[c])] = *e;
  return out;
}

CorpusStats merge(CorpusStats a, const CorpusStats& b) {
  for (const auto& [k, v] : b.entries) a.entries.insert_or_assign(k, v);
  return a;
}

double z_score(double x, const StatEntry& stats) {
  if (stats.sd == 0.0) return 0.0;
  return (x - stats.mean) / stats.sd;
}

double z_score(double x, const CorpusStats& stats, std::string_view name) {
  const auto* e = stats.find(name);
  if (!e) throw MissingStats(std::string(name));
  return z_score(x, *e);
}

Bucket bucket(double z) {
  if (z < -2.0) return Bucket::VeryLow;
  if (z < -1.0) return Bucket::Low;
  if (z <= 1.0) return Bucket::Neutral;
  if (z <= 2.0) return Bucket::High;
  return Bucket::VeryHigh;
}

std::string_view bucket_word(Bucket b) {
  switch (b) {
    case Bucket::VeryLow: return "very low";
    case Bucket::Low: return "low";
    case Bucket::Neutral: return "";
    case Bucket::High: return "high";
    case Bucket::VeryHigh: return "very high";
  }
  return "";
}

// ---------------------------------------------------------------------------
// Configuration strings

namespace {

bool prime_allowed(Family f) {
  return f == Family::Demographics || f == Family::Actions || f == Family::Prosody;
}

}  // namespace

WeaveConfig WeaveConfig::parse(std::string_view text) {
  WeaveConfig cfg;
  if (text.empty()) throw ConfigError("empty configuration string");
  std::string_view coarse = text, fine;
  if (const auto dash = text.find('-'); dash != std::string_view::npos) {
    coarse = text.substr(0, dash);
    fine = text.substr(dash + 1);
    if (coarse.empty() || fine.empty()) throw ConfigError("configuration '" + std::string(text) + "': empty side of '-'");
  } else if (std::islower(static_cast<unsigned char>(text.front()))) {
    coarse = {};
    fine = text;
  }

  for (std::size_t i = 0; i < coarse.size(); ++i) {
    auto fam = family_from_letter(coarse[i]);
    if (!fam) throw ConfigError("configuration '" + std::string(text) + "': unknown coarse family '" + coarse[i] + "'");
    auto& level = cfg.coarse[static_cast<std::size_t>(*fam)];
    if (level != Level::Off) throw ConfigError("configuration '" + std::string(text) + "': repeated family '" + coarse[i] + "'");
    level = Level::Full;
    if (i + 1 < coarse.size() && coarse[i + 1] == '\'') {
      if (!prime_allowed(*fam))
        throw ConfigError("configuration '" + std::string(text) + "': family '" + coarse[i] + "' has no primed variant");
      level = Level::Prime;
      ++i;
    }
  }

  bool seen_v = false;
  for (std::size_t i = 0; i < fine.size(); ++i) {
    const bool primed = i + 1 < fine.size() && fine[i + 1] == '\'';
    const auto bad = [&](const std::string& why) {
      return ConfigError("configuration '" + std::string(text) + "': " + why);
    };
    switch (fine[i]) {
      case 'v':
        if (seen_v) throw bad("repeated fine family 'v'");
        if (primed) throw bad("'v' has no primed variant");
        seen_v = true;
        break;
      case 'p':
      case 'a': {
        auto& level = fine[i] == 'p' ? cfg.fine_prosody : cfg.fine_actions;
        if (level != Level::Off) throw bad(std::string("repeated fine family '") + fine[i] + "'");
        level = primed ? Level::Prime : Level::Full;
        break;
      }
      default:
        throw bad(std::string("unknown fine family '") + fine[i] + "'");
    }
    if (primed) ++i;
  }
  if ((cfg.fine_prosody != Level::Off || cfg.fine_actions != Level::Off) && !seen_v)
    throw ConfigError("configuration '" + std::string(text) + "': fine families require verbatim 'v'");
  cfg.verbatim = seen_v;
  return cfg;
}

std::string WeaveConfig::format() const {
  std::string coarse_part;
  for (auto f : kFamilies) {
    const auto level = coarse[static_cast<std::size_t>(f)];
    if (level == Level::Off) continue;
    coarse_part += family_letter(f);
    if (level == Level::Prime) coarse_part += '\'';
  }
  std::string fine_part;
  if (verbatim) {
    fine_part += 'v';
    for (auto [letter, level] : {std::pair{'p', fine_prosody}, std::pair{'a', fine_actions}}) {
      if (level == Level::Off) continue;
      fine_part += letter;
      if (level == Level::Prime) fine_part += '\'';
    }
  }
  if (coarse_part.empty()) return fine_part;
  if (fine_part.empty()) return coarse_part;
  return coarse_part + "-" + fine_part;
}

bool WeaveConfig::any_coarse() const {
  return std::any_of(coarse.begin(), coarse.end(), [](Level l) { return l != Level::Off; });
}

bool WeaveConfig::includes(const FeatureSpec& spec) const {
  const auto level = coarse[static_cast<std::size_t>(spec.family)];
  return level == Level::Full || (level == Level::Prime && spec.prime);
}

WeaveConfig WeaveConfig::coarse_only() const {
  WeaveConfig c = *this;
  c.verbatim = false;
  c.fine_prosody = Level::Off;
  c.fine_actions = Level::Off;
  return c;
}

// ---------------------------------------------------------------------------
// Template helpers

std::string_view number_word(int n) {
  static constexpr std::array<std::string_view, 21> kWords{
      "zero",    "one",     "two",       "three",    "four",     "five",    "six",
      "seven",   "eight",   "nine",      "ten",      "eleven",   "twelve",  "thirteen",
      "fourteen", "fifteen", "sixteen",  "seventeen", "eighteen", "nineteen", "twenty"};
  if (n < 0 || n > 20) return "";
  return kWords[static_cast<std::size_t>(n)];
}

std::optional<std::string> delay_phrase(Millis delay_ms) {
  if (delay_ms < 200) return std::nullopt;
  const auto hundreds = static_cast<int>(std::clamp<Millis>(delay_ms / 100, 2, 12));
  return "after " + std::string(number_word(hundreds)) + " hundred milliseconds";
}

std::string_view delay_length_word(double z) {
  if (z < 1.0) return "short";
  if (z < 2.0) return "long";
  return "significantly long";
}

std::string_view speed_adverb(double z) {
  if (z >= 2.0) return "very quickly";
  if (z > 1.0) return "quickly";
  return "";
}

bool au_covers_turn(std::span<const AuFrame> frames, Speaker speaker, AuId au, const TalkTurn& turn) {
  std::optional<Millis> first, last;
  for (const auto& f : frames) {
    if (f.speaker != speaker || f.au != au || f.timestamp_ms < turn.start_ms || f.timestamp_ms > turn.end_ms) continue;
    if (!f.present) return false;
    first = first ? std::min(*first, f.timestamp_ms) : f.timestamp_ms;
    last = last ? std::max(*last, f.timestamp_ms) : f.timestamp_ms;
  }
  if (!first) return false;
  const auto span = static_cast<double>(*last - *first);
  return span >= 0.9 * static_cast<double>(turn.end_ms - turn.start_ms);
}

namespace {

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

std::string_view event_verb(EventKind k) {
  switch (k) {
    case EventKind::Laughter: return "laughed";
    case EventKind::Nod: return "nodded";
    case EventKind::LeanForward: return "leaned forward";
    case EventKind::Smile: return "smiled";
    case EventKind::PosiFacePositive: return "displayed positive facial expression";
    case EventKind::PosiFaceNegative: return "displayed negative facial expression";
  }
  return "";
}

std::optional<Speaker> scope_speaker(Scope s) {
  if (s == Scope::Doctor) return Speaker::Doctor;
  if (s == Scope::Patient) return Speaker::Patient;
  return std::nullopt;
}

}  // namespace

// ---------------------------------------------------------------------------
// Coarse narrative

std::string weave_coarse(const CoarseFeatureVector& vector, const CorpusStats& stats, const WeaveConfig& config,
                         std::vector<std::string>* warnings, const FeatureRegistry& reg) {
  std::vector<std::string> sentences;
  for (auto fam : kFamilies) {
    if (config.coarse[static_cast<std::size_t>(fam)] == Level::Off) continue;
    for (auto scope : {Scope::Doctor, Scope::Patient, Scope::Session}) {
      // Entries of one family and scope are contiguous per template in registry order.
      int current_template = -1;
      std::vector<std::string> clauses;
      auto flush = [&] {
        if (!clauses.empty()) sentences.push_back(join(clauses, ", "));
        clauses.clear();
      };
      for (std::size_t i = 0; i < reg.size(); ++i) {
        const auto& spec = reg[i];
        if (spec.family != fam || spec.scope != scope || !config.includes(spec)) continue;
        if (spec.template_id != current_template) {
          flush();
          current_template = spec.template_id;
        }
        const auto value = i < vector.values.size() ? vector.values[i] : std::nullopt;
        if (!value) continue;
        const auto speaker = scope_speaker(scope);
        if (spec.template_id == 3) {
          clauses.push_back("the " + std::string(to_string(*speaker)) + " is " + (*value >= 0.5 ? "female" : "male"));
          continue;
        }
        const auto* entry = stats.find(spec.name);
        if (!entry) {
          if (warnings) warnings->push_back(vector.session_id + ": no stats for " + spec.name + ", clause skipped");
          continue;
        }
        const auto b = bucket(z_score(*value, *entry));
        if (b == Bucket::Neutral) continue;
        std::string clause = speaker ? std::string(to_string(*speaker)) + " " : std::string();
        clause += spec.phrase + " " + std::string(bucket_word(b));
        clauses.push_back(std::move(clause));
      }
      flush();
    }
  }
  if (sentences.empty()) return {};
  return join(sentences, ". ") + ".";
}

// ---------------------------------------------------------------------------
// Fine narrative

std::vector<FineTurn> weave_fine(const Session& session, const CorpusStats& stats, const WeaveConfig& config,
                                 std::vector<std::string>* warnings) {
  std::vector<FineTurn> out;
  if (!config.verbatim) return out;

  // Delay standardisation uses this session's own delays.
  std::vector<double> delays;
  for (const auto& t : session.turns)
    if (t.delay_before_ms) delays.push_back(static_cast<double>(*t.delay_before_ms));
  StatEntry delay_stats;
  if (auto s = summarize(delays)) delay_stats = {s->mean, std::sqrt(s->variance), delays.size()};

  auto warn = [&](const std::string& what) {
    if (warnings) warnings->push_back(session.meta.session_id + ": " + what);
  };
  auto turn_z = [&](Speaker s, std::string_view channel, double x) -> std::optional<double> {
    const auto name = std::string(to_string(s)) + "_turn_" + std::string(channel);
    const auto* e = stats.find(name);
    if (!e) {
      warn("no stats for " + name);
      return std::nullopt;
    }
    return z_score(x, *e);
  };

  // Frames per (speaker, AU), ordered by timestamp.
  std::array<std::array<std::vector<AuFrame>, 4>, 2> au_index;
  if (session.au_frames) {
    for (const auto& f : *session.au_frames) au_index[index(f.speaker)][static_cast<std::size_t>(f.au)].push_back(f);
    for (auto& per : au_index)
      for (auto& v : per)
        std::stable_sort(v.begin(), v.end(),
                         [](const AuFrame& a, const AuFrame& b) { return a.timestamp_ms < b.timestamp_ms; });
  }
  auto frames_in = [&](Speaker s, AuId au, const TalkTurn& turn) {
    const auto& v = au_index[index(s)][static_cast<std::size_t>(au)];
    auto lo = std::lower_bound(v.begin(), v.end(), turn.start_ms,
                               [](const AuFrame& f, Millis t) { return f.timestamp_ms < t; });
    auto hi = std::upper_bound(lo, v.end(), turn.end_ms, [](Millis t, const AuFrame& f) { return t < f.timestamp_ms; });
    return std::span<const AuFrame>(lo, hi);
  };

  for (std::size_t ti = 0; ti < session.turns.size(); ++ti) {
    const auto& turn = session.turns[ti];
    const std::string spk(to_string(turn.speaker));
    std::vector<std::string> pieces;

    if (config.fine_prosody != Level::Off) {
      if (turn.delay_before_ms) {
        if (auto phrase = delay_phrase(*turn.delay_before_ms)) {
          pieces.push_back(*phrase);
          const double z = z_score(static_cast<double>(*turn.delay_before_ms), delay_stats);
          pieces.push_back("a " + std::string(delay_length_word(z)) + " delay");
        }
      }
      std::string adverb;
      if (auto rate = speech_rate(turn))
        if (auto z = turn_z(turn.speaker, "speech_rate", *rate)) adverb = std::string(speed_adverb(*z));
      std::string tone;
      if (config.fine_prosody == Level::Full) {
        if (auto t = turn_tone(session, turn)) {
          const std::array<std::pair<std::string_view, double>, 3> channels{
              {{"tone_happy", t->happy}, {"tone_sad", t->sad}, {"tone_angry", t->angry}}};
          static constexpr std::array<std::string_view, 3> kAdverbs{"happily", "sadly", "angrily"};
          std::optional<std::size_t> best;
          double best_z = 1.0;
          for (std::size_t c = 0; c < channels.size(); ++c) {
            auto z = turn_z(turn.speaker, channels[c].first, channels[c].second);
            if (z && *z > best_z) best_z = *z, best = c;
          }
          if (best) tone = std::string(kAdverbs[*best]);
        }
      }
      std::string clause = "the " + spk;
      if (!adverb.empty()) clause += " " + adverb;
      clause += " said";
      if (!tone.empty()) clause += " " + tone;
      pieces.push_back(std::move(clause));
    }

    if (config.fine_actions != Level::Off) {
      for (auto who : {turn.speaker, other(turn.speaker)}) {
        const std::string name(to_string(who));
        if (session.events) {
          for (auto kind : kEventKinds) {
            if (config.fine_actions == Level::Prime && kind != EventKind::Laughter) continue;
            const bool hit = std::any_of(session.events->begin(), session.events->end(), [&](const FeatureEvent& e) {
              return e.speaker == who && e.kind == kind && e.start_ms <= turn.end_ms && e.end_ms >= turn.start_ms;
            });
            if (hit) pieces.push_back("the " + name + " " + std::string(event_verb(kind)));
          }
        }
        if (session.au_frames) {
          for (auto au : kAuIds)
            if (au_covers_turn(frames_in(who, au, turn), who, au, turn))
              pieces.push_back("the " + name + " exhibited " + std::string(au_name(au)));
        }
      }
    }

    for (const auto& w : turn.words) pieces.push_back(w.text);
    out.push_back({ti, turn.speaker, join(pieces, " ")});
  }
  return out;
}

Narrative weave(const Session& session, const CoarseFeatureVector& vector, const CorpusStats& stats,
                const WeaveConfig& config, std::vector<std::string>* warnings) {
  Narrative n;
  n.session_id = session.meta.session_id;
  if (config.any_coarse()) n.coarse_text = weave_coarse(vector, stats, config, warnings);
  n.fine_turns = weave_fine(session, stats, config, warnings);
  return n;
}

}  // namespace monah
