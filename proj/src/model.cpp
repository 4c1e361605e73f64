#include "monah/model.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace monah {

std::string_view to_string(Speaker s) { return s == Speaker::Doctor ? "doctor" : "patient"; }

std::optional<Speaker> parse_speaker(std::string_view s) {
  if (s == "doctor") return Speaker::Doctor;
  if (s == "patient") return Speaker::Patient;
  return std::nullopt;
}

namespace {
constexpr std::array<std::string_view, 6> kEventNames{
    "laughter", "nod", "lean_forward", "smile", "posiface_positive", "posiface_negative"};
}

std::string_view to_string(EventKind k) { return kEventNames[static_cast<std::size_t>(k)]; }

std::optional<EventKind> parse_event_kind(std::string_view s) {
  for (std::size_t i = 0; i < kEventNames.size(); ++i)
    if (kEventNames[i] == s) return kEventKinds[i];
  return std::nullopt;
}

std::string_view au_code(AuId au) {
  switch (au) {
    case AuId::AU05: return "05";
    case AuId::AU17: return "17";
    case AuId::AU20: return "20";
    case AuId::AU25: return "25";
  }
  return "";
}

std::optional<AuId> parse_au(std::string_view s) {
  if (s.size() > 2 && (s.substr(0, 2) == "AU" || s.substr(0, 2) == "au")) s.remove_prefix(2);
  for (auto au : kAuIds)
    if (au_code(au) == s) return au;
  return std::nullopt;
}

std::string_view au_name(AuId au) {
  switch (au) {
    case AuId::AU05: return "upper lid raiser";
    case AuId::AU17: return "chin raiser";
    case AuId::AU20: return "lip stretcher";
    case AuId::AU25: return "lips part";
  }
  return "";
}

std::string_view to_string(Gender g) { return g == Gender::Male ? "male" : "female"; }

std::optional<Gender> parse_gender(std::string_view s) {
  if (s == "male") return Gender::Male;
  if (s == "female") return Gender::Female;
  return std::nullopt;
}

namespace {
constexpr std::array<std::string_view, 4> kRapportNames{"fail", "pass_minus", "pass", "pass_plus"};
}

std::string_view to_string(RapportScore r) { return kRapportNames[static_cast<std::size_t>(r)]; }

std::optional<RapportScore> parse_rapport(std::string_view s) {
  for (std::size_t i = 0; i < kRapportNames.size(); ++i)
    if (kRapportNames[i] == s) return kRapportScores[i];
  if (s == "Fail") return RapportScore::Fail;
  if (s == "Pass-") return RapportScore::PassMinus;
  if (s == "Pass") return RapportScore::Pass;
  if (s == "Pass+") return RapportScore::PassPlus;
  return std::nullopt;
}

namespace {

bool has_whitespace(std::string_view s) {
  for (unsigned char c : s)
    if (std::isspace(c)) return true;
  return false;
}

bool in_range(double v, double lo, double hi) { return std::isfinite(v) && v >= lo && v <= hi; }

std::string at(std::string_view kind, std::size_t i) {
  return std::string(kind) + " " + std::to_string(i) + ": ";
}

}  // namespace

std::vector<std::string> validate_session(const Session& session) {
  std::vector<std::string> out;
  const auto& meta = session.meta;
  if (meta.session_id.empty()) out.push_back("meta: empty session_id");
  for (auto s : kSpeakers) {
    const auto& p = meta.personality[index(s)];
    const std::array<std::pair<std::string_view, double>, 5> traits{{{"openness", p.openness},
                                                                     {"conscientiousness", p.conscientiousness},
                                                                     {"extraversion", p.extraversion},
                                                                     {"agreeableness", p.agreeableness},
                                                                     {"neuroticism", p.neuroticism}}};
    for (const auto& [name, v] : traits)
      if (!in_range(v, 0.0, 100.0))
        out.push_back("meta: " + std::string(to_string(s)) + " " + std::string(name) + " out of [0,100]");
  }

  for (std::size_t t = 0; t < session.turns.size(); ++t) {
    const auto& turn = session.turns[t];
    const auto where = at("turn", t);
    if (turn.words.empty()) {
      out.push_back(where + "no words");
      continue;
    }
    for (std::size_t w = 0; w < turn.words.size(); ++w) {
      const auto& word = turn.words[w];
      if (word.speaker != turn.speaker) out.push_back(where + "speaker mismatch at word " + std::to_string(w));
      if (word.text.empty()) out.push_back(where + "empty text at word " + std::to_string(w));
      if (has_whitespace(word.text)) out.push_back(where + "whitespace in text at word " + std::to_string(w));
      if (word.start_ms < 0) out.push_back(where + "negative start_ms at word " + std::to_string(w));
      if (word.end_ms < word.start_ms) out.push_back(where + "end_ms before start_ms at word " + std::to_string(w));
      if (w > 0 && word.start_ms < turn.words[w - 1].start_ms)
        out.push_back(where + "word start times decrease at word " + std::to_string(w));
    }
    if (turn.start_ms != turn.words.front().start_ms) out.push_back(where + "start_ms differs from first word");
    if (turn.end_ms != turn.words.back().end_ms) out.push_back(where + "end_ms differs from last word");
    if (turn.delay_before_ms && *turn.delay_before_ms < 0) out.push_back(where + "negative delay_before_ms");
    if (t > 0) {
      const auto& prev = session.turns[t - 1];
      if (prev.speaker == turn.speaker) out.push_back(where + "same speaker as previous turn");
      if (turn.start_ms < prev.start_ms) out.push_back(where + "start_ms before previous turn");
    }
  }

  if (session.events) {
    for (std::size_t i = 0; i < session.events->size(); ++i) {
      const auto& e = (*session.events)[i];
      if (e.start_ms < 0) out.push_back(at("event", i) + "negative start_ms");
      if (e.end_ms < e.start_ms) out.push_back(at("event", i) + "end_ms before start_ms");
    }
  }
  if (session.au_frames) {
    for (std::size_t i = 0; i < session.au_frames->size(); ++i) {
      const auto& f = (*session.au_frames)[i];
      if (f.timestamp_ms < 0) out.push_back(at("au_frame", i) + "negative timestamp_ms");
      if (!in_range(f.intensity, 0.0, 5.0)) out.push_back(at("au_frame", i) + "intensity out of [0,5]");
    }
  }
  if (session.tone_frames) {
    for (std::size_t i = 0; i < session.tone_frames->size(); ++i) {
      const auto& f = (*session.tone_frames)[i];
      if (f.start_ms < 0) out.push_back(at("tone_frame", i) + "negative start_ms");
      if (f.end_ms < f.start_ms) out.push_back(at("tone_frame", i) + "end_ms before start_ms");
      if (!in_range(f.happy, 0.0, 1.0)) out.push_back(at("tone_frame", i) + "happy out of [0,1]");
      if (!in_range(f.sad, 0.0, 1.0)) out.push_back(at("tone_frame", i) + "sad out of [0,1]");
      if (!in_range(f.angry, 0.0, 1.0)) out.push_back(at("tone_frame", i) + "angry out of [0,1]");
    }
  }
  return out;
}

namespace {

bool read_int(std::string_view& s, std::size_t digits, int& out) {
  if (s.size() < digits) return false;
  auto r = std::from_chars(s.data(), s.data() + digits, out);
  if (r.ec != std::errc{} || r.ptr != s.data() + digits) return false;
  s.remove_prefix(digits);
  return true;
}

bool expect(std::string_view& s, char c) {
  if (s.empty() || s.front() != c) return false;
  s.remove_prefix(1);
  return true;
}

}  // namespace

std::optional<Timestamp> parse_iso8601(std::string_view s) {
  using namespace std::chrono;
  int y, mo, d, h = 0, mi = 0, sec = 0;
  if (!read_int(s, 4, y) || !expect(s, '-') || !read_int(s, 2, mo) || !expect(s, '-') || !read_int(s, 2, d))
    return std::nullopt;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  Timestamp t = time_point_cast<milliseconds>(sys_days{ymd});
  if (s.empty()) return t;
  if (s.front() != 'T' && s.front() != ' ') return std::nullopt;
  s.remove_prefix(1);
  if (!read_int(s, 2, h) || !expect(s, ':') || !read_int(s, 2, mi)) return std::nullopt;
  if (!s.empty() && s.front() == ':' && (s.remove_prefix(1), !read_int(s, 2, sec))) return std::nullopt;
  if (h > 23 || mi > 59 || sec > 60) return std::nullopt;
  t += hours{h} + minutes{mi} + seconds{sec};
  if (!s.empty() && s.front() == '.') {
    s.remove_prefix(1);
    int ms = 0, scale = 100, n = 0;
    while (!s.empty() && std::isdigit(static_cast<unsigned char>(s.front()))) {
      if (n < 3) ms += (s.front() - '0') * scale, scale /= 10;
      s.remove_prefix(1);
      ++n;
    }
    if (n == 0) return std::nullopt;
    t += milliseconds{ms};
  }
  if (s.empty() || s == "Z") return t;
  const char sign = s.front();
  if (sign != '+' && sign != '-') return std::nullopt;
  s.remove_prefix(1);
  int oh, om = 0;
  if (!read_int(s, 2, oh)) return std::nullopt;
  if (!s.empty() && s.front() == ':') s.remove_prefix(1);
  if (!s.empty() && !read_int(s, 2, om)) return std::nullopt;
  if (!s.empty()) return std::nullopt;
  const auto offset = hours{oh} + minutes{om};
  return sign == '+' ? t - offset : t + offset;
}

std::string format_iso8601(Timestamp t) {
  using namespace std::chrono;
  const auto day_point = floor<days>(t);
  const year_month_day ymd{day_point};
  const hh_mm_ss hms{t - day_point};
  char buf[40];
  const auto ms = hms.subseconds().count();
  if (ms == 0) {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lldZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<long long>(hms.hours().count()), static_cast<long long>(hms.minutes().count()),
                  static_cast<long long>(hms.seconds().count()));
  } else {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lld.%03lldZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<long long>(hms.hours().count()), static_cast<long long>(hms.minutes().count()),
                  static_cast<long long>(hms.seconds().count()), static_cast<long long>(ms));
  }
  return buf;
}

}  // namespace monah
