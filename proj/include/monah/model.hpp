#pragma once

// Shared domain types for a recorded doctor/patient session.
//
// All times are integer milliseconds from the start of the recording; the
// assessment timestamp is absolute (UTC).

#include <array>
#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace monah {

using Millis = std::int64_t;
using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

enum class Speaker { Doctor = 0, Patient = 1 };
inline constexpr std::array<Speaker, 2> kSpeakers{Speaker::Doctor, Speaker::Patient};

std::string_view to_string(Speaker s);
std::optional<Speaker> parse_speaker(std::string_view s);
constexpr std::size_t index(Speaker s) { return static_cast<std::size_t>(s); }
constexpr Speaker other(Speaker s) { return s == Speaker::Doctor ? Speaker::Patient : Speaker::Doctor; }

struct WordToken {
  std::string text;
  Millis start_ms = 0;
  Millis end_ms = 0;
  Speaker speaker = Speaker::Doctor;

  friend bool operator==(const WordToken&, const WordToken&) = default;
};

enum class EventKind { Laughter, Nod, LeanForward, Smile, PosiFacePositive, PosiFaceNegative };
inline constexpr std::array<EventKind, 6> kEventKinds{
    EventKind::Laughter, EventKind::Nod,   EventKind::LeanForward,
    EventKind::Smile,    EventKind::PosiFacePositive, EventKind::PosiFaceNegative};

std::string_view to_string(EventKind k);
std::optional<EventKind> parse_event_kind(std::string_view s);

struct FeatureEvent {
  EventKind kind = EventKind::Laughter;
  Speaker speaker = Speaker::Doctor;
  Millis start_ms = 0;
  Millis end_ms = 0;

  friend bool operator==(const FeatureEvent&, const FeatureEvent&) = default;
};

enum class AuId { AU05, AU17, AU20, AU25 };
inline constexpr std::array<AuId, 4> kAuIds{AuId::AU05, AuId::AU17, AuId::AU20, AuId::AU25};

/// Two-digit code as used in au.csv ("05", "17", ...).
std::string_view au_code(AuId au);
std::optional<AuId> parse_au(std::string_view s);
/// FACS name of the action unit ("upper lid raiser", ...).
std::string_view au_name(AuId au);

struct AuFrame {
  Speaker speaker = Speaker::Doctor;
  Millis timestamp_ms = 0;
  AuId au = AuId::AU05;
  double intensity = 0.0;  // [0, 5]
  bool present = false;

  friend bool operator==(const AuFrame&, const AuFrame&) = default;
};

struct ToneFrame {
  Speaker speaker = Speaker::Doctor;
  Millis start_ms = 0;
  Millis end_ms = 0;
  double happy = 0.0;
  double sad = 0.0;
  double angry = 0.0;

  friend bool operator==(const ToneFrame&, const ToneFrame&) = default;
};

enum class Gender { Male, Female };
std::string_view to_string(Gender g);
std::optional<Gender> parse_gender(std::string_view s);

/// Big-five percentiles in [0, 100].
struct Personality {
  double openness = 50.0;
  double conscientiousness = 50.0;
  double extraversion = 50.0;
  double agreeableness = 50.0;
  double neuroticism = 50.0;

  friend bool operator==(const Personality&, const Personality&) = default;
};

enum class RapportScore { Fail, PassMinus, Pass, PassPlus };
inline constexpr std::array<RapportScore, 4> kRapportScores{
    RapportScore::Fail, RapportScore::PassMinus, RapportScore::Pass, RapportScore::PassPlus};
std::string_view to_string(RapportScore r);
std::optional<RapportScore> parse_rapport(std::string_view s);

struct SessionMeta {
  std::string session_id;
  std::string assessor_id;
  Timestamp assessed_at{};
  std::array<Gender, 2> gender{Gender::Male, Gender::Male};  // indexed by Speaker
  std::array<Personality, 2> personality{};
  RapportScore rapport_score = RapportScore::Fail;

  friend bool operator==(const SessionMeta&, const SessionMeta&) = default;
};

struct TalkTurn {
  Speaker speaker = Speaker::Doctor;
  std::vector<WordToken> words;
  Millis start_ms = 0;
  Millis end_ms = 0;
  std::optional<Millis> delay_before_ms;  // absent for the first turn

  friend bool operator==(const TalkTurn&, const TalkTurn&) = default;
};

/// A segmented session. Optional streams are `nullopt` when the corpus has
/// no file for them, which is distinct from an empty stream.
struct Session {
  SessionMeta meta;
  std::vector<TalkTurn> turns;
  std::optional<std::vector<FeatureEvent>> events;
  std::optional<std::vector<AuFrame>> au_frames;
  std::optional<std::vector<ToneFrame>> tone_frames;

  friend bool operator==(const Session&, const Session&) = default;
};

/// Rapport-building is positive only for the top grade.
constexpr bool binarize_label(RapportScore score) { return score == RapportScore::PassPlus; }

/// Checks every type invariant. Returns one human-readable entry per
/// violation, naming the record kind and its 0-based index.
std::vector<std::string> validate_session(const Session& session);

/// ISO-8601 helpers for SessionMeta::assessed_at. Accepts an optional
/// fractional part and a `Z` or `+hh:mm` offset.
std::optional<Timestamp> parse_iso8601(std::string_view s);
std::string format_iso8601(Timestamp t);

}  // namespace monah
