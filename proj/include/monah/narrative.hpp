#pragma once

// Training-set standardisation and template-based narrative weaving.

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "monah/features.hpp"
#include "monah/model.hpp"

namespace monah {

struct StatEntry {
  double mean = 0.0;
  double sd = 0.0;  // population
  std::size_t n = 0;

  friend bool operator==(const StatEntry&, const StatEntry&) = default;
};

/// Per-feature training mean/sd. Coarse feature names plus per-turn entries
/// named "<speaker>_turn_<channel>" used by the fine templates.
struct CorpusStats {
  std::map<std::string, StatEntry> entries;

  const StatEntry* find(std::string_view name) const;
  std::string to_json() const;
  static CorpusStats from_json(const std::string& text, const std::string& source = "stats.json");

  friend bool operator==(const CorpusStats&, const CorpusStats&) = default;
};

/// Mean and population sd over non-absent training values. Features with
/// fewer than two values get no entry. Throws InsufficientData for < 2 vectors.
CorpusStats fit_stats(std::span<const CoarseFeatureVector> training,
                      const FeatureRegistry& reg = FeatureRegistry::builtin());

/// Turn-level speech rate and tone statistics per speaker over training sessions.
CorpusStats fit_turn_stats(std::span<const Session> training);

/// Union of both stat sets (coarse entries first, no name overlap).
CorpusStats merge(CorpusStats a, const CorpusStats& b);

/// (x - mean) / sd, or 0 when sd == 0.
double z_score(double x, const StatEntry& stats);
double z_score(double x, const CorpusStats& stats, std::string_view name);  // throws MissingStats

enum class Bucket { VeryLow, Low, Neutral, High, VeryHigh };
Bucket bucket(double z);
/// "very low", "low", "", "high", "very high".
std::string_view bucket_word(Bucket b);

/// Which families to weave. Coarse families are upper-case letters
/// (D A P S M H, primed with '); fine families lower-case v p a.
enum class Level { Off, Prime, Full };

struct WeaveConfig {
  std::array<Level, 6> coarse{};  // indexed by Family
  bool verbatim = false;
  Level fine_prosody = Level::Off;
  Level fine_actions = Level::Off;

  /// Accepts e.g. "DAPSMH-vpa", "D'A'P'", "H", "vp'a'". Throws ConfigError.
  static WeaveConfig parse(std::string_view text);
  std::string format() const;

  bool any_coarse() const;
  bool any_fine() const { return verbatim; }
  /// Whether a registry entry belongs to an enabled coarse family (prime-aware).
  bool includes(const FeatureSpec& spec) const;
  WeaveConfig coarse_only() const;

  friend bool operator==(const WeaveConfig&, const WeaveConfig&) = default;
};

struct FineTurn {
  std::size_t turn_index = 0;
  Speaker speaker = Speaker::Doctor;
  std::string text;

  friend bool operator==(const FineTurn&, const FineTurn&) = default;
};

struct Narrative {
  std::string session_id;
  std::string coarse_text;
  std::vector<FineTurn> fine_turns;

  friend bool operator==(const Narrative&, const Narrative&) = default;
};

/// Spelled-out integer for 0..20 ("two", "twelve").
std::string_view number_word(int n);

/// "after <n> hundred milliseconds" for delays >= 200 ms, n = floor(delay/100) clamped to [2, 12].
std::optional<std::string> delay_phrase(Millis delay_ms);
/// Session-standardised delay word: "short" (z < 1), "long" (z < 2), "significantly long".
std::string_view delay_length_word(double z);
/// "quickly" for 1 < z < 2, "very quickly" for z >= 2, else empty.
std::string_view speed_adverb(double z);

/// AU held for the whole turn: every frame of that speaker/AU inside the turn
/// span is present and the frames cover at least 90% of it.
bool au_covers_turn(std::span<const AuFrame> frames, Speaker speaker, AuId au, const TalkTurn& turn);

/// Session-level sentences. Missing stats are skipped and reported in `warnings`.
std::string weave_coarse(const CoarseFeatureVector& vector, const CorpusStats& stats, const WeaveConfig& config,
                         std::vector<std::string>* warnings = nullptr,
                         const FeatureRegistry& reg = FeatureRegistry::builtin());

/// One entry per turn (empty when verbatim is off).
std::vector<FineTurn> weave_fine(const Session& session, const CorpusStats& stats, const WeaveConfig& config,
                                 std::vector<std::string>* warnings = nullptr);

Narrative weave(const Session& session, const CoarseFeatureVector& vector, const CorpusStats& stats,
                const WeaveConfig& config, std::vector<std::string>* warnings = nullptr);

}  // namespace monah
