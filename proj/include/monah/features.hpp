#pragma once

// Session-level coarse features, one registry entry per numeric column.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "monah/model.hpp"

namespace monah {

enum class Family { Demographics, Actions, Prosody, Semantics, Mimicry, History };
inline constexpr std::array<Family, 6> kFamilies{Family::Demographics, Family::Actions, Family::Prosody,
                                                 Family::Semantics,    Family::Mimicry, Family::History};

/// Single-letter abbreviation: D, A, P, S, M, H.
char family_letter(Family f);
std::optional<Family> family_from_letter(char c);
std::string_view to_string(Family f);

/// Speaker a feature describes; Session for cross-speaker features.
enum class Scope { Doctor, Patient, Session };
std::string_view to_string(Scope s);

struct FeatureSpec {
  std::string name;
  Family family;
  std::string child;        // Table-style child, e.g. "talkativeness"
  Scope scope;
  std::string aggregation;  // count, min, max, mean, variance, proportion, value, indicator, dtw
  bool prime;               // part of the pre-existing (primed) subset of its family
  int template_id;          // coarse template that renders it
  std::string phrase;       // clause body without speaker and bucket words

  friend bool operator==(const FeatureSpec&, const FeatureSpec&) = default;
};

/// Canonical, ordered feature enumeration.
class FeatureRegistry {
 public:
  static const FeatureRegistry& builtin();

  explicit FeatureRegistry(std::vector<FeatureSpec> specs);

  std::size_t size() const noexcept { return specs_.size(); }
  const std::vector<FeatureSpec>& specs() const noexcept { return specs_; }
  const FeatureSpec& operator[](std::size_t i) const { return specs_[i]; }
  std::optional<std::size_t> find(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;  // throws UnknownFeature

  std::string to_json() const;
  static FeatureRegistry from_json(std::string_view text);

 private:
  std::vector<FeatureSpec> specs_;
  std::unordered_map<std::string, std::size_t> by_name_;
};

/// Registry-ordered values; `nullopt` marks an absent value (never zero-filled).
struct CoarseFeatureVector {
  std::string session_id;
  std::vector<std::optional<double>> values;

  std::optional<double> get(std::string_view name,
                            const FeatureRegistry& reg = FeatureRegistry::builtin()) const;

  friend bool operator==(const CoarseFeatureVector&, const CoarseFeatureVector&) = default;
};

using FeatureParts = std::vector<std::pair<std::string, std::optional<double>>>;

class Lexicon {
 public:
  Lexicon() = default;
  explicit Lexicon(std::unordered_map<std::string, double> valences) : valences_(std::move(valences)) {}

  /// The lexicon shipped in data/lexicon.tsv, compiled in.
  static const Lexicon& builtin();
  static Lexicon parse(std::string_view tsv, const std::string& source = "lexicon.tsv");
  static Lexicon load(const std::filesystem::path& path);

  std::optional<double> valence(std::string_view word) const;
  std::size_t size() const noexcept { return valences_.size(); }
  /// Entries sorted by word.
  std::vector<std::pair<std::string, double>> entries() const;

 private:
  std::unordered_map<std::string, double> valences_;
};

struct TurnSentiment {
  double composite = 0.0;  // [-1, 1]
  double positive = 0.0;
  double neutral = 1.0;
  double negative = 0.0;
};

TurnSentiment score_sentiment(const TalkTurn& turn, const Lexicon& lexicon);

enum class QuestionType { None, Open, Closed };
/// First-token heuristic: wh-words and prompts are open, auxiliaries closed.
QuestionType classify_question(const TalkTurn& turn);

/// Classic DTW: |a_i - b_j| local cost, steps (1,0),(0,1),(1,1), no window,
/// no normalisation. Throws EmptySeries.
double dtw_distance(std::span<const double> a, std::span<const double> b);

/// Population summary over a sample.
struct Summary {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double variance = 0.0;
};
std::optional<Summary> summarize(std::span<const double> xs);

/// Per-turn series of one speaker, in that speaker's turn order.
struct MimicrySeries {
  std::array<std::vector<double>, 2> speech_rate;
  std::array<std::vector<double>, 2> happy;
  std::array<std::vector<double>, 2> sad;
  std::array<std::vector<double>, 2> angry;
};

/// Mean tone of a speaker's frames overlapping [start_ms, end_ms].
struct ToneMean {
  double happy, sad, angry;
};
std::optional<ToneMean> turn_tone(const Session& session, const TalkTurn& turn);

MimicrySeries mimicry_series(const Session& session);

FeatureParts compute_demographics(const Session& session);
FeatureParts compute_actions(const Session& session);
FeatureParts compute_prosody(const Session& session);
FeatureParts compute_semantics(const Session& session, const Lexicon& lexicon);
FeatureParts compute_mimicry(const Session& session);
FeatureParts compute_history(std::span<const SessionMeta> all_meta, std::string_view target);

/// Merges partial vectors into registry order. Throws UnknownFeature.
CoarseFeatureVector assemble(std::string session_id, std::span<const FeatureParts> parts,
                             const FeatureRegistry& reg = FeatureRegistry::builtin());

/// All six families for one session.
CoarseFeatureVector compute_features(const Session& session, std::span<const SessionMeta> all_meta,
                                     const Lexicon& lexicon);

/// features.csv: session_id plus one column per registry name; absent is an empty cell.
void write_features_csv(std::ostream& os, std::span<const CoarseFeatureVector> vectors,
                        const FeatureRegistry& reg = FeatureRegistry::builtin());
std::vector<CoarseFeatureVector> read_features_csv(std::istream& is, const std::string& source = "features.csv",
                                                   const FeatureRegistry& reg = FeatureRegistry::builtin());

}  // namespace monah
