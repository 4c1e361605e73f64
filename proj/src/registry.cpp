#include <json.hpp>

#include "monah/errors.hpp"
#include "monah/features.hpp"

namespace monah {

char family_letter(Family f) {
  switch (f) {
    case Family::Demographics: return 'D';
    case Family::Actions: return 'A';
    case Family::Prosody: return 'P';
    case Family::Semantics: return 'S';
    case Family::Mimicry: return 'M';
    case Family::History: return 'H';
  }
  return '?';
}

std::optional<Family> family_from_letter(char c) {
  for (auto f : kFamilies)
    if (family_letter(f) == c) return f;
  return std::nullopt;
}

std::string_view to_string(Family f) {
  switch (f) {
    case Family::Demographics: return "demographics";
    case Family::Actions: return "actions";
    case Family::Prosody: return "prosody";
    case Family::Semantics: return "semantics";
    case Family::Mimicry: return "mimicry";
    case Family::History: return "history";
  }
  return "";
}

std::string_view to_string(Scope s) {
  switch (s) {
    case Scope::Doctor: return "doctor";
    case Scope::Patient: return "patient";
    case Scope::Session: return "session";
  }
  return "";
}

namespace {

std::optional<Family> parse_family(std::string_view s) {
  for (auto f : kFamilies)
    if (to_string(f) == s) return f;
  return std::nullopt;
}

std::optional<Scope> parse_scope(std::string_view s) {
  for (auto sc : {Scope::Doctor, Scope::Patient, Scope::Session})
    if (to_string(sc) == s) return sc;
  return std::nullopt;
}

std::vector<FeatureSpec> build_specs() {
  std::vector<FeatureSpec> specs;
  auto add = [&](Scope scope, Family fam, std::string child, std::string base, std::string agg, bool prime,
                 int tid, std::string phrase) {
    std::string name = scope == Scope::Session ? base : std::string(to_string(scope)) + "_" + base;
    specs.push_back({std::move(name), fam, std::move(child), scope, std::move(agg), prime, tid, std::move(phrase)});
  };
  const std::array<Scope, 2> speakers{Scope::Doctor, Scope::Patient};

  for (auto s : speakers) {
    const auto D = Family::Demographics;
    add(s, D, "talkativeness", "word_count", "count", true, 1, "number of words");
    add(s, D, "talkativeness", "distinct_word_count", "count", true, 1, "number of distinct words");
    add(s, D, "talkativeness", "word_proportion", "proportion", true, 1, "proportion of words");
    add(s, D, "personality", "openness", "value", true, 2, "openness");
    add(s, D, "personality", "conscientiousness", "value", true, 2, "conscientiousness");
    add(s, D, "personality", "extraversion", "value", true, 2, "extraversion");
    add(s, D, "personality", "agreeableness", "value", true, 2, "agreeableness");
    add(s, D, "personality", "neuroticism", "value", true, 2, "neuroticism");
    add(s, D, "gender", "gender_female", "indicator", true, 3, "is");
  }
  for (auto s : speakers) {
    const auto A = Family::Actions;
    add(s, A, "laughter", "laughter_count", "count", true, 4, "laughter counts");
    add(s, A, "head_nodding", "nod_count", "count", false, 5, "head nod counts");
    add(s, A, "forward_trunk_leaning", "lean_forward_count", "count", false, 6, "forward trunk leaning");
    add(s, A, "smiling", "smile_count", "count", false, 7, "smiling counts");
    add(s, A, "posiface", "posiface_positive_count", "count", false, 8, "positive face expression counts");
    add(s, A, "posiface", "posiface_negative_count", "count", false, 8, "negative face expression counts");
    for (auto au : kAuIds) {
      const std::string code = "au" + std::string(au_code(au));
      const std::string label(au_name(au));
      add(s, A, "au", code + "_min", "min", true, 9, "minimum " + label);
      add(s, A, "au", code + "_max", "max", true, 9, "maximum " + label);
      add(s, A, "au", code + "_mean", "mean", true, 9, "average " + label);
      add(s, A, "au", code + "_var", "variance", true, 9, "variance " + label);
    }
  }
  for (auto s : speakers) {
    const auto P = Family::Prosody;
    add(s, P, "delay", "delay_min", "min", true, 10, "minimum delay");
    add(s, P, "delay", "delay_max", "max", true, 10, "maximum delay");
    add(s, P, "delay", "delay_mean", "mean", true, 10, "average delay");
    add(s, P, "delay", "delay_var", "variance", true, 10, "variance delay");
    add(s, P, "speech_rate", "speech_rate_mean", "mean", true, 11, "speech rate");
    add(s, P, "tone", "tone_happy_mean", "mean", false, 12, "happy tone");
    add(s, P, "tone", "tone_sad_mean", "mean", false, 12, "sad tone");
    add(s, P, "tone", "tone_angry_mean", "mean", false, 12, "angry tone");
  }
  for (auto s : speakers) {
    const auto S = Family::Semantics;
    add(s, S, "sentiment", "sentiment_composite", "mean", false, 13, "composite sentiment");
    add(s, S, "sentiment", "sentiment_positive", "mean", false, 13, "positive sentiment");
    add(s, S, "sentiment", "sentiment_neutral", "mean", false, 13, "neutral sentiment");
    add(s, S, "sentiment", "sentiment_negative", "mean", false, 13, "negative sentiment");
    add(s, S, "questions", "open_question_prop", "proportion", false, 14, "open questions");
    add(s, S, "questions", "closed_question_prop", "proportion", false, 14, "closed questions");
  }
  {
    const auto M = Family::Mimicry;
    const auto sc = Scope::Session;
    add(sc, M, "speech_rate", "mimicry_speech_rate_dtw", "dtw", false, 15, "speech rate mimicry");
    add(sc, M, "tone", "mimicry_tone_happy_dtw", "dtw", false, 16, "happy tone mimicry");
    add(sc, M, "tone", "mimicry_tone_sad_dtw", "dtw", false, 16, "sad tone mimicry");
    add(sc, M, "tone", "mimicry_tone_angry_dtw", "dtw", false, 16, "angry tone mimicry");
    add(sc, M, "tone", "mimicry_tone_dtw", "dtw", false, 16, "tone mimicry");
  }
  {
    // The assessor is the simulated patient.
    const auto H = Family::History;
    add(Scope::Patient, H, "num_sessions", "num_past_sessions", "count", false, 17, "number of sessions before this");
    add(Scope::Patient, H, "extreme_marks", "prop_max_marks", "proportion", false, 18,
        "question four proportion given maximum marks");
  }
  return specs;
}

}  // namespace

const FeatureRegistry& FeatureRegistry::builtin() {
  static const FeatureRegistry reg(build_specs());
  return reg;
}

FeatureRegistry::FeatureRegistry(std::vector<FeatureSpec> specs) : specs_(std::move(specs)) {
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    if (!by_name_.emplace(specs_[i].name, i).second)
      throw SchemaError("name", "duplicate feature name in registry: " + specs_[i].name);
  }
}

std::optional<std::size_t> FeatureRegistry::find(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

std::size_t FeatureRegistry::index_of(std::string_view name) const {
  if (auto i = find(name)) return *i;
  throw UnknownFeature(std::string(name));
}

std::string FeatureRegistry::to_json() const {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& s : specs_) {
    arr.push_back({{"name", s.name},
                   {"family", to_string(s.family)},
                   {"child", s.child},
                   {"scope", to_string(s.scope)},
                   {"aggregation", s.aggregation},
                   {"prime", s.prime},
                   {"template", s.template_id},
                   {"phrase", s.phrase}});
  }
  nlohmann::ordered_json doc = {{"features", arr}};
  return doc.dump(2) + "\n";
}

FeatureRegistry FeatureRegistry::from_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("registry.json", 1, e.what());
  }
  if (!doc.contains("features") || !doc["features"].is_array()) throw SchemaError("features", "registry: missing features");
  std::vector<FeatureSpec> specs;
  for (const auto& e : doc["features"]) {
    for (const char* key : {"name", "family", "child", "scope", "aggregation", "prime", "template", "phrase"})
      if (!e.contains(key)) throw SchemaError(key, std::string("registry entry missing field: ") + key);
    auto fam = parse_family(e["family"].get<std::string>());
    auto scope = parse_scope(e["scope"].get<std::string>());
    if (!fam) throw SchemaError("family", "registry: unknown family");
    if (!scope) throw SchemaError("scope", "registry: unknown scope");
    specs.push_back({e["name"].get<std::string>(), *fam, e["child"].get<std::string>(), *scope,
                     e["aggregation"].get<std::string>(), e["prime"].get<bool>(), e["template"].get<int>(),
                     e["phrase"].get<std::string>()});
  }
  return FeatureRegistry(std::move(specs));
}

std::optional<double> CoarseFeatureVector::get(std::string_view name, const FeatureRegistry& reg) const {
  const auto i = reg.index_of(name);
  return i < values.size() ? values[i] : std::nullopt;
}

}  // namespace monah
