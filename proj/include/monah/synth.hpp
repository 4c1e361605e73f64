#pragma once

// Synthetic corpus generator. Each session is drawn from its own derived seed,
// so output does not depend on thread count.

#include <cstdint>
#include <filesystem>
#include <vector>

#include "monah/ingest.hpp"
#include "monah/model.hpp"

namespace monah {

/// Class-conditional effect sizes; 0 makes the family uninformative.
struct SynthSignal {
  double actions = 0.0;    // smile/nod/laughter rates
  double semantics = 0.0;  // positive vs negative lexicon draws
  double prosody = 0.0;    // patient response delay
  double mimicry = 0.0;    // patient tracks the doctor's rate and tone
  double history = 0.0;    // assessor leniency

  static SynthSignal none() { return {}; }
  static SynthSignal defaults();
  SynthSignal scaled(double k) const;

  friend bool operator==(const SynthSignal&, const SynthSignal&) = default;
};

struct SynthConfig {
  std::size_t n_sessions = 200;
  double positive_rate = 0.4;
  double mean_turns = 296.0;
  double sd_turns = 126.0;
  int min_turns = 40;
  double mean_words = 7.62;
  double sd_words = 12.2;
  std::size_t n_assessors = 8;
  Millis au_interval_ms = 1000;
  SynthSignal signal = SynthSignal::defaults();
  std::uint64_t seed = 1;
};

std::vector<Session> synth_sessions(const SynthConfig& config);

/// Writes sessions under out/sessions/<id>/ and out/manifest.json. Returns the manifest path.
std::filesystem::path synth_corpus(const SynthConfig& config, const std::filesystem::path& out);

}  // namespace monah
