#pragma once

// Shared fixture access and small builders for the test executables.

#include <filesystem>
#include <initializer_list>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "monah/features.hpp"
#include "monah/ingest.hpp"
#include "monah/model.hpp"
#include "monah/narrative.hpp"
#include "monah/segmentation.hpp"
#include "monah/util.hpp"

namespace test {

namespace fs = std::filesystem;

inline fs::path fixtures() { return MONAH_TEST_FIXTURES; }
inline fs::path golden_dir() { return MONAH_TEST_GOLDEN; }
inline fs::path data_dir() { return MONAH_DATA_DIR; }
inline fs::path golden_manifest() { return fixtures() / "golden" / "manifest.json"; }

inline std::string golden(const std::string& name) { return monah::read_file((golden_dir() / name).string()); }

/// Fresh scratch directory under the system temp dir.
inline fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("monah_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

/// The checked-in fixture session, its coarse vector and stats.
struct Golden {
  monah::Session session;
  monah::CoarseFeatureVector vector;
  monah::CorpusStats stats;
};

inline Golden load_golden() {
  const auto manifest = monah::load_manifest(golden_manifest());
  auto sessions = monah::load_corpus(manifest);
  std::vector<monah::SessionMeta> metas{sessions.at(0).meta};
  auto vec = monah::compute_features(sessions[0], metas, monah::Lexicon::builtin());
  auto stats = monah::CorpusStats::from_json(
      monah::read_file((fixtures() / "golden" / "stats.json").string()));
  return {std::move(sessions[0]), std::move(vec), std::move(stats)};
}

inline std::string fine_text(const std::vector<monah::FineTurn>& turns) {
  std::string out;
  for (const auto& t : turns) out += t.text + "\n";
  return out;
}

using W = std::tuple<monah::Speaker, const char*, monah::Millis, monah::Millis>;

inline std::vector<monah::WordToken> words(std::initializer_list<W> ws) {
  std::vector<monah::WordToken> out;
  for (const auto& [s, t, a, b] : ws) out.push_back({t, a, b, s});
  return out;
}

/// Minimal valid session from a word list; streams left absent.
inline monah::Session session_from(std::string id, std::initializer_list<W> ws) {
  monah::Session s;
  s.meta.session_id = std::move(id);
  s.meta.assessor_id = "sp1";
  s.turns = monah::segment(words(ws));
  monah::compute_delays(s.turns);
  return s;
}

/// Random time-ordered two-speaker stream with runs of each speaker.
inline std::vector<monah::WordToken> random_stream(std::mt19937_64& rng, std::size_t max_len = 60) {
  std::uniform_int_distribution<std::size_t> len(1, max_len);
  std::uniform_int_distribution<int> gap(1, 400), dur(0, 600), coin(0, 3);
  std::vector<monah::WordToken> out;
  const std::size_t n = len(rng);
  monah::Millis t = gap(rng);
  auto spk = coin(rng) % 2 ? monah::Speaker::Doctor : monah::Speaker::Patient;
  for (std::size_t i = 0; i < n; ++i) {
    if (coin(rng) == 0) spk = monah::other(spk);
    const monah::Millis d = dur(rng);
    out.push_back({"w" + std::to_string(i), t, t + d, spk});
    t += gap(rng);
  }
  return out;
}

}  // namespace test
