#pragma once

// On-disk corpus formats.
//
//   manifest.json   {"root": ".", "sessions": [{"session_id", "words": [paths...],
//                    "events", "au", "tone", "meta"}]}   (events/au/tone optional)
//   words*.jsonl    {"session_id","speaker","word","start_ms","end_ms"}
//   events.jsonl    {"session_id","speaker","kind","start_ms","end_ms"}
//   au.csv          session_id,speaker,timestamp_ms,au_id,intensity,present
//   tone.jsonl      {"session_id","speaker","start_ms","end_ms","happy","sad","angry"}
//   meta.json       {"session_id","assessor_id","assessed_at","gender":{doctor,patient},
//                    "personality":{doctor:{...},patient:{...}},"rapport_score"}

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "monah/model.hpp"
#include "monah/narrative.hpp"

namespace monah {

namespace fs = std::filesystem;

struct ManifestEntry {
  std::string session_id;
  std::vector<fs::path> words;  // usually one file per speaker
  std::optional<fs::path> events;
  std::optional<fs::path> au;
  std::optional<fs::path> tone;
  fs::path meta;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct CorpusManifest {
  fs::path root;  // absolute after load; entry paths are relative to it
  std::vector<ManifestEntry> sessions;

  fs::path resolve(const fs::path& p) const { return p.is_absolute() ? p : root / p; }
};

/// Reads manifest.json; checks ids are unique and every listed file exists.
CorpusManifest load_manifest(const fs::path& manifest_path);
/// Writes manifest.json with root "." (entries relative to the manifest directory).
void write_manifest(const CorpusManifest& manifest, const fs::path& manifest_path);

/// Merges words from all word files (ordered by start_ms, end_ms, doctor first,
/// then file order), segments into turns and validates. Words are lowercased.
Session load_session(const CorpusManifest& manifest, const ManifestEntry& entry);
SessionMeta load_meta(const CorpusManifest& manifest, const ManifestEntry& entry);
std::vector<Session> load_corpus(const CorpusManifest& manifest);

/// Serialises a session under root/subdir and returns its manifest entry.
ManifestEntry write_session(const Session& session, const fs::path& root, const fs::path& subdir);

std::string meta_to_json(const SessionMeta& meta);
SessionMeta meta_from_json(const std::string& text, const std::string& source = "meta.json");

std::string narrative_to_json(const Narrative& narrative);
Narrative narrative_from_json(const std::string& text, const std::string& source = "narrative.json");
void write_narrative(const Narrative& narrative, const fs::path& path);
Narrative read_narrative(const fs::path& path);
/// Printable form: coarse text, a blank line, then one line per fine turn.
std::string narrative_to_text(const Narrative& narrative);

}  // namespace monah
