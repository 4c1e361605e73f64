#include "monah/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "monah/errors.hpp"
#include "monah/segmentation.hpp"
#include "monah/util.hpp"

namespace monah {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

// Field access with schema errors that name the field.

const json& field(const json& obj, const char* name, const std::string& where) {
  if (!obj.is_object() || !obj.contains(name) || obj[name].is_null())
    throw SchemaError(name, where + ": missing field '" + name + "'");
  return obj[name];
}

std::string get_string(const json& obj, const char* name, const std::string& where) {
  const auto& v = field(obj, name, where);
  if (!v.is_string()) throw SchemaError(name, where + ": field '" + name + "' must be a string");
  return v.get<std::string>();
}

Millis get_millis(const json& obj, const char* name, const std::string& where) {
  const auto& v = field(obj, name, where);
  if (!v.is_number_integer()) throw SchemaError(name, where + ": field '" + name + "' must be an integer");
  return v.get<Millis>();
}

double get_real(const json& obj, const char* name, const std::string& where) {
  const auto& v = field(obj, name, where);
  if (!v.is_number()) throw SchemaError(name, where + ": field '" + name + "' must be a number");
  return v.get<double>();
}

Speaker get_speaker(const json& obj, const std::string& where) {
  const auto s = get_string(obj, "speaker", where);
  auto sp = parse_speaker(s);
  if (!sp) throw SchemaError("speaker", where + ": unknown speaker '" + s + "'");
  return *sp;
}

void check_session_id(const json& obj, const std::string& expected, const std::string& where) {
  const auto id = get_string(obj, "session_id", where);
  if (id != expected) throw SchemaError("session_id", where + ": session_id '" + id + "' does not match '" + expected + "'");
}

/// Calls fn(object, where) for each non-blank line of a JSONL file.
template <typename Fn>
void for_each_jsonl(const fs::path& path, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(path.string(), line_no, e.what());
    }
    if (!obj.is_object()) throw ParseError(path.string(), line_no, "expected a JSON object");
    fn(obj, path.string() + ":" + std::to_string(line_no));
  }
}

json parse_json_file(const fs::path& path) {
  const auto text = read_file(path.string());
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string(), 1, e.what());
  }
}

std::vector<WordToken> read_words(const fs::path& path, const std::string& session_id) {
  std::vector<WordToken> out;
  for_each_jsonl(path, [&](const json& obj, const std::string& where) {
    check_session_id(obj, session_id, where);
    WordToken w;
    w.speaker = get_speaker(obj, where);
    w.text = to_lower_ascii(get_string(obj, "word", where));
    w.start_ms = get_millis(obj, "start_ms", where);
    w.end_ms = get_millis(obj, "end_ms", where);
    out.push_back(std::move(w));
  });
  return out;
}

std::vector<FeatureEvent> read_events(const fs::path& path, const std::string& session_id) {
  std::vector<FeatureEvent> out;
  for_each_jsonl(path, [&](const json& obj, const std::string& where) {
    check_session_id(obj, session_id, where);
    FeatureEvent e;
    e.speaker = get_speaker(obj, where);
    const auto kind = get_string(obj, "kind", where);
    auto k = parse_event_kind(kind);
    if (!k) throw SchemaError("kind", where + ": unknown event kind '" + kind + "'");
    e.kind = *k;
    e.start_ms = get_millis(obj, "start_ms", where);
    e.end_ms = get_millis(obj, "end_ms", where);
    out.push_back(e);
  });
  return out;
}

std::vector<ToneFrame> read_tone(const fs::path& path, const std::string& session_id) {
  std::vector<ToneFrame> out;
  for_each_jsonl(path, [&](const json& obj, const std::string& where) {
    check_session_id(obj, session_id, where);
    ToneFrame f;
    f.speaker = get_speaker(obj, where);
    f.start_ms = get_millis(obj, "start_ms", where);
    f.end_ms = get_millis(obj, "end_ms", where);
    f.happy = get_real(obj, "happy", where);
    f.sad = get_real(obj, "sad", where);
    f.angry = get_real(obj, "angry", where);
    out.push_back(f);
  });
  return out;
}

std::vector<AuFrame> read_au(const fs::path& path, const std::string& session_id) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::string src = path.string();
  std::string line;
  if (!std::getline(in, line)) throw ParseError(src, 1, "missing header");
  const auto header = split(trim(line), ',');
  const std::array<std::string_view, 6> expected{"session_id", "speaker", "timestamp_ms", "au_id", "intensity", "present"};
  std::array<std::size_t, 6> col{};
  for (std::size_t k = 0; k < expected.size(); ++k) {
    auto it = std::find(header.begin(), header.end(), expected[k]);
    if (it == header.end()) throw SchemaError(std::string(expected[k]), src + ": missing column '" + std::string(expected[k]) + "'");
    col[k] = static_cast<std::size_t>(it - header.begin());
  }
  std::vector<AuFrame> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty()) continue;
    const auto cells = split(body, ',');
    if (cells.size() != header.size()) throw ParseError(src, line_no, "wrong number of cells");
    const auto where = src + ":" + std::to_string(line_no);
    if (trim(cells[col[0]]) != session_id)
      throw SchemaError("session_id", where + ": session_id does not match '" + session_id + "'");
    AuFrame f;
    auto sp = parse_speaker(trim(cells[col[1]]));
    if (!sp) throw SchemaError("speaker", where + ": unknown speaker");
    f.speaker = *sp;
    auto ts = parse_double(cells[col[2]]);
    if (!ts || *ts != static_cast<double>(static_cast<Millis>(*ts)))
      throw ParseError(src, line_no, "timestamp_ms must be an integer");
    f.timestamp_ms = static_cast<Millis>(*ts);
    auto au = parse_au(trim(cells[col[3]]));
    if (!au) throw SchemaError("au_id", where + ": au_id must be one of 05,17,20,25");
    f.au = *au;
    auto intensity = parse_double(cells[col[4]]);
    if (!intensity) throw ParseError(src, line_no, "bad intensity");
    f.intensity = *intensity;
    const auto present = trim(cells[col[5]]);
    if (present == "1" || present == "true") {
      f.present = true;
    } else if (present == "0" || present == "false") {
      f.present = false;
    } else {
      throw ParseError(src, line_no, "present must be 0/1 or true/false");
    }
    out.push_back(f);
  }
  return out;
}

ordered_json personality_json(const Personality& p) {
  return {{"openness", p.openness},
          {"conscientiousness", p.conscientiousness},
          {"extraversion", p.extraversion},
          {"agreeableness", p.agreeableness},
          {"neuroticism", p.neuroticism}};
}

std::string path_string(const fs::path& p) { return p.generic_string(); }

}  // namespace

// ---------------------------------------------------------------------------
// meta.json

std::string meta_to_json(const SessionMeta& m) {
  ordered_json doc = {
      {"session_id", m.session_id},
      {"assessor_id", m.assessor_id},
      {"assessed_at", format_iso8601(m.assessed_at)},
      {"gender", {{"doctor", to_string(m.gender[0])}, {"patient", to_string(m.gender[1])}}},
      {"personality", {{"doctor", personality_json(m.personality[0])}, {"patient", personality_json(m.personality[1])}}},
      {"rapport_score", to_string(m.rapport_score)},
  };
  return doc.dump(2) + "\n";
}

SessionMeta meta_from_json(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(source, 1, e.what());
  }
  SessionMeta m;
  m.session_id = get_string(doc, "session_id", source);
  m.assessor_id = get_string(doc, "assessor_id", source);
  const auto at = get_string(doc, "assessed_at", source);
  auto ts = parse_iso8601(at);
  if (!ts) throw SchemaError("assessed_at", source + ": assessed_at is not ISO-8601: " + at);
  m.assessed_at = *ts;
  const auto& gender = field(doc, "gender", source);
  const auto& pers = field(doc, "personality", source);
  for (auto s : kSpeakers) {
    const auto name = std::string(to_string(s));
    const auto g = get_string(gender, name.c_str(), source + " gender");
    auto pg = parse_gender(g);
    if (!pg) throw SchemaError("gender", source + ": gender must be male or female");
    m.gender[index(s)] = *pg;
    const auto& p = field(pers, name.c_str(), source + " personality");
    auto& out = m.personality[index(s)];
    const auto where = source + " personality." + name;
    out.openness = get_real(p, "openness", where);
    out.conscientiousness = get_real(p, "conscientiousness", where);
    out.extraversion = get_real(p, "extraversion", where);
    out.agreeableness = get_real(p, "agreeableness", where);
    out.neuroticism = get_real(p, "neuroticism", where);
  }
  const auto score = get_string(doc, "rapport_score", source);
  auto r = parse_rapport(score);
  if (!r) throw SchemaError("rapport_score", source + ": unknown rapport_score '" + score + "'");
  m.rapport_score = *r;
  return m;
}

// ---------------------------------------------------------------------------
// manifest

CorpusManifest load_manifest(const fs::path& manifest_path) {
  const auto doc = parse_json_file(manifest_path);
  const std::string src = manifest_path.string();
  CorpusManifest m;
  fs::path root = ".";
  if (doc.contains("root") && doc["root"].is_string()) root = doc["root"].get<std::string>();
  m.root = root.is_absolute() ? root : fs::absolute(manifest_path).parent_path() / root;
  m.root = m.root.lexically_normal();
  const auto& sessions = field(doc, "sessions", src);
  if (!sessions.is_array()) throw SchemaError("sessions", src + ": sessions must be an array");
  std::set<std::string> seen;
  for (const auto& s : sessions) {
    ManifestEntry e;
    e.session_id = get_string(s, "session_id", src);
    if (!seen.insert(e.session_id).second) throw SchemaError("session_id", src + ": duplicate session_id " + e.session_id);
    const auto& words = field(s, "words", src);
    if (words.is_string()) {
      e.words.emplace_back(words.get<std::string>());
    } else if (words.is_array()) {
      for (const auto& w : words) e.words.emplace_back(w.get<std::string>());
    } else {
      throw SchemaError("words", src + ": words must be a path or list of paths");
    }
    auto opt = [&](const char* key) -> std::optional<fs::path> {
      if (!s.contains(key) || s[key].is_null()) return std::nullopt;
      return fs::path(s[key].get<std::string>());
    };
    e.events = opt("events");
    e.au = opt("au");
    e.tone = opt("tone");
    e.meta = get_string(s, "meta", src);

    std::vector<fs::path> files = e.words;
    files.push_back(e.meta);
    for (const auto& o : {e.events, e.au, e.tone})
      if (o) files.push_back(*o);
    for (const auto& f : files)
      if (!fs::exists(m.resolve(f))) throw IoError(src + ": session " + e.session_id + ": missing file " + m.resolve(f).string());
    m.sessions.push_back(std::move(e));
  }
  return m;
}

void write_manifest(const CorpusManifest& manifest, const fs::path& manifest_path) {
  ordered_json sessions = ordered_json::array();
  for (const auto& e : manifest.sessions) {
    ordered_json words = ordered_json::array();
    for (const auto& w : e.words) words.push_back(path_string(w));
    ordered_json s = {{"session_id", e.session_id}, {"words", words}};
    s["events"] = e.events ? ordered_json(path_string(*e.events)) : ordered_json(nullptr);
    s["au"] = e.au ? ordered_json(path_string(*e.au)) : ordered_json(nullptr);
    s["tone"] = e.tone ? ordered_json(path_string(*e.tone)) : ordered_json(nullptr);
    s["meta"] = path_string(e.meta);
    sessions.push_back(std::move(s));
  }
  ordered_json doc = {{"root", "."}, {"sessions", sessions}};
  write_file(manifest_path.string(), doc.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// sessions

SessionMeta load_meta(const CorpusManifest& manifest, const ManifestEntry& entry) {
  const auto path = manifest.resolve(entry.meta);
  auto meta = meta_from_json(read_file(path.string()), path.string());
  if (meta.session_id != entry.session_id)
    throw SchemaError("session_id", path.string() + ": session_id does not match manifest entry " + entry.session_id);
  return meta;
}

Session load_session(const CorpusManifest& manifest, const ManifestEntry& entry) {
  Session session;
  session.meta = load_meta(manifest, entry);

  std::vector<WordToken> tokens;
  for (const auto& f : entry.words) {
    auto words = read_words(manifest.resolve(f), entry.session_id);
    tokens.insert(tokens.end(), std::make_move_iterator(words.begin()), std::make_move_iterator(words.end()));
  }
  // Stable: equal keys keep file order, then line order.
  std::stable_sort(tokens.begin(), tokens.end(), [](const WordToken& a, const WordToken& b) {
    return std::tie(a.start_ms, a.end_ms, a.speaker) < std::tie(b.start_ms, b.end_ms, b.speaker);
  });
  session.turns = segment(tokens);
  compute_delays(session.turns);

  if (entry.events) session.events = read_events(manifest.resolve(*entry.events), entry.session_id);
  if (entry.au) session.au_frames = read_au(manifest.resolve(*entry.au), entry.session_id);
  if (entry.tone) session.tone_frames = read_tone(manifest.resolve(*entry.tone), entry.session_id);

  auto violations = validate_session(session);
  if (!violations.empty()) {
    for (auto& v : violations) v = entry.session_id + ": " + v;
    throw ValidationError(std::move(violations));
  }
  return session;
}

std::vector<Session> load_corpus(const CorpusManifest& manifest) {
  std::vector<Session> out(manifest.sessions.size());
  parallel_for(out.size(), [&](std::size_t i) { out[i] = load_session(manifest, manifest.sessions[i]); });
  return out;
}

ManifestEntry write_session(const Session& session, const fs::path& root, const fs::path& subdir) {
  const auto& id = session.meta.session_id;
  fs::create_directories(root / subdir);
  ManifestEntry e;
  e.session_id = id;

  for (auto s : kSpeakers) {
    std::string body;
    for (const auto& turn : session.turns)
      for (const auto& w : turn.words) {
        if (w.speaker != s) continue;
        ordered_json line = {{"session_id", id},
                             {"speaker", to_string(w.speaker)},
                             {"word", w.text},
                             {"start_ms", w.start_ms},
                             {"end_ms", w.end_ms}};
        body += line.dump() + "\n";
      }
    const auto rel = subdir / ("words_" + std::string(to_string(s)) + ".jsonl");
    write_file((root / rel).string(), body);
    e.words.push_back(rel);
  }

  if (session.events) {
    std::string body;
    for (const auto& ev : *session.events) {
      ordered_json line = {{"session_id", id},
                           {"speaker", to_string(ev.speaker)},
                           {"kind", to_string(ev.kind)},
                           {"start_ms", ev.start_ms},
                           {"end_ms", ev.end_ms}};
      body += line.dump() + "\n";
    }
    e.events = subdir / "events.jsonl";
    write_file((root / *e.events).string(), body);
  }
  if (session.au_frames) {
    std::string body = "session_id,speaker,timestamp_ms,au_id,intensity,present\n";
    for (const auto& f : *session.au_frames) {
      body += id + "," + std::string(to_string(f.speaker)) + "," + std::to_string(f.timestamp_ms) + "," +
              std::string(au_code(f.au)) + "," + format_double(f.intensity) + "," + (f.present ? "1" : "0") + "\n";
    }
    e.au = subdir / "au.csv";
    write_file((root / *e.au).string(), body);
  }
  if (session.tone_frames) {
    std::string body;
    for (const auto& f : *session.tone_frames) {
      ordered_json line = {{"session_id", id}, {"speaker", to_string(f.speaker)},
                           {"start_ms", f.start_ms}, {"end_ms", f.end_ms},
                           {"happy", f.happy},       {"sad", f.sad},
                           {"angry", f.angry}};
      body += line.dump() + "\n";
    }
    e.tone = subdir / "tone.jsonl";
    write_file((root / *e.tone).string(), body);
  }
  e.meta = subdir / "meta.json";
  write_file((root / e.meta).string(), meta_to_json(session.meta));
  return e;
}

// ---------------------------------------------------------------------------
// narratives

std::string narrative_to_json(const Narrative& n) {
  ordered_json turns = ordered_json::array();
  for (const auto& t : n.fine_turns)
    turns.push_back({{"turn_index", t.turn_index}, {"speaker", to_string(t.speaker)}, {"text", t.text}});
  ordered_json doc = {{"session_id", n.session_id}, {"coarse_text", n.coarse_text}, {"fine_turns", turns}};
  try {
    return doc.dump(2) + "\n";
  } catch (const json::type_error& e) {
    throw Error("narrative " + n.session_id + ": " + e.what());
  }
}

Narrative narrative_from_json(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(source, 1, e.what());
  }
  Narrative n;
  n.session_id = get_string(doc, "session_id", source);
  n.coarse_text = get_string(doc, "coarse_text", source);
  const auto& turns = field(doc, "fine_turns", source);
  if (!turns.is_array()) throw SchemaError("fine_turns", source + ": fine_turns must be an array");
  for (const auto& t : turns) {
    FineTurn ft;
    const auto& idx = field(t, "turn_index", source);
    if (!idx.is_number_unsigned() && !(idx.is_number_integer() && idx.get<long long>() >= 0))
      throw SchemaError("turn_index", source + ": turn_index must be a non-negative integer");
    ft.turn_index = idx.get<std::size_t>();
    ft.speaker = get_speaker(t, source);
    ft.text = get_string(t, "text", source);
    n.fine_turns.push_back(std::move(ft));
  }
  return n;
}

void write_narrative(const Narrative& narrative, const fs::path& path) {
  write_file(path.string(), narrative_to_json(narrative));
}

Narrative read_narrative(const fs::path& path) {
  return narrative_from_json(read_file(path.string()), path.string());
}

std::string narrative_to_text(const Narrative& n) {
  std::string out = n.coarse_text + "\n\n";
  for (const auto& t : n.fine_turns) out += t.text + "\n";
  return out;
}

}  // namespace monah
