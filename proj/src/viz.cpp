#include "monah/viz.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "monah/errors.hpp"
#include "monah/util.hpp"

namespace monah {

namespace {

AttentionRecord record_from_json(const nlohmann::json& j, const std::string& source) {
  AttentionRecord r;
  try {
    r.session_id = j.at("session_id").get<std::string>();
    r.turn_weights = j.at("turn_weights").get<std::vector<double>>();
    r.word_weights = j.at("word_weights").get<std::vector<std::vector<double>>>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("attention", source + ": " + e.what());
  }
  if (r.word_weights.size() != r.turn_weights.size())
    throw SchemaError("word_weights", source + ": " + r.session_id + ": word_weights has " +
                                          std::to_string(r.word_weights.size()) + " turns, turn_weights has " +
                                          std::to_string(r.turn_weights.size()));
  return r;
}

std::string escape_html(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out += c;
    }
  }
  return out;
}

std::vector<std::string_view> tokens(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) out.push_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

constexpr const char* kStyle = R"(body{font-family:Georgia,serif;color:#222;max-width:56em;margin:2em auto;line-height:1.7}
h1{font-size:1.2em;color:#08306b}
.coarse{background:#f3f7fb;border-left:4px solid #08306b;padding:.6em 1em}
.turn{margin:.3em 0}
.label{display:inline-block;width:1.6em;font-weight:bold;color:#08306b}
.spk{color:#666;margin-right:.4em}
.att-1{font-size:100%;color:#9ecae1}
.att-2{font-size:115%;color:#4292c6}
.att-3{font-size:135%;color:#2171b5}
.att-4{font-size:160%;color:#08306b;font-weight:bold}
)";

}  // namespace

std::vector<AttentionRecord> parse_attentions(const std::string& text, const std::string& source) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(source, 1, e.what());
  }
  std::vector<AttentionRecord> out;
  if (doc.is_array()) {
    for (const auto& j : doc) out.push_back(record_from_json(j, source));
  } else {
    out.push_back(record_from_json(doc, source));
  }
  return out;
}

std::string attentions_to_json(std::span<const AttentionRecord> records) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : records)
    arr.push_back({{"session_id", r.session_id}, {"turn_weights", r.turn_weights}, {"word_weights", r.word_weights}});
  return arr.dump(2) + "\n";
}

std::vector<std::string> check_attention(const AttentionRecord& r, double tol) {
  std::vector<std::string> out;
  auto check = [&](std::span<const double> w, const std::string& what) {
    if (std::any_of(w.begin(), w.end(), [](double x) { return !(x >= 0.0); })) out.push_back(what + ": negative weight");
    const double s = std::accumulate(w.begin(), w.end(), 0.0);
    if (std::abs(s - 1.0) > tol) out.push_back(what + ": weights sum to " + format_double(s));
  };
  check(r.turn_weights, "turn_weights");
  for (std::size_t i = 0; i < r.word_weights.size(); ++i) check(r.word_weights[i], "word_weights " + std::to_string(i));
  return out;
}

std::vector<int> bucket_attention(std::span<const double> w) {
  std::vector<int> out(w.size(), 1);
  if (w.size() < 2) return out;
  const double n = static_cast<double>(w.size());
  const double m = std::accumulate(w.begin(), w.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : w) ss += (x - m) * (x - m);
  const double sd = std::sqrt(ss / n);
  if (sd == 0.0) return out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double z = (w[i] - m) / sd;
    out[i] = z < 0 ? 1 : z < 1 ? 2 : z < 2 ? 3 : 4;
  }
  return out;
}

char turn_label(int bucket) {
  if (bucket <= 1) return 'L';
  if (bucket == 2) return 'M';
  return 'H';
}

std::string render_conversation(const Narrative& narrative, const std::optional<AttentionRecord>& attention) {
  const auto& turns = narrative.fine_turns;
  std::vector<std::vector<std::string_view>> words;
  for (const auto& t : turns) words.push_back(tokens(t.text));

  std::vector<int> turn_buckets;
  std::vector<std::vector<int>> word_buckets(turns.size());
  if (attention) {
    if (attention->session_id != narrative.session_id)
      throw AlignmentError("attention for session " + attention->session_id + " applied to " + narrative.session_id);
    if (attention->turn_weights.size() != turns.size() || attention->word_weights.size() != turns.size())
      throw AlignmentError(narrative.session_id + ": " + std::to_string(attention->turn_weights.size()) +
                           " attention turns for " + std::to_string(turns.size()) + " narrative turns");
    std::vector<double> pooled;
    for (std::size_t i = 0; i < turns.size(); ++i) {
      if (attention->word_weights[i].size() != words[i].size())
        throw AlignmentError(narrative.session_id + ": turn " + std::to_string(i) + " has " +
                             std::to_string(words[i].size()) + " words but " +
                             std::to_string(attention->word_weights[i].size()) + " weights");
      pooled.insert(pooled.end(), attention->word_weights[i].begin(), attention->word_weights[i].end());
    }
    turn_buckets = bucket_attention(attention->turn_weights);
    const auto all = bucket_attention(pooled);
    std::size_t at = 0;
    for (std::size_t i = 0; i < turns.size(); ++i)
      for (std::size_t w = 0; w < words[i].size(); ++w) word_buckets[i].push_back(all[at++]);
  } else {
    for (std::size_t i = 0; i < turns.size(); ++i) word_buckets[i].assign(words[i].size(), 1);
  }

  std::ostringstream os;
  os << "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n<title>"
     << escape_html(narrative.session_id) << "</title>\n<style>\n" << kStyle << "</style>\n</head>\n<body>\n";
  os << "<h1>Session " << escape_html(narrative.session_id) << "</h1>\n";
  if (!narrative.coarse_text.empty()) os << "<p class=\"coarse\">" << escape_html(narrative.coarse_text) << "</p>\n";
  for (std::size_t i = 0; i < turns.size(); ++i) {
    os << "<div class=\"turn\">";
    if (attention) os << "<span class=\"label\">" << turn_label(turn_buckets[i]) << "</span>";
    os << "<span class=\"spk\">" << to_string(turns[i].speaker) << "</span>";
    for (std::size_t w = 0; w < words[i].size(); ++w) {
      if (w) os << ' ';
      os << "<span class=\"att-" << word_buckets[i][w] << "\">" << escape_html(words[i][w]) << "</span>";
    }
    os << "</div>\n";
  }
  os << "</body>\n</html>\n";
  return os.str();
}

std::string render_thumbnail(const AttentionRecord& attention) {
  const auto& w = attention.turn_weights;
  if (w.empty()) throw EmptyData("render_thumbnail: no turns for " + attention.session_id);
  constexpr int cell = 6, height = 24;
  const auto [lo, hi] = std::minmax_element(w.begin(), w.end());
  const double range = *hi - *lo;
  std::ostringstream os;
  const std::size_t width = w.size() * cell;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  os << "<title>" << escape_html(attention.session_id) << "</title>\n";
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double t = range > 0 ? (w[i] - *lo) / range : 0.5;
    os << "<rect x=\"" << i * cell << "\" y=\"0\" width=\"" << cell << "\" height=\"" << height
       << "\" fill=\"#08306b\" fill-opacity=\"" << format_fixed(0.1 + 0.9 * t, 4) << "\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace monah
