#pragma once

// Attention-weighted conversation views: an HTML transcript with per-word
// emphasis and an SVG strip with one cell per talk-turn.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "monah/narrative.hpp"

namespace monah {

/// attentions.json: {"session_id","turn_weights":[...],"word_weights":[[...],...]}
struct AttentionRecord {
  std::string session_id;
  std::vector<double> turn_weights;
  std::vector<std::vector<double>> word_weights;

  friend bool operator==(const AttentionRecord&, const AttentionRecord&) = default;
};

/// Accepts a single object or an array of them. Throws ParseError/SchemaError.
std::vector<AttentionRecord> parse_attentions(const std::string& text, const std::string& source = "attentions.json");
std::string attentions_to_json(std::span<const AttentionRecord> records);
/// Softmax sanity: non-negative weights, each level summing to 1 within `tol`.
std::vector<std::string> check_attention(const AttentionRecord& record, double tol = 1e-5);

/// Population z over the list: z<0 -> 1, z<1 -> 2, z<2 -> 3, else 4. All 1 when sd is 0.
std::vector<int> bucket_attention(std::span<const double> weights);
/// 1 -> 'L', 2 -> 'M', 3 and 4 -> 'H'.
char turn_label(int bucket);

/// Self-contained HTML. Word buckets are computed over the whole session.
/// Throws AlignmentError when turns or per-turn word counts disagree.
std::string render_conversation(const Narrative& narrative, const std::optional<AttentionRecord>& attention);

/// One rect per turn; opacity rises linearly from the lightest to the darkest turn.
std::string render_thumbnail(const AttentionRecord& attention);

}  // namespace monah
