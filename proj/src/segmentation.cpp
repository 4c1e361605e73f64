#include "monah/segmentation.hpp"

#include <algorithm>
#include <string>

#include "monah/errors.hpp"

namespace monah {

std::vector<TalkTurn> segment(std::span<const WordToken> tokens) {
  std::vector<TalkTurn> turns;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& tok = tokens[i];
    if (i > 0) {
      const auto& prev = tokens[i - 1];
      if (tok.start_ms < prev.start_ms || (tok.start_ms == prev.start_ms && tok.end_ms < prev.end_ms))
        throw UnorderedInput("token " + std::to_string(i) + " is out of (start_ms, end_ms) order");
    }
    if (turns.empty() || turns.back().speaker != tok.speaker) {
      TalkTurn turn;
      turn.speaker = tok.speaker;
      turn.start_ms = tok.start_ms;
      turns.push_back(std::move(turn));
    }
    auto& turn = turns.back();
    turn.words.push_back(tok);
    turn.end_ms = tok.end_ms;
  }
  return turns;
}

void compute_delays(std::vector<TalkTurn>& turns) {
  for (std::size_t i = 0; i < turns.size(); ++i) {
    if (i == 0) {
      turns[i].delay_before_ms.reset();
    } else {
      turns[i].delay_before_ms = std::max<Millis>(0, turns[i].start_ms - turns[i - 1].end_ms);
    }
  }
}

std::optional<double> speech_rate(const TalkTurn& turn) {
  if (turn.words.empty() || turn.end_ms <= turn.start_ms) return std::nullopt;
  return static_cast<double>(turn.words.size()) / (static_cast<double>(turn.end_ms - turn.start_ms) / 1000.0);
}

}  // namespace monah
