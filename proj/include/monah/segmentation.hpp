#pragma once

#include <optional>
#include <span>
#include <vector>

#include "monah/model.hpp"

namespace monah {

/// Groups a merged, time-ordered word stream into talk-turns: a turn runs
/// until the other speaker's next word. Throws UnorderedInput when tokens are
/// not sorted by (start_ms, end_ms).
std::vector<TalkTurn> segment(std::span<const WordToken> tokens);

/// Fills delay_before_ms = max(0, start - previous end); the first turn has none.
void compute_delays(std::vector<TalkTurn>& turns);

/// Words per second over the turn span; absent for zero-length turns.
std::optional<double> speech_rate(const TalkTurn& turn);

}  // namespace monah
