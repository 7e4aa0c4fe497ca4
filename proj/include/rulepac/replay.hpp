#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "rulepac/rollout.hpp"

namespace rulepac {

/// Builds an episode log: a header record (maze rows and the initial state)
/// followed by one JSON record per step.
class ReplayRecorder {
 public:
  ReplayRecorder(const GameState& initial, std::uint64_t seed);

  void record(const AgentStep& step, const StepOutcome& outcome, const GameState& after);
  StepObserver observer();

  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

struct ReplaySummary {
  int steps = 0;
  int frames = 0;
  int final_score = 0;
};

/// Prints one ASCII board per frame (the initial state, then every step) and
/// checks that rewards match the events and add up to the logged score.
/// Throws CorruptLog.
ReplaySummary replay_log(std::istream& log, std::ostream& out);

}  // namespace rulepac
