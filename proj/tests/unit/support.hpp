#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "rulepac/maze.hpp"
#include "rulepac/world.hpp"

namespace testing {

inline std::shared_ptr<const rulepac::Maze> maze_from(std::string_view text) {
  return std::make_shared<const rulepac::Maze>(rulepac::Maze::parse(text));
}

inline std::string source_path(const std::string& relative) { return std::string(RULEPAC_SOURCE_DIR) + "/" + relative; }

inline std::shared_ptr<const rulepac::Maze> canonical_maze() {
  return std::make_shared<const rulepac::Maze>(rulepac::Maze::load_file(source_path("mazes/canonical.txt")));
}

// Deterministic ghosts: chase and flee always take the greedy move.
inline rulepac::WorldConfig greedy_world() {
  rulepac::WorldConfig config;
  config.ghost_chase_prob = 1.0;
  return config;
}

inline rulepac::GameState fresh(std::shared_ptr<const rulepac::Maze> maze,
                                const rulepac::WorldConfig& config = greedy_world()) {
  return rulepac::reset(std::move(maze), config);
}

inline int cell(const rulepac::GameState& s, int row, int col) { return s.maze->cell({row, col}); }

inline bool has_event(const rulepac::StepOutcome& out, rulepac::EventKind kind) {
  for (const auto& e : out.events) {
    if (e.kind == kind) return true;
  }
  return false;
}

}  // namespace testing
