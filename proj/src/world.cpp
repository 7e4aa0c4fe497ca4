#include "rulepac/world.hpp"

#include <string>

namespace rulepac {

void WorldConfig::validate() const {
  if (!(ghost_chase_prob >= 0.0 && ghost_chase_prob <= 1.0)) {
    throw ConfigError("ghost_chase_prob must lie in [0, 1]");
  }
  if (edible_duration_steps < 1) throw ConfigError("edible_duration_steps must be >= 1");
  if (ghost_edible_speed_divisor < 1) throw ConfigError("ghost_edible_speed_divisor must be >= 1");
}

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::DotEaten: return "DotEaten";
    case EventKind::PowerDotEaten: return "PowerDotEaten";
    case EventKind::GhostEaten: return "GhostEaten";
    case EventKind::LifeLost: return "LifeLost";
    case EventKind::ExtraLife: return "ExtraLife";
    case EventKind::LevelCleared: return "LevelCleared";
  }
  return "?";
}

EventKind parse_event_kind(std::string_view text) {
  for (EventKind k : {EventKind::DotEaten, EventKind::PowerDotEaten, EventKind::GhostEaten,
                      EventKind::LifeLost, EventKind::ExtraLife, EventKind::LevelCleared}) {
    if (to_string(k) == text) return k;
  }
  throw ParseError("unknown event '" + std::string(text) + "'");
}

int event_points(const Event& event) {
  switch (event.kind) {
    case EventKind::DotEaten: return 10;
    case EventKind::PowerDotEaten: return 40;
    case EventKind::GhostEaten: return 200 << (event.rank - 1);
    default: return 0;
  }
}

bool GameState::operator==(const GameState& o) const {
  return maze == o.maze && rules.ghost_chase_prob == o.rules.ghost_chase_prob &&
         rules.edible_duration_steps == o.rules.edible_duration_steps &&
         rules.ghost_edible_speed_divisor == o.rules.ghost_edible_speed_divisor &&
         dots == o.dots && power_dots == o.power_dots && dots_left == o.dots_left &&
         power_dots_left == o.power_dots_left && agent_cell == o.agent_cell &&
         agent_heading == o.agent_heading && ghosts == o.ghosts && score == o.score &&
         lives == o.lives && ghost_chain == o.ghost_chain &&
         extra_life_granted == o.extra_life_granted && step_index == o.step_index &&
         terminal == o.terminal;
}

namespace {

void respawn(GameState& s) {
  const Maze& maze = *s.maze;
  s.agent_cell = maze.agent_spawn();
  s.agent_heading = Direction::Stop;
  for (int g = 0; g < kGhostCount; ++g) {
    s.ghosts[g] = GhostState{maze.ghost_spawns()[g], Direction::Stop, GhostMode::Normal, 0};
  }
  s.ghost_chain = 0;
}

// Candidate moves for a Normal or Edible ghost: legal moves minus reversal,
// unless reversing is the only way out.
DirectionList ghost_candidates(const Maze& maze, const GhostState& ghost) {
  DirectionList moves;
  const Direction back = opposite(ghost.heading);
  for (Direction d : kMoves) {
    if (maze.neighbor(ghost.cell, d) >= 0 && (ghost.heading == Direction::Stop || d != back)) {
      moves.push_back(d);
    }
  }
  if (moves.empty() && ghost.heading != Direction::Stop && maze.neighbor(ghost.cell, back) >= 0) {
    moves.push_back(back);
  }
  return moves;
}

// Index of the greedy move: minimizes (chase) or maximizes (flee) the BFS
// distance to the agent; ties resolved by N, E, S, W.
std::size_t greedy_index(const Maze& maze, int ghost_cell, int agent_cell, const DirectionList& moves,
                         bool flee) {
  std::size_t best = 0;
  int best_distance = 0;
  for (std::size_t i = 0; i < moves.size(); ++i) {
    const int d = maze.distance(maze.neighbor(ghost_cell, moves[i]), agent_cell);
    if (i == 0 || (flee ? d > best_distance : d < best_distance)) {
      best = i;
      best_distance = d;
    }
  }
  return best;
}

struct StochasticGhosts {
  Rng& rng;
  double chase_prob;

  std::size_t operator()(std::size_t greedy, std::size_t options) {
    if (options == 1) return 0;
    if (uniform01(rng) < chase_prob) return greedy;
    std::size_t pick = uniform_index(rng, options - 1);
    return pick >= greedy ? pick + 1 : pick;
  }
};

struct GreedyGhosts {
  std::size_t operator()(std::size_t greedy, std::size_t /*options*/) const { return greedy; }
};

template <class Chooser>
void move_ghost(const GameState& s, GhostState& ghost, Chooser& choose) {
  const Maze& maze = *s.maze;
  switch (ghost.mode) {
    case GhostMode::Returning: {
      if (ghost.cell != maze.ghost_home()) {
        Direction best = Direction::Stop;
        int best_distance = 0;
        for (Direction d : kMoves) {
          const int next = maze.neighbor(ghost.cell, d);
          if (next < 0) continue;
          const int dist = maze.distance(next, maze.ghost_home());
          if (best == Direction::Stop || dist < best_distance) {
            best = d;
            best_distance = dist;
          }
        }
        ghost.cell = maze.neighbor(ghost.cell, best);
        ghost.heading = best;
      }
      if (ghost.cell == maze.ghost_home()) {
        ghost.mode = GhostMode::Normal;
        ghost.heading = Direction::Stop;
      }
      return;
    }
    case GhostMode::Edible:
      if (s.step_index % s.rules.ghost_edible_speed_divisor != 0) return;
      [[fallthrough]];
    case GhostMode::Normal: {
      const DirectionList moves = ghost_candidates(maze, ghost);
      if (moves.empty()) return;
      const bool flee = ghost.mode == GhostMode::Edible;
      const std::size_t pick = choose(greedy_index(maze, ghost.cell, s.agent_cell, moves, flee), moves.size());
      ghost.cell = maze.neighbor(ghost.cell, moves[pick]);
      ghost.heading = moves[pick];
      return;
    }
  }
}

template <class Chooser>
StepOutcome advance(GameState& s, Direction action, Chooser&& choose) {
  if (s.terminal) throw SteppedTerminal("step called on a terminal state");
  const Maze& maze = *s.maze;
  StepOutcome out;
  auto emit = [&](Event e) {
    out.events.push_back(e);
    out.reward += event_points(e);
  };

  for (GhostState& ghost : s.ghosts) {
    if (ghost.mode == GhostMode::Edible && --ghost.edible_remaining <= 0) {
      ghost.mode = GhostMode::Normal;
      ghost.edible_remaining = 0;
      ghost.heading = Direction::Stop;
    }
  }

  const int agent_from = s.agent_cell;
  if (action != Direction::Stop) {
    const int next = maze.neighbor(s.agent_cell, action);
    if (next >= 0) {
      s.agent_cell = next;
      s.agent_heading = action;
    }
  }
  if (s.dots.test(s.agent_cell)) {
    s.dots.reset(s.agent_cell);
    --s.dots_left;
    emit({EventKind::DotEaten});
  } else if (s.power_dots.test(s.agent_cell)) {
    s.power_dots.reset(s.agent_cell);
    --s.power_dots_left;
    emit({EventKind::PowerDotEaten});
    s.ghost_chain = 0;
    for (GhostState& ghost : s.ghosts) {
      if (ghost.mode == GhostMode::Normal) {
        ghost.mode = GhostMode::Edible;
        ghost.edible_remaining = s.rules.edible_duration_steps;
        ghost.heading = Direction::Stop;
      }
    }
  }

  std::array<int, kGhostCount> ghost_from{};
  for (int g = 0; g < kGhostCount; ++g) {
    ghost_from[g] = s.ghosts[g].cell;
    move_ghost(s, s.ghosts[g], choose);
  }

  bool caught = false;
  for (int g = 0; g < kGhostCount; ++g) {
    GhostState& ghost = s.ghosts[g];
    const bool met = ghost.cell == s.agent_cell ||
                     (ghost.cell == agent_from && ghost_from[g] == s.agent_cell);
    if (!met) continue;
    if (ghost.mode == GhostMode::Edible) {
      s.ghost_chain = s.ghost_chain < 4 ? s.ghost_chain + 1 : 4;
      emit({EventKind::GhostEaten, s.ghost_chain});
      ghost.mode = GhostMode::Returning;
      ghost.edible_remaining = 0;
      ghost.heading = Direction::Stop;
    } else if (ghost.mode == GhostMode::Normal) {
      caught = true;
    }
  }

  s.score += out.reward;
  if (!s.extra_life_granted && s.score >= kExtraLifeScore) {
    s.extra_life_granted = true;
    ++s.lives;
    out.events.push_back({EventKind::ExtraLife});
  }
  if (caught) {
    --s.lives;
    out.events.push_back({EventKind::LifeLost});
    if (s.lives > 0) respawn(s);
  }
  if (s.dots_left + s.power_dots_left == 0) out.events.push_back({EventKind::LevelCleared});
  s.terminal = s.lives <= 0 || s.dots_left + s.power_dots_left == 0;
  ++s.step_index;
  return out;
}

}  // namespace

GameState reset(std::shared_ptr<const Maze> maze, const WorldConfig& config) {
  config.validate();
  GameState s;
  s.maze = std::move(maze);
  s.rules = config;
  for (int cell : s.maze->dot_cells()) s.dots.set(cell);
  for (int cell : s.maze->power_dot_cells()) s.power_dots.set(cell);
  s.dots_left = static_cast<int>(s.maze->dot_cells().size());
  s.power_dots_left = static_cast<int>(s.maze->power_dot_cells().size());
  respawn(s);
  s.terminal = s.dots_left + s.power_dots_left == 0;
  return s;
}

DirectionList legal_moves(const GameState& state) {
  DirectionList moves;
  for (Direction d : kMoves) {
    if (state.maze->neighbor(state.agent_cell, d) >= 0) moves.push_back(d);
  }
  return moves;
}

StepOutcome step(GameState& state, Direction action, Rng& rng) {
  return advance(state, action, StochasticGhosts{rng, state.rules.ghost_chase_prob});
}

StepOutcome deterministic_step(GameState& state, Direction action) {
  return advance(state, action, GreedyGhosts{});
}

}  // namespace rulepac
