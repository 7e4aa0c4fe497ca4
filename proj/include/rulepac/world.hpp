#pragma once

#include <array>
#include <bitset>
#include <cstdint>
#include <memory>
#include <string_view>

#include <boost/container/static_vector.hpp>

#include "rulepac/core.hpp"
#include "rulepac/maze.hpp"

namespace rulepac {

struct WorldConfig {
  double ghost_chase_prob = 0.8;
  int edible_duration_steps = 40;
  int ghost_edible_speed_divisor = 2;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

enum class GhostMode : std::uint8_t { Normal, Edible, Returning };

struct GhostState {
  int cell = -1;
  // Stop means "no heading": the next move may go anywhere, including back.
  Direction heading = Direction::Stop;
  GhostMode mode = GhostMode::Normal;
  int edible_remaining = 0;

  bool operator==(const GhostState&) const = default;
};

enum class EventKind : std::uint8_t { DotEaten, PowerDotEaten, GhostEaten, LifeLost, ExtraLife, LevelCleared };

struct Event {
  EventKind kind;
  int rank = 0;  // chain index for GhostEaten (1..4)
  bool operator==(const Event&) const = default;
};

std::string_view to_string(EventKind kind);
EventKind parse_event_kind(std::string_view text);
/// Points carried by a single event.
int event_points(const Event& event);

struct StepOutcome {
  int reward = 0;
  boost::container::static_vector<Event, 8> events;
};

inline constexpr int kInitialLives = 3;
inline constexpr int kExtraLifeScore = 10000;

/// Complete world snapshot. A value: copying it forks the world.
struct GameState {
  std::shared_ptr<const Maze> maze;
  WorldConfig rules;
  std::bitset<Maze::kMaxCells> dots;
  std::bitset<Maze::kMaxCells> power_dots;
  int dots_left = 0;
  int power_dots_left = 0;
  int agent_cell = -1;
  Direction agent_heading = Direction::Stop;
  std::array<GhostState, kGhostCount> ghosts{};
  int score = 0;
  int lives = kInitialLives;
  int ghost_chain = 0;
  bool extra_life_granted = false;
  int step_index = 0;
  bool terminal = false;

  Position agent_position() const { return maze->position(agent_cell); }
  bool operator==(const GameState& other) const;
};

/// Fresh first-level state.
GameState reset(std::shared_ptr<const Maze> maze, const WorldConfig& config);

/// Moves whose target tile is a corridor, in N, E, S, W order.
DirectionList legal_moves(const GameState& state);

/// Stochastic world transition: ghosts follow the chase/flee law with
/// probability ghost_chase_prob. Throws SteppedTerminal.
StepOutcome step(GameState& state, Direction action, Rng& rng);

/// The look-ahead model: Normal ghosts always chase, Edible ghosts always flee.
/// Scoring and every other rule is shared with step(). Throws SteppedTerminal.
StepOutcome deterministic_step(GameState& state, Direction action);

}  // namespace rulepac
