#include "rulepac/observations.hpp"

#include <algorithm>
#include <string>

namespace rulepac {

std::string_view to_string(ObservationKind kind) {
  switch (kind) {
    case ObservationKind::NearestDot: return "NearestDot";
    case ObservationKind::NearestPowerDot: return "NearestPowerDot";
    case ObservationKind::NearestGhost: return "NearestGhost";
    case ObservationKind::NearestEdGhost: return "NearestEdGhost";
    case ObservationKind::GhostDensity: return "GhostDensity";
    case ObservationKind::Constant: return "Constant";
  }
  return "?";
}

std::optional<ObservationKind> parse_observation_kind(std::string_view text) {
  for (ObservationKind kind : kObservationKinds) {
    if (to_string(kind) == text) return kind;
  }
  return std::nullopt;
}

double Observations::operator[](ObservationKind kind) const {
  if (!has(kind)) throw MissingObservation("observation " + std::string(to_string(kind)) + " not provided");
  return values_[index(kind)];
}

namespace {

template <class Cells>
std::optional<int> nearest_in(const Maze& maze, int from, const Cells& cells,
                              const std::bitset<Maze::kMaxCells>& present) {
  std::optional<int> best;
  for (int cell : cells) {
    if (!present.test(cell)) continue;
    const int d = maze.distance(from, cell);
    if (!best || d < *best) best = d;
  }
  return best;
}

double or_absent(std::optional<int> d) { return d ? static_cast<double>(*d) : kAbsentDistance; }

// Summed in integer tile units and divided once, so equal densities compare
// equal however the ghosts are arranged.
double ghost_density(const GameState& state) {
  const int horizon = static_cast<int>(kGhostDensityHorizon);
  int closeness = 0;
  for (const GhostState& ghost : state.ghosts) {
    if (ghost.mode != GhostMode::Normal) continue;
    closeness += std::max(0, horizon - state.maze->distance(state.agent_cell, ghost.cell));
  }
  return static_cast<double>(closeness) / kGhostDensityHorizon;
}

}  // namespace

std::optional<int> nearest_dot_distance(const GameState& state, int from) {
  return nearest_in(*state.maze, from, state.maze->dot_cells(), state.dots);
}

std::optional<int> nearest_power_dot_distance(const GameState& state, int from) {
  return nearest_in(*state.maze, from, state.maze->power_dot_cells(), state.power_dots);
}

std::optional<int> nearest_ghost_distance(const GameState& state, int from, GhostMode mode) {
  std::optional<int> best;
  for (const GhostState& ghost : state.ghosts) {
    if (ghost.mode != mode) continue;
    const int d = state.maze->distance(from, ghost.cell);
    if (!best || d < *best) best = d;
  }
  return best;
}

double observe(const GameState& state, ObservationKind kind) {
  switch (kind) {
    case ObservationKind::NearestDot: return or_absent(nearest_dot_distance(state, state.agent_cell));
    case ObservationKind::NearestPowerDot:
      return or_absent(nearest_power_dot_distance(state, state.agent_cell));
    case ObservationKind::NearestGhost:
      return or_absent(nearest_ghost_distance(state, state.agent_cell, GhostMode::Normal));
    case ObservationKind::NearestEdGhost:
      return or_absent(nearest_ghost_distance(state, state.agent_cell, GhostMode::Edible));
    case ObservationKind::GhostDensity: return ghost_density(state);
    case ObservationKind::Constant: return 1.0;
  }
  return 0.0;
}

Observations observe_all(const GameState& state) {
  Observations obs;
  for (ObservationKind kind : kObservationKinds) obs.set(kind, observe(state, kind));
  return obs;
}

}  // namespace rulepac
