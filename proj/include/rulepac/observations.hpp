#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

#include "rulepac/world.hpp"

namespace rulepac {

enum class ObservationKind : std::uint8_t {
  NearestDot,
  NearestPowerDot,
  NearestGhost,
  NearestEdGhost,
  GhostDensity,
  Constant,
};

inline constexpr std::array<ObservationKind, 6> kObservationKinds = {
    ObservationKind::NearestDot,     ObservationKind::NearestPowerDot, ObservationKind::NearestGhost,
    ObservationKind::NearestEdGhost, ObservationKind::GhostDensity,    ObservationKind::Constant};

std::string_view to_string(ObservationKind kind);
std::optional<ObservationKind> parse_observation_kind(std::string_view text);

/// Reported for a Nearest* observation whose entity class is empty.
inline constexpr double kAbsentDistance = 100.0;
/// Ghosts beyond this BFS distance contribute nothing to GhostDensity.
inline constexpr double kGhostDensityHorizon = 10.0;

/// One value per observation kind. Entries may be left unset to model partial
/// observation vectors; reading an unset entry throws MissingObservation.
class Observations {
 public:
  void set(ObservationKind kind, double value) {
    values_[index(kind)] = value;
    present_ |= bit(kind);
  }
  bool has(ObservationKind kind) const { return (present_ & bit(kind)) != 0; }
  double operator[](ObservationKind kind) const;

 private:
  static constexpr std::size_t index(ObservationKind kind) { return static_cast<std::size_t>(kind); }
  static constexpr std::uint8_t bit(ObservationKind kind) { return static_cast<std::uint8_t>(1u << index(kind)); }

  std::array<double, 6> values_{};
  std::uint8_t present_ = 0;
};

double observe(const GameState& state, ObservationKind kind);
Observations observe_all(const GameState& state);

/// BFS distance from `from` to the nearest cell in the class, or nullopt.
std::optional<int> nearest_dot_distance(const GameState& state, int from);
std::optional<int> nearest_power_dot_distance(const GameState& state, int from);
std::optional<int> nearest_ghost_distance(const GameState& state, int from, GhostMode mode);

}  // namespace rulepac
