#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

#include <boost/container/static_vector.hpp>

namespace rulepac {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define RULEPAC_DEFINE_ERROR(Name) \
  class Name : public Error {      \
   public:                         \
    using Error::Error;            \
  }

RULEPAC_DEFINE_ERROR(ParseError);
RULEPAC_DEFINE_ERROR(ValidationError);
RULEPAC_DEFINE_ERROR(SteppedTerminal);
RULEPAC_DEFINE_ERROR(NotCorridor);
RULEPAC_DEFINE_ERROR(MissingObservation);
RULEPAC_DEFINE_ERROR(EmptySamples);
RULEPAC_DEFINE_ERROR(NoTraining);
RULEPAC_DEFINE_ERROR(MacroUnreachable);
RULEPAC_DEFINE_ERROR(CorruptLog);
RULEPAC_DEFINE_ERROR(ConfigError);

#undef RULEPAC_DEFINE_ERROR

// ---------------------------------------------------------------------------
// Grid geometry
// ---------------------------------------------------------------------------

struct Position {
  int row = 0;
  int col = 0;
  auto operator<=>(const Position&) const = default;
};

// Enumeration order is the tie-breaking order everywhere: N, E, S, W, then Stop.
enum class Direction : std::uint8_t { North, East, South, West, Stop };

inline constexpr std::array<Direction, 4> kMoves = {Direction::North, Direction::East,
                                                   Direction::South, Direction::West};

using DirectionList = boost::container::static_vector<Direction, 5>;

constexpr Direction opposite(Direction d) {
  switch (d) {
    case Direction::North: return Direction::South;
    case Direction::East: return Direction::West;
    case Direction::South: return Direction::North;
    case Direction::West: return Direction::East;
    case Direction::Stop: return Direction::Stop;
  }
  return Direction::Stop;
}

constexpr Position offset(Position p, Direction d) {
  switch (d) {
    case Direction::North: return {p.row - 1, p.col};
    case Direction::East: return {p.row, p.col + 1};
    case Direction::South: return {p.row + 1, p.col};
    case Direction::West: return {p.row, p.col - 1};
    case Direction::Stop: return p;
  }
  return p;
}

std::string_view to_string(Direction d);
Direction parse_direction(std::string_view text);

/// Shortest decimal text that reads back to the same double.
std::string format_number(double value);

// ---------------------------------------------------------------------------
// Random streams
// ---------------------------------------------------------------------------

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to derive independent per-episode / per-sample seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
  return mix64(mix64(mix64(base) ^ a) ^ (b + 0x632BE59BD9B4E019ULL));
}

// Explicit transforms instead of <random> distributions, whose outputs differ
// between standard library implementations.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)) % n;
}

}  // namespace rulepac
