#include "rulepac/core.hpp"

#include <charconv>

namespace rulepac {

std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::North: return "N";
    case Direction::East: return "E";
    case Direction::South: return "S";
    case Direction::West: return "W";
    case Direction::Stop: return "Stop";
  }
  return "?";
}

Direction parse_direction(std::string_view text) {
  if (text == "N") return Direction::North;
  if (text == "E") return Direction::East;
  if (text == "S") return Direction::South;
  if (text == "W") return Direction::West;
  if (text == "Stop") return Direction::Stop;
  throw ParseError("unknown direction '" + std::string(text) + "'");
}

std::string format_number(double value) {
  char buffer[64];
  auto result = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, result.ptr);
}

}  // namespace rulepac
