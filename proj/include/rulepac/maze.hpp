#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rulepac/core.hpp"

namespace rulepac {

enum class Tile : std::uint8_t { Wall, Corridor };

inline constexpr int kGhostCount = 4;

/// Everything needed to build a Maze, in plain positions. Produced by the ASCII
/// parser; tests also fill it directly for layouts the glyph format cannot
/// express (e.g. a spawn sitting on a dot).
struct MazeLayout {
  int width = 0;
  int height = 0;
  std::vector<Tile> tiles;  // row-major
  std::vector<Position> dots;
  std::vector<Position> power_dots;
  std::optional<Position> agent_spawn;
  std::vector<Position> ghost_spawns;
  std::optional<Position> ghost_home;
};

/// Static maze: walls, consumable spawn sets, spawn points and the all-pairs
/// corridor distance table. Immutable after construction; shared by every
/// GameState that refers to it.
class Maze {
 public:
  static constexpr int kMaxCells = 2048;
  static constexpr int kUnreachable = -1;

  /// Parses the ASCII format (`#` wall, `.` dot, `o` power dot, ` ` corridor,
  /// `P` agent, `G` ghost spawn, `H` ghost home) and validates the result.
  static Maze parse(std::string_view text);
  static Maze load_file(const std::string& path);
  /// Validates a layout. Throws ValidationError.
  static Maze build(MazeLayout layout);

  int width() const { return width_; }
  int height() const { return height_; }
  int cell_count() const { return width_ * height_; }

  bool in_bounds(Position p) const {
    return p.row >= 0 && p.row < height_ && p.col >= 0 && p.col < width_;
  }
  int cell(Position p) const { return p.row * width_ + p.col; }
  Position position(int cell) const { return {cell / width_, cell % width_}; }
  bool is_corridor(int cell) const { return tiles_[cell] == Tile::Corridor; }
  bool is_corridor(Position p) const { return in_bounds(p) && is_corridor(cell(p)); }

  /// Neighbouring corridor cell in direction d, or -1.
  int neighbor(int cell, Direction d) const {
    return d == Direction::Stop ? cell : neighbors_[cell][static_cast<int>(d)];
  }

  /// Corridor BFS distance between two corridor cells.
  int distance(int from, int to) const {
    return distances_[static_cast<std::size_t>(from) * cell_count() + to];
  }

  /// BFS distance between positions, nullopt when unreachable. Throws
  /// NotCorridor if either endpoint is not a corridor tile.
  std::optional<int> shortest_path_distance(Position from, Position to) const;
  int diameter() const;

  std::span<const int> dot_cells() const { return dot_cells_; }
  std::span<const int> power_dot_cells() const { return power_dot_cells_; }
  int agent_spawn() const { return agent_spawn_; }
  const std::array<int, kGhostCount>& ghost_spawns() const { return ghost_spawns_; }
  int ghost_home() const { return ghost_home_; }
  std::span<const int> corridor_cells() const { return corridor_cells_; }

  /// Wall/corridor skeleton as ASCII rows (no consumables or spawns).
  std::vector<std::string> wall_rows() const;
  /// Round-trippable ASCII rendering; spawn glyphs win over dots when they
  /// coincide.
  std::string to_text() const;

 private:
  Maze() = default;
  void compute_distances();

  int width_ = 0;
  int height_ = 0;
  std::vector<Tile> tiles_;
  std::vector<std::array<int, 4>> neighbors_;
  std::vector<std::int16_t> distances_;
  std::vector<int> corridor_cells_;
  std::vector<int> dot_cells_;
  std::vector<int> power_dot_cells_;
  int agent_spawn_ = -1;
  std::array<int, kGhostCount> ghost_spawns_{};
  int ghost_home_ = -1;
};

/// 10 per dot, 40 per power dot, and a full 200+400+800+1600 ghost chain per power dot.
int max_score(const Maze& maze);

}  // namespace rulepac
