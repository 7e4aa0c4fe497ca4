#include "rulepac/maze.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <sstream>

namespace rulepac {

Maze Maze::parse(std::string_view text) {
  std::vector<std::string_view> rows;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view row = text.substr(start, end - start);
    if (!row.empty() && row.back() == '\r') row.remove_suffix(1);
    rows.push_back(row);
    start = end + 1;
  }
  if (rows.empty()) throw ParseError("maze text is empty");

  MazeLayout layout;
  layout.height = static_cast<int>(rows.size());
  layout.width = static_cast<int>(rows.front().size());
  if (layout.width == 0) throw ParseError("maze row 0 is empty");
  layout.tiles.assign(static_cast<std::size_t>(layout.width) * layout.height, Tile::Wall);

  for (int r = 0; r < layout.height; ++r) {
    if (static_cast<int>(rows[r].size()) != layout.width) {
      throw ParseError("ragged maze: row " + std::to_string(r) + " has " +
                       std::to_string(rows[r].size()) + " tiles, expected " +
                       std::to_string(layout.width));
    }
    for (int c = 0; c < layout.width; ++c) {
      const Position p{r, c};
      Tile& tile = layout.tiles[static_cast<std::size_t>(r) * layout.width + c];
      tile = Tile::Corridor;
      switch (rows[r][c]) {
        case '#': tile = Tile::Wall; break;
        case '.': layout.dots.push_back(p); break;
        case 'o': layout.power_dots.push_back(p); break;
        case ' ': break;
        case 'P':
          if (layout.agent_spawn) throw ValidationError("more than one agent spawn 'P'");
          layout.agent_spawn = p;
          break;
        case 'G': layout.ghost_spawns.push_back(p); break;
        case 'H':
          if (layout.ghost_home) throw ValidationError("more than one ghost home 'H'");
          layout.ghost_home = p;
          break;
        default:
          throw ParseError("unknown glyph '" + std::string(1, rows[r][c]) + "' at row " +
                           std::to_string(r) + ", column " + std::to_string(c));
      }
    }
  }
  return build(std::move(layout));
}

Maze Maze::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open maze file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

Maze Maze::build(MazeLayout layout) {
  if (layout.width <= 0 || layout.height <= 0) throw ValidationError("maze has no tiles");
  if (static_cast<long>(layout.width) * layout.height > kMaxCells) {
    throw ValidationError("maze exceeds " + std::to_string(kMaxCells) + " tiles");
  }
  if (layout.tiles.size() != static_cast<std::size_t>(layout.width) * layout.height) {
    throw ValidationError("tile grid size does not match width x height");
  }

  Maze maze;
  maze.width_ = layout.width;
  maze.height_ = layout.height;
  maze.tiles_ = std::move(layout.tiles);

  auto corridor_cell = [&](Position p, const char* what) {
    if (!maze.is_corridor(p)) {
      throw ValidationError(std::string(what) + " at (" + std::to_string(p.row) + "," +
                            std::to_string(p.col) + ") is not a corridor");
    }
    return maze.cell(p);
  };

  if (!layout.agent_spawn) throw ValidationError("missing agent spawn 'P'");
  if (layout.ghost_spawns.size() != kGhostCount) {
    throw ValidationError("expected exactly 4 ghost spawns 'G', found " +
                          std::to_string(layout.ghost_spawns.size()));
  }
  if (!layout.ghost_home) throw ValidationError("missing ghost home 'H'");

  maze.agent_spawn_ = corridor_cell(*layout.agent_spawn, "agent spawn");
  for (int g = 0; g < kGhostCount; ++g) {
    maze.ghost_spawns_[g] = corridor_cell(layout.ghost_spawns[g], "ghost spawn");
  }
  maze.ghost_home_ = corridor_cell(*layout.ghost_home, "ghost home");
  for (Position p : layout.dots) maze.dot_cells_.push_back(corridor_cell(p, "dot"));
  for (Position p : layout.power_dots) maze.power_dot_cells_.push_back(corridor_cell(p, "power dot"));

  auto has_duplicates = [](std::vector<int> cells) {
    std::sort(cells.begin(), cells.end());
    return std::adjacent_find(cells.begin(), cells.end()) != cells.end();
  };
  {
    std::vector<int> consumables = maze.dot_cells_;
    consumables.insert(consumables.end(), maze.power_dot_cells_.begin(), maze.power_dot_cells_.end());
    if (has_duplicates(consumables)) throw ValidationError("duplicate dot positions");
  }

  const int cells = maze.cell_count();
  maze.neighbors_.assign(cells, {-1, -1, -1, -1});
  for (int cell = 0; cell < cells; ++cell) {
    if (!maze.is_corridor(cell)) continue;
    maze.corridor_cells_.push_back(cell);
    for (Direction d : kMoves) {
      const Position q = offset(maze.position(cell), d);
      if (maze.is_corridor(q)) maze.neighbors_[cell][static_cast<int>(d)] = maze.cell(q);
    }
  }

  maze.compute_distances();
  const int root = maze.corridor_cells_.front();
  for (int cell : maze.corridor_cells_) {
    if (maze.distance(root, cell) == kUnreachable) {
      const Position p = maze.position(cell);
      throw ValidationError("corridors are not connected: (" + std::to_string(p.row) + "," +
                            std::to_string(p.col) + ") is unreachable");
    }
  }
  return maze;
}

void Maze::compute_distances() {
  const int cells = cell_count();
  distances_.assign(static_cast<std::size_t>(cells) * cells, kUnreachable);
  std::vector<int> queue(cells);
  for (int source : corridor_cells_) {
    std::int16_t* row = distances_.data() + static_cast<std::size_t>(source) * cells;
    std::size_t head = 0, tail = 0;
    row[source] = 0;
    queue[tail++] = source;
    while (head < tail) {
      const int at = queue[head++];
      for (int next : neighbors_[at]) {
        if (next >= 0 && row[next] == kUnreachable) {
          row[next] = static_cast<std::int16_t>(row[at] + 1);
          queue[tail++] = next;
        }
      }
    }
  }
}

std::optional<int> Maze::shortest_path_distance(Position from, Position to) const {
  if (!is_corridor(from)) throw NotCorridor("source is not a corridor tile");
  if (!is_corridor(to)) throw NotCorridor("target is not a corridor tile");
  const int d = distance(cell(from), cell(to));
  if (d == kUnreachable) return std::nullopt;
  return d;
}

int Maze::diameter() const {
  int best = 0;
  for (int a : corridor_cells_)
    for (int b : corridor_cells_) best = std::max(best, distance(a, b));
  return best;
}

std::vector<std::string> Maze::wall_rows() const {
  std::vector<std::string> rows(height_, std::string(width_, ' '));
  for (int cell = 0; cell < cell_count(); ++cell) {
    if (!is_corridor(cell)) rows[cell / width_][cell % width_] = '#';
  }
  return rows;
}

std::string Maze::to_text() const {
  std::vector<std::string> rows = wall_rows();
  auto put = [&](int cell, char glyph) { rows[cell / width_][cell % width_] = glyph; };
  for (int cell : dot_cells_) put(cell, '.');
  for (int cell : power_dot_cells_) put(cell, 'o');
  put(ghost_home_, 'H');
  for (int cell : ghost_spawns_) put(cell, 'G');
  put(agent_spawn_, 'P');
  std::string text;
  for (const std::string& row : rows) text += row + '\n';
  return text;
}

int max_score(const Maze& maze) {
  const int power = static_cast<int>(maze.power_dot_cells().size());
  return 10 * static_cast<int>(maze.dot_cells().size()) + 40 * power +
         power * (200 + 400 + 800 + 1600);
}

}  // namespace rulepac
