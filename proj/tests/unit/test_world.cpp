#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "rulepac/maze.hpp"
#include "rulepac/world.hpp"
#include "support.hpp"

using namespace rulepac;
using testing::cell;
using testing::fresh;
using testing::has_event;
using testing::maze_from;

namespace {

// Agent on the left, ghosts parked in a pocket ten tiles away.
constexpr std::string_view kLane =
    "##############\n"
    "#P.o.....    #\n"
    "#########.####\n"
    "#########GG###\n"
    "#########GGH##\n"
    "##############\n";

// 5x5 grid whose corridors form a ring of 8 tiles around a wall.
MazeLayout ring_layout() {
  MazeLayout layout;
  layout.width = 5;
  layout.height = 5;
  layout.tiles.assign(25, Tile::Wall);
  for (int r = 1; r <= 3; ++r) {
    for (int c = 1; c <= 3; ++c) {
      if (r == 2 && c == 2) continue;
      layout.tiles[r * 5 + c] = Tile::Corridor;
      layout.dots.push_back({r, c});
    }
  }
  layout.agent_spawn = Position{1, 1};
  layout.ghost_spawns.assign(4, Position{3, 3});
  layout.ghost_home = Position{3, 3};
  return layout;
}

int brute_force_distance(const Maze& maze, Position from, Position to) {
  // Bellman-Ford style relaxation over the grid, independent of the BFS table.
  const int n = maze.cell_count();
  std::vector<int> dist(n, 1 << 20);
  dist[maze.cell(from)] = 0;
  for (int round = 0; round < n; ++round) {
    for (int c = 0; c < n; ++c) {
      if (!maze.is_corridor(c) || dist[c] >= (1 << 20)) continue;
      const Position p = maze.position(c);
      for (Position q : {Position{p.row - 1, p.col}, Position{p.row + 1, p.col}, Position{p.row, p.col - 1},
                         Position{p.row, p.col + 1}}) {
        if (maze.is_corridor(q)) dist[maze.cell(q)] = std::min(dist[maze.cell(q)], dist[c] + 1);
      }
    }
  }
  return dist[maze.cell(to)];
}

void park_ghosts_far(GameState& s) {
  for (int g = 0; g < kGhostCount; ++g) s.ghosts[g].cell = s.maze->ghost_spawns()[g];
}

}  // namespace

TEST_SUITE("maze") {
  TEST_CASE("canonical maze counts") {
    auto maze = testing::canonical_maze();
    CHECK(maze->dot_cells().size() == 174);
    CHECK(maze->power_dot_cells().size() == 4);
    CHECK(max_score(*maze) == 13900);
  }

  TEST_CASE("max_score arithmetic") {
    MazeLayout layout;
    layout.width = 13;
    layout.height = 3;
    layout.tiles.assign(39, Tile::Wall);
    for (int c = 1; c <= 11; ++c) layout.tiles[13 + c] = Tile::Corridor;
    layout.agent_spawn = Position{1, 1};
    layout.ghost_spawns.assign(4, Position{1, 11});
    layout.ghost_home = Position{1, 11};
    const Maze empty = Maze::build(layout);
    CHECK(max_score(empty) == 0);

    for (int c = 1; c <= 10; ++c) layout.dots.push_back({1, c});
    layout.power_dots.push_back({1, 11});
    CHECK(max_score(Maze::build(layout)) == 10 * 10 + 40 + 3000);
  }

  TEST_CASE("missing ghost spawns are rejected") {
    CHECK_THROWS_AS(Maze::parse("###\n#P#\n###\n"), ValidationError);
  }

  TEST_CASE("malformed text") {
    CHECK_THROWS_AS(Maze::parse("#####\n#P?G#\n#####\n"), ParseError);
    CHECK_THROWS_AS(Maze::parse("#####\n#P.#\n#####\n"), ParseError);
    CHECK_THROWS_AS(Maze::parse(""), ParseError);
    // Two corridor regions.
    CHECK_THROWS_AS(Maze::parse("########\n#PGGGGH#\n########\n#.....##\n########\n"), ValidationError);
    CHECK_THROWS_AS(Maze::parse("########\n#PGGGG.#\n########\n"), ValidationError);
  }

  TEST_CASE("glyph counts survive a round trip") {
    auto maze = maze_from(kLane);
    CHECK(maze->dot_cells().size() == 7);
    CHECK(maze->power_dot_cells().size() == 1);
    CHECK(maze->to_text() == kLane);
    CHECK(Maze::parse(maze->to_text()).to_text() == kLane);
  }

  TEST_CASE("ring maze diameter") {
    const Maze ring = Maze::build(ring_layout());
    CHECK(ring.dot_cells().size() == 8);
    CHECK(ring.diameter() == 4);
    CHECK(ring.shortest_path_distance({1, 1}, {3, 3}) == 4);
    CHECK(ring.shortest_path_distance({1, 3}, {3, 1}) == 4);
  }

  TEST_CASE("shortest path distance") {
    auto maze = testing::canonical_maze();
    CHECK(maze->shortest_path_distance({1, 1}, {1, 1}) == 0);
    CHECK(maze->shortest_path_distance({1, 1}, {1, 2}) == 1);
    CHECK_THROWS_AS(maze->shortest_path_distance({0, 0}, {1, 1}), NotCorridor);
    CHECK_THROWS_AS(maze->shortest_path_distance({1, 1}, {0, 0}), NotCorridor);

    const std::vector<Position> probes = {{1, 1}, {5, 13}, {23, 13}, {29, 26}, {14, 13}, {3, 26}, {20, 8}};
    for (Position a : probes) {
      for (Position b : probes) {
        const auto d = maze->shortest_path_distance(a, b);
        REQUIRE(d.has_value());
        CHECK(*d == maze->shortest_path_distance(b, a));
        CHECK(*d == brute_force_distance(*maze, a, b));
        CHECK((*d == 0) == (a == b));
      }
    }
  }
}

TEST_SUITE("world") {
  TEST_CASE("reset") {
    auto maze = testing::canonical_maze();
    const GameState a = fresh(maze);
    CHECK(a.dots_left == 174);
    CHECK(a.lives == 3);
    CHECK(a.score == 0);
    CHECK_FALSE(a.terminal);
    for (const GhostState& g : a.ghosts) CHECK(g.mode == GhostMode::Normal);
    CHECK(fresh(maze) == a);
  }

  TEST_CASE("legal moves") {
    auto lane = maze_from(kLane);
    GameState s = fresh(lane);
    s.agent_cell = cell(s, 1, 5);
    CHECK(legal_moves(s) == DirectionList{Direction::East, Direction::West});
    s.agent_cell = cell(s, 1, 9);
    CHECK(legal_moves(s) == DirectionList{Direction::East, Direction::South, Direction::West});

    auto cross = maze_from("#####\n#GG.#\n#.P.#\n#.GG#\n###H#\n#####\n");
    CHECK(legal_moves(fresh(cross)) ==
          DirectionList{Direction::North, Direction::East, Direction::South, Direction::West});
  }

  TEST_CASE("legal moves at the canonical spawn match the file") {
    std::ifstream in(testing::source_path("mazes/canonical.txt"));
    std::vector<std::string> rows;
    for (std::string line; std::getline(in, line);) rows.push_back(line);
    Position spawn{};
    for (int r = 0; r < static_cast<int>(rows.size()); ++r) {
      const auto c = rows[r].find('P');
      if (c != std::string::npos) spawn = {r, static_cast<int>(c)};
    }
    DirectionList expected;
    for (Direction d : kMoves) {
      const Position p = offset(spawn, d);
      if (rows[p.row][p.col] != '#') expected.push_back(d);
    }
    CHECK(legal_moves(fresh(testing::canonical_maze())) == expected);
  }

  TEST_CASE("eating a dot") {
    GameState s = fresh(maze_from(kLane));
    const StepOutcome out = deterministic_step(s, Direction::East);
    CHECK(out.reward == 10);
    REQUIRE(out.events.size() == 1);
    CHECK(out.events[0].kind == EventKind::DotEaten);
    CHECK(s.score == 10);
    CHECK(s.dots_left == 6);
  }

  TEST_CASE("walking into a wall") {
    GameState s = fresh(maze_from(kLane));
    const int before = s.agent_cell;
    const StepOutcome out = deterministic_step(s, Direction::North);
    CHECK(s.agent_cell == before);
    CHECK(out.reward == 0);
    CHECK(out.events.empty());
  }

  TEST_CASE("power dot turns Normal ghosts edible") {
    GameState s = fresh(maze_from(kLane));
    deterministic_step(s, Direction::East);
    const StepOutcome out = deterministic_step(s, Direction::East);
    CHECK(out.reward == 40);
    CHECK(has_event(out, EventKind::PowerDotEaten));
    for (const GhostState& g : s.ghosts) {
      CHECK(g.mode == GhostMode::Edible);
      CHECK(g.edible_remaining == s.rules.edible_duration_steps);
    }
  }

  TEST_CASE("ghost chain points") {
    GameState s = fresh(maze_from(kLane));
    s.agent_cell = cell(s, 1, 5);
    s.step_index = 1;  // edible ghosts hold still on odd steps
    for (int g : {0, 1}) {
      s.ghosts[g] = {cell(s, 1, 6), Direction::Stop, GhostMode::Edible, 20};
    }
    const StepOutcome out = deterministic_step(s, Direction::East);
    CHECK(out.reward == 10 + 200 + 400);
    REQUIRE(out.events.size() == 3);
    CHECK(out.events[1] == Event{EventKind::GhostEaten, 1});
    CHECK(out.events[2] == Event{EventKind::GhostEaten, 2});
    CHECK(s.ghost_chain == 2);
    CHECK(s.ghosts[0].mode == GhostMode::Returning);
    CHECK(s.ghosts[1].mode == GhostMode::Returning);
  }

  TEST_CASE("a power dot resets the chain") {
    GameState s = fresh(maze_from(kLane));
    s.agent_cell = cell(s, 1, 2);
    s.ghost_chain = 3;
    s.ghosts[2] = {cell(s, 1, 5), Direction::Stop, GhostMode::Edible, 30};
    const StepOutcome eat_power = deterministic_step(s, Direction::East);  // step 0 -> edible ghost moves away
    CHECK(has_event(eat_power, EventKind::PowerDotEaten));
    CHECK(s.ghost_chain == 0);
    // Put an edible ghost in front of the agent on an odd step.
    s.ghosts[2].cell = cell(s, 1, 4);
    REQUIRE(s.step_index % 2 == 1);
    const StepOutcome eat_ghost = deterministic_step(s, Direction::East);
    CHECK(eat_ghost.reward == 10 + 200);
    CHECK(s.ghost_chain == 1);
  }

  TEST_CASE("stepping a terminal state throws") {
    GameState s = fresh(maze_from(kLane));
    s.terminal = true;
    Rng rng(1);
    CHECK_THROWS_AS(step(s, Direction::East, rng), SteppedTerminal);
    CHECK_THROWS_AS(deterministic_step(s, Direction::East), SteppedTerminal);
  }

  TEST_CASE("extra life is granted once") {
    GameState s = fresh(maze_from(kLane));
    s.score = 9995;
    const StepOutcome first = deterministic_step(s, Direction::East);
    CHECK(has_event(first, EventKind::ExtraLife));
    CHECK(s.lives == 4);
    CHECK(first.reward == 10);
    s.score = 19995;
    deterministic_step(s, Direction::West);
    deterministic_step(s, Direction::East);
    const StepOutcome again = deterministic_step(s, Direction::East);
    CHECK_FALSE(has_event(again, EventKind::ExtraLife));
    CHECK(s.lives == 4);
  }

  TEST_CASE("a chasing ghost two tiles away catches a standing agent on the second step") {
    GameState s = fresh(maze_from(kLane));
    s.ghosts[0] = {cell(s, 1, 3), Direction::Stop, GhostMode::Normal, 0};
    const StepOutcome first = deterministic_step(s, Direction::Stop);
    CHECK_FALSE(has_event(first, EventKind::LifeLost));
    CHECK(s.ghosts[0].cell == cell(s, 1, 2));
    const StepOutcome second = deterministic_step(s, Direction::Stop);
    CHECK(has_event(second, EventKind::LifeLost));
    CHECK(s.lives == 2);
    CHECK(s.agent_cell == s.maze->agent_spawn());
    CHECK(s.ghosts[0].cell == s.maze->ghost_spawns()[0]);
  }

  TEST_CASE("swapping tiles is a collision") {
    GameState s = fresh(maze_from(kLane));
    s.ghosts[0] = {cell(s, 1, 2), Direction::West, GhostMode::Normal, 0};
    const StepOutcome out = deterministic_step(s, Direction::East);
    CHECK(has_event(out, EventKind::LifeLost));
    CHECK(s.lives == 2);
  }

  TEST_CASE("losing the last life ends the episode") {
    GameState s = fresh(maze_from(kLane));
    s.lives = 1;
    s.ghosts[0] = {cell(s, 1, 2), Direction::Stop, GhostMode::Normal, 0};
    deterministic_step(s, Direction::Stop);
    CHECK(s.lives == 0);
    CHECK(s.terminal);
  }

  TEST_CASE("clearing the level ends the episode") {
    GameState s = fresh(maze_from("#######\n#P.GGH#\n###GG##\n#######\n"));
    s.ghosts.fill({cell(s, 2, 4), Direction::Stop, GhostMode::Returning, 0});
    const StepOutcome out = deterministic_step(s, Direction::East);
    CHECK(has_event(out, EventKind::LevelCleared));
    CHECK(s.terminal);
    CHECK(s.lives == 3);
  }

  TEST_CASE("returning ghosts go home within their BFS distance") {
    auto maze = maze_from(kLane);
    const int home = maze->ghost_home();
    for (Position start : {Position{1, 12}, Position{1, 9}, Position{2, 9}, Position{4, 9}}) {
      GameState s = fresh(maze);
      const int from = maze->cell(start);
      s.ghosts[0] = {from, Direction::Stop, GhostMode::Returning, 0};
      const int budget = maze->distance(from, home);
      int steps = 0;
      while (s.ghosts[0].mode == GhostMode::Returning) {
        deterministic_step(s, Direction::Stop);
        ++steps;
        REQUIRE(steps <= budget + 1);
      }
      CHECK(steps <= std::max(budget, 1));
      CHECK(s.ghosts[0].mode == GhostMode::Normal);
    }
  }

  TEST_CASE("edible ghosts move on even steps only") {
    GameState s = fresh(maze_from(kLane));
    park_ghosts_far(s);
    s.ghosts[0] = {cell(s, 1, 7), Direction::Stop, GhostMode::Edible, 20};
    s.step_index = 1;
    deterministic_step(s, Direction::Stop);
    CHECK(s.ghosts[0].cell == cell(s, 1, 7));
    deterministic_step(s, Direction::Stop);
    CHECK(s.ghosts[0].cell == cell(s, 1, 8));  // flees east
  }
}

TEST_SUITE("world properties") {
  TEST_CASE("random play: conservation, determinism, timers, state invariants") {
    auto maze = testing::canonical_maze();
    WorldConfig config;
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
      std::vector<std::pair<int, std::vector<Event>>> first_run;
      for (int run = 0; run < 2; ++run) {
        GameState s = reset(maze, config);
        Rng world_rng(seed);
        Rng agent_rng(seed + 1000);
        int reward_sum = 0;
        std::vector<std::pair<int, std::vector<Event>>> log;
        while (!s.terminal && s.step_index < 3000) {
          const DirectionList moves = legal_moves(s);
          const Direction a = moves[uniform_index(agent_rng, moves.size())];
          const GameState before = s;
          const StepOutcome out = step(s, a, world_rng);
          int points = 0;
          for (const Event& e : out.events) points += event_points(e);
          REQUIRE(out.reward == points);
          reward_sum += out.reward;
          REQUIRE(s.score == reward_sum);
          REQUIRE(s.lives >= 0);
          REQUIRE(s.lives <= 4);
          REQUIRE(s.terminal == (s.lives == 0 || s.dots_left + s.power_dots_left == 0));
          if (!has_event(out, EventKind::LifeLost) && !has_event(out, EventKind::PowerDotEaten)) {
            for (int g = 0; g < kGhostCount; ++g) {
              const GhostState& was = before.ghosts[g];
              const GhostState& now = s.ghosts[g];
              if (was.mode != GhostMode::Edible || now.mode == GhostMode::Returning) continue;
              if (was.edible_remaining > 1) {
                CHECK(now.mode == GhostMode::Edible);
                CHECK(now.edible_remaining == was.edible_remaining - 1);
              } else {
                CHECK(now.mode == GhostMode::Normal);
              }
            }
          }
          if (has_event(out, EventKind::PowerDotEaten)) {
            int eaten = 0;
            for (const Event& e : out.events) eaten += e.kind == EventKind::GhostEaten;
            CHECK(s.ghost_chain == eaten);
          }
          log.emplace_back(out.reward, std::vector<Event>(out.events.begin(), out.events.end()));
        }
        if (run == 0) {
          first_run = std::move(log);
        } else {
          CHECK(log == first_run);
        }
      }
    }
  }
}
