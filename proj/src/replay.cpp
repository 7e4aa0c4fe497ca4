#include "rulepac/replay.hpp"

#include <istream>
#include <ostream>
#include <vector>

#include <json.hpp>

namespace rulepac {

using nlohmann::ordered_json;

namespace {

std::string_view to_string(GhostMode mode) {
  switch (mode) {
    case GhostMode::Normal: return "Normal";
    case GhostMode::Edible: return "Edible";
    case GhostMode::Returning: return "Returning";
  }
  return "?";
}

ordered_json position_json(Position p) { return ordered_json::array({p.row, p.col}); }

ordered_json ghosts_json(const GameState& s) {
  ordered_json ghosts = ordered_json::array();
  for (const GhostState& g : s.ghosts) {
    ghosts.push_back({{"pos", position_json(s.maze->position(g.cell))},
                      {"dir", to_string(g.heading)},
                      {"mode", to_string(g.mode)},
                      {"edible_remaining", g.edible_remaining}});
  }
  return ghosts;
}

std::string event_text(const Event& e) {
  std::string text(to_string(e.kind));
  if (e.kind == EventKind::GhostEaten) text += "(" + std::to_string(e.rank) + ")";
  return text;
}

Event parse_event(const std::string& text) {
  const auto open = text.find('(');
  if (open == std::string::npos) return {parse_event_kind(text), 0};
  if (text.back() != ')') throw ParseError("bad event '" + text + "'");
  return {parse_event_kind(text.substr(0, open)), std::stoi(text.substr(open + 1, text.size() - open - 2))};
}

}  // namespace

ReplayRecorder::ReplayRecorder(const GameState& initial, std::uint64_t seed) {
  ordered_json header;
  header["record"] = "header";
  header["seed"] = seed;
  std::string maze_text = initial.maze->to_text();
  ordered_json rows = ordered_json::array();
  std::size_t start = 0;
  while (start < maze_text.size()) {
    const std::size_t end = maze_text.find('\n', start);
    rows.push_back(maze_text.substr(start, end - start));
    start = end + 1;
  }
  header["maze"] = rows;
  header["agent_pos"] = position_json(initial.agent_position());
  header["ghosts"] = ghosts_json(initial);
  header["score"] = initial.score;
  header["lives"] = initial.lives;
  text_ = header.dump() + '\n';
}

void ReplayRecorder::record(const AgentStep& step, const StepOutcome& outcome, const GameState& after) {
  ordered_json r;
  r["step_index"] = after.step_index - 1;
  r["action"] = to_string(step.action);
  r["macro"] = step.macro.to_string();
  r["agent_pos"] = position_json(after.agent_position());
  r["ghosts"] = ghosts_json(after);
  r["reward"] = outcome.reward;
  ordered_json events = ordered_json::array();
  for (const Event& e : outcome.events) events.push_back(event_text(e));
  r["events"] = events;
  r["score"] = after.score;
  r["lives"] = after.lives;
  text_ += r.dump() + '\n';
}

StepObserver ReplayRecorder::observer() {
  return [this](const GameState&, const AgentStep& step, const StepOutcome& outcome, const GameState& after) {
    record(step, outcome, after);
  };
}

namespace {

struct Board {
  std::vector<std::string> rows;  // walls and remaining dots only

  bool corridor(Position p) const {
    return p.row >= 0 && p.row < static_cast<int>(rows.size()) && p.col >= 0 &&
           p.col < static_cast<int>(rows[p.row].size()) && rows[p.row][p.col] != '#';
  }
  char& at(Position p) { return rows[p.row][p.col]; }
};

Position read_position(const ordered_json& j) {
  if (!j.is_array() || j.size() != 2) throw CorruptLog("position must be [row, col]");
  return {j[0].get<int>(), j[1].get<int>()};
}

void print_frame(std::ostream& out, const Board& board, const ordered_json& record, Position agent,
                 const std::string& title) {
  std::vector<std::string> rows = board.rows;
  for (const auto& g : record.at("ghosts")) {
    const Position p = read_position(g.at("pos"));
    const std::string mode = g.at("mode").get<std::string>();
    if (!board.corridor(p)) throw CorruptLog("ghost outside the corridors");
    rows[p.row][p.col] = mode == "Edible" ? 'e' : mode == "Returning" ? 'r' : 'G';
  }
  rows[agent.row][agent.col] = 'P';
  out << title << '\n';
  for (const std::string& row : rows) out << row << '\n';
  out << '\n';
}

}  // namespace

ReplaySummary replay_log(std::istream& log, std::ostream& out) {
  ReplaySummary summary;
  std::string line;
  int line_no = 0;
  Board board;
  Position agent{};
  int score = 0;
  try {
    if (!std::getline(log, line)) throw CorruptLog("log is empty");
    ++line_no;
    const ordered_json header = ordered_json::parse(line);
    if (header.value("record", "") != "header") throw CorruptLog("first record must be the header");
    for (const auto& row : header.at("maze")) {
      std::string r = row.get<std::string>();
      for (char& c : r) {
        if (c != '#' && c != '.' && c != 'o') c = ' ';
      }
      board.rows.push_back(std::move(r));
    }
    if (board.rows.empty()) throw CorruptLog("header has no maze rows");
    agent = read_position(header.at("agent_pos"));
    if (!board.corridor(agent)) throw CorruptLog("agent outside the corridors");
    score = header.at("score").get<int>();
    print_frame(out, board, header, agent,
                "start score " + std::to_string(score) + " lives " + std::to_string(header.at("lives").get<int>()));
    ++summary.frames;

    while (std::getline(log, line)) {
      ++line_no;
      if (line.empty()) continue;
      const ordered_json r = ordered_json::parse(line);
      const int index = r.at("step_index").get<int>();
      if (index != summary.steps) throw CorruptLog("expected step_index " + std::to_string(summary.steps));
      const Direction action = parse_direction(r.at("action").get<std::string>());

      const Position moved = offset(agent, action);
      const Position eaten_at = board.corridor(moved) ? moved : agent;
      int points = 0;
      std::string event_list;
      for (const auto& e : r.at("events")) {
        const std::string text = e.get<std::string>();
        const Event event = parse_event(text);
        points += event_points(event);
        if (event.kind == EventKind::DotEaten || event.kind == EventKind::PowerDotEaten) {
          const char want = event.kind == EventKind::DotEaten ? '.' : 'o';
          if (board.at(eaten_at) != want) throw CorruptLog("dot eaten where there is none");
          board.at(eaten_at) = ' ';
        }
        event_list += ' ' + text;
      }
      const int reward = r.at("reward").get<int>();
      if (reward != points) {
        throw CorruptLog("reward " + std::to_string(reward) + " does not match events worth " +
                         std::to_string(points));
      }
      score += reward;
      if (r.at("score").get<int>() != score) throw CorruptLog("score does not equal the sum of rewards");
      agent = read_position(r.at("agent_pos"));
      if (!board.corridor(agent)) throw CorruptLog("agent outside the corridors");
      ++summary.steps;
      print_frame(out, board, r, agent,
                  "step " + std::to_string(index) + " action " + std::string(to_string(action)) + " reward " +
                      std::to_string(reward) + " score " + std::to_string(score) + " lives " +
                      std::to_string(r.at("lives").get<int>()) + (event_list.empty() ? "" : " events" + event_list));
      ++summary.frames;
    }
  } catch (const CorruptLog& e) {
    throw CorruptLog("line " + std::to_string(line_no) + ": " + e.what());
  } catch (const std::exception& e) {
    throw CorruptLog("line " + std::to_string(line_no) + ": " + e.what());
  }
  summary.final_score = score;
  out << "final score " << score << '\n';
  return summary;
}

}  // namespace rulepac
