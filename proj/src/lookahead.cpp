#include "rulepac/lookahead.hpp"

namespace rulepac {

void LookaheadConfig::validate() const {
  if (depth < 0) throw ConfigError("look-ahead depth must be >= 0");
  if (node_budget < 1) throw ConfigError("look-ahead node budget must be >= 1");
}

namespace {

template <class Visit>
class Search {
 public:
  Search(const LookaheadConfig& config, const CellSet& stop_cells, Visit& visit)
      : config_(config), stop_cells_(stop_cells), visit_(visit) {}

  void run(const GameState& root) {
    if (root.terminal) throw SteppedTerminal("look-ahead from a terminal state");
    leaf_.actions.clear();
    visited_.reset();
    visited_.set(root.agent_cell);
    if (config_.depth > 0) expand(root, 0, 0);
  }

  long expansions() const { return expansions_; }
  bool budget_exceeded() const { return exceeded_; }

 private:
  void emit(const GameState& s, int depth, int reward, bool died, bool cleared) {
    leaf_.state = s;
    leaf_.depth = depth;
    leaf_.reward = reward;
    leaf_.died = died;
    leaf_.cleared = cleared;
    visit_(static_cast<const TrajectoryNode&>(leaf_));
  }

  void expand(const GameState& s, int depth, int reward) {
    const Maze& maze = *s.maze;
    DirectionList actions;
    for (Direction d : kMoves) {
      const int next = maze.neighbor(s.agent_cell, d);
      if (next >= 0 && !visited_.test(next)) actions.push_back(d);
    }
    if (config_.allow_stop_at_zigzag && stop_cells_.test(s.agent_cell)) actions.push_back(Direction::Stop);
    if (actions.empty()) {
      if (depth > 0) emit(s, depth, reward, false, false);
      return;
    }
    for (Direction a : actions) {
      if (expansions_ >= config_.node_budget) {
        exceeded_ = true;
        return;
      }
      ++expansions_;
      GameState child = s;
      const StepOutcome outcome = deterministic_step(child, a);
      bool died = false, cleared = false;
      for (const Event& e : outcome.events) {
        died = died || e.kind == EventKind::LifeLost;
        cleared = cleared || e.kind == EventKind::LevelCleared;
      }
      const int total = reward + outcome.reward;
      leaf_.actions.push_back(a);
      if (died || cleared || child.terminal || depth + 1 == config_.depth) {
        emit(child, depth + 1, total, died, cleared);
      } else {
        const bool moved = a != Direction::Stop;
        if (moved) visited_.set(child.agent_cell);
        expand(child, depth + 1, total);
        if (moved) visited_.reset(child.agent_cell);
      }
      leaf_.actions.pop_back();
      if (exceeded_) return;
    }
  }

  const LookaheadConfig& config_;
  const CellSet& stop_cells_;
  Visit& visit_;
  CellSet visited_;
  TrajectoryNode leaf_;
  long expansions_ = 0;
  bool exceeded_ = false;
};

}  // namespace

Enumeration enumerate(const GameState& root, const LookaheadConfig& config, const CellSet& stop_cells) {
  config.validate();
  Enumeration out;
  auto collect = [&](const TrajectoryNode& leaf) { out.leaves.push_back(leaf); };
  Search search(config, stop_cells, collect);
  search.run(root);
  out.expansions = search.expansions();
  out.budget_exceeded = search.budget_exceeded();
  return out;
}

double lookahead_value(const TrajectoryNode& leaf, const ValueTable& values, const Policy& policy,
                       const ModuleSet& modules, double death_penalty) {
  if (leaf.died) return leaf.reward + death_penalty;
  const Settled settled = settle(policy, observe_all(leaf.state), modules);
  return leaf.reward + values.value(macro_code(settled.modules));
}

Plan plan(const GameState& root, const LookaheadConfig& config, const CellSet& stop_cells,
          const LeafEvaluator& evaluate) {
  config.validate();
  Plan out;
  auto consider = [&](const TrajectoryNode& leaf) {
    const double v = evaluate(leaf);
    ++out.leaves;
    const Direction first = leaf.first_action();
    if (!out.action || v > out.value || (v == out.value && first < *out.action)) {
      out.action = first;
      out.value = v;
    }
  };
  Search search(config, stop_cells, consider);
  search.run(root);
  out.expansions = search.expansions();
  out.budget_exceeded = search.budget_exceeded();
  return out;
}

CellSet zigzag_cells(const std::vector<StepRecord>& trace) {
  CellSet cells;
  auto power_pair = [](ModuleKind a, ModuleKind b) {
    return (a == ModuleKind::FromPowerDot && b == ModuleKind::ToPowerDot) ||
           (a == ModuleKind::ToPowerDot && b == ModuleKind::FromPowerDot);
  };
  constexpr std::size_t kWindow = 4;
  for (std::size_t t = 0; t < trace.size(); ++t) {
    if (trace[t].action == Direction::Stop) continue;
    for (std::size_t u = t + 1; u < trace.size() && u < t + kWindow; ++u) {
      if (power_pair(trace[t].acting, trace[u].acting) && trace[u].action == opposite(trace[t].action)) {
        cells.set(trace[u].agent_cell);
      }
    }
  }
  return cells;
}

CellSet zigzag_cells(std::shared_ptr<const Maze> maze, const WorldConfig& world, const Policy& policy,
                     int episodes, std::uint64_t seed, const EpisodeOptions& options) {
  CellSet cells;
  RuleAgent agent(policy);
  for (int i = 0; i < episodes; ++i) {
    const EpisodeResult r = run_episode(maze, world, agent, derive_seed(seed, static_cast<std::uint64_t>(i)),
                                        options);
    cells |= zigzag_cells(r.trace);
  }
  return cells;
}

LookaheadAgent::LookaheadAgent(Policy policy, ValueTable values, LookaheadConfig config, CellSet stop_cells)
    : base_(std::move(policy)), values_(std::move(values)), config_(config), stop_cells_(stop_cells) {
  config_.validate();
}

void LookaheadAgent::begin_episode(const GameState& state) {
  base_.begin_episode(state);
  records_.clear();
  budget_hits_ = 0;
}

AgentStep LookaheadAgent::act(const GameState& state) {
  AgentStep choice = base_.act(state);
  if (config_.depth == 0) return choice;
  const Plan p = plan(state, config_, stop_cells_, [&](const TrajectoryNode& leaf) {
    return lookahead_value(leaf, values_, base_.policy(), base_.modules(), config_.death_penalty);
  });
  if (p.budget_exceeded) ++budget_hits_;
  if (p.action) choice.action = *p.action;
  if (recording_) records_.push_back({state.step_index, config_.depth, p.leaves, choice.action, p.value});
  return choice;
}

}  // namespace rulepac
