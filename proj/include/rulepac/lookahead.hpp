#pragma once

#include <bitset>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "rulepac/rollout.hpp"
#include "rulepac/rules.hpp"
#include "rulepac/td.hpp"
#include "rulepac/world.hpp"

namespace rulepac {

struct LookaheadConfig {
  int depth = 0;  // 0 disables planning
  bool allow_stop_at_zigzag = true;
  long node_budget = 5'000'000;
  double death_penalty = -1000.0;

  void validate() const;
};

using CellSet = std::bitset<Maze::kMaxCells>;

/// End of one enumerated trajectory.
struct TrajectoryNode {
  GameState state;
  int depth = 0;
  int reward = 0;  // points collected since the root
  std::vector<Direction> actions;
  bool died = false;     // a life was lost on the last step
  bool cleared = false;  // the level was cleared on the last step

  Direction first_action() const { return actions.empty() ? Direction::Stop : actions.front(); }
};

struct Enumeration {
  std::vector<TrajectoryNode> leaves;
  long expansions = 0;
  bool budget_exceeded = false;
};

/// Depth-first enumeration over the deterministic model. A path never enters
/// a tile it has already occupied; Stop is offered only on `stop_cells`.
/// Branches end at the depth limit, on a lost life, on clearing the level, or
/// when no move is left.
Enumeration enumerate(const GameState& root, const LookaheadConfig& config, const CellSet& stop_cells = {});

/// Scores a leaf. The planner maximizes it.
using LeafEvaluator = std::function<double(const TrajectoryNode& leaf)>;

/// Collected reward plus the value of the behavioural state the base policy
/// would settle into at the leaf, starting from `modules`. Leaves where a life
/// was lost get the death penalty instead. Clearing the level is not a reset
/// and is valued like any other leaf.
double lookahead_value(const TrajectoryNode& leaf, const ValueTable& values, const Policy& policy,
                       const ModuleSet& modules, double death_penalty);

struct Plan {
  std::optional<Direction> action;  // empty when planning is disabled or found no leaf
  double value = 0.0;
  long leaves = 0;
  long expansions = 0;
  bool budget_exceeded = false;
};

/// Argmax over leaves of `evaluate`; ties go to the first action in N, E, S,
/// W, Stop order, then to the earlier discovered leaf.
Plan plan(const GameState& root, const LookaheadConfig& config, const CellSet& stop_cells,
          const LeafEvaluator& evaluate);

/// Cells where `policy` reverses direction while alternating between
/// FromPowerDot and ToPowerDot within a 4-step window, found over
/// `episodes` calibration episodes.
CellSet zigzag_cells(std::shared_ptr<const Maze> maze, const WorldConfig& world, const Policy& policy,
                     int episodes, std::uint64_t seed, const EpisodeOptions& options = {});

/// Cells flagged by one episode trace.
CellSet zigzag_cells(const std::vector<StepRecord>& trace);

struct PlanRecord {
  int step_index = 0;
  int depth = 0;
  long leaves = 0;
  Direction action = Direction::Stop;
  double value = 0.0;
};

/// The base rule policy with look-ahead on top: the rule agent keeps its
/// module set up to date every step, and the planner picks the move.
class LookaheadAgent : public Controller {
 public:
  LookaheadAgent(Policy policy, ValueTable values, LookaheadConfig config, CellSet stop_cells);

  void begin_episode(const GameState& state) override;
  AgentStep act(const GameState& state) override;

  /// Keep a PlanRecord per planned step.
  void set_recording(bool on) { recording_ = on; }
  const std::vector<PlanRecord>& records() const { return records_; }
  long budget_hits() const { return budget_hits_; }

 private:
  RuleAgent base_;
  ValueTable values_;
  LookaheadConfig config_;
  CellSet stop_cells_;
  bool recording_ = false;
  std::vector<PlanRecord> records_;
  long budget_hits_ = 0;
};

}  // namespace rulepac
