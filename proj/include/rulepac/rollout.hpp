#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "rulepac/rules.hpp"
#include "rulepac/world.hpp"

namespace rulepac {

struct AgentStep {
  Direction action = Direction::Stop;
  MacroCode macro;
  ModuleKind acting = ModuleKind::ToDot;
};

/// Anything that picks the agent's move each step. Instances carry per-episode
/// state and are not shared between threads.
class Controller {
 public:
  virtual ~Controller() = default;
  virtual void begin_episode(const GameState& state) = 0;
  virtual AgentStep act(const GameState& state) = 0;
};

using ControllerFactory = std::function<std::unique_ptr<Controller>()>;

/// Executes a rule policy: settles the module set on the current observations
/// and moves in the acting module's direction.
class RuleAgent : public Controller {
 public:
  explicit RuleAgent(Policy policy);

  void begin_episode(const GameState& state) override;
  AgentStep act(const GameState& state) override;

  const Policy& policy() const { return policy_; }
  const ModuleSet& modules() const { return modules_; }
  const Settled& last_settle() const { return last_; }

 private:
  Policy policy_;
  ModuleSet modules_;
  Settled last_;
};

struct StepRecord {
  Direction action = Direction::Stop;
  MacroCode macro;
  ModuleKind acting = ModuleKind::ToDot;
  int agent_cell = -1;
  int reward = 0;
};

struct EpisodeResult {
  std::uint64_t seed = 0;
  int score = 0;
  int lives_lost = 0;
  int steps = 0;
  bool cleared = false;
  bool truncated = false;  // hit max_steps before the game ended
  std::vector<StepRecord> trace;
};

struct EpisodeOptions {
  int max_steps = 3000;
};

/// Called once per step with the state before and after the transition.
using StepObserver =
    std::function<void(const GameState& before, const AgentStep& step, const StepOutcome& outcome,
                       const GameState& after)>;

EpisodeResult run_episode(std::shared_ptr<const Maze> maze, const WorldConfig& config, Controller& controller,
                          std::uint64_t seed, const EpisodeOptions& options = {},
                          const StepObserver& observer = {});

/// Episode i runs with seed derive_seed(base_seed, i). Results are ordered by
/// episode index regardless of the thread count.
std::vector<EpisodeResult> run_batch(std::shared_ptr<const Maze> maze, const WorldConfig& config,
                                     const ControllerFactory& factory, std::uint64_t base_seed, int episodes,
                                     const EpisodeOptions& options = {}, int threads = 0);

/// Runs body(i) for i in [0, n) on `threads` workers (0 = hardware concurrency).
void parallel_for(int n, int threads, const std::function<void(int)>& body);

struct EvalReport {
  int episodes = 0;
  double mean_score = 0.0;
  double mean_lives_lost = 0.0;
  double mean_score_per_life = 0.0;
  int min_score = 0;
  double median_score = 0.0;
  int max_score = 0;
  double mean_steps = 0.0;
  int cleared = 0;
  std::map<MacroCode, long> macro_visits;  // steps spent in each behavioural state
};

EvalReport summarize(const std::vector<EpisodeResult>& results);
std::string report_csv(const EvalReport& report);
std::string report_json(const EvalReport& report);

}  // namespace rulepac
