#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rulepac/rollout.hpp"
#include "rulepac/rules.hpp"

namespace rulepac {

struct CemConfig {
  int samples = 50;              // N
  double elite_fraction = 0.05;  // rho
  int iterations = 50;           // T
  int episodes = 5;              // E, episodes per fitness evaluation
  double smoothing = 0.7;        // beta
  double floor = 1e-3;           // epsilon
  std::uint64_t seed = 0;
  int threads = 1;

  void validate() const;
  bool operator==(const CemConfig&) const = default;
};

/// Candidate rules a slot can hold. The priority of a pool rule is ignored; a
/// drawn rule takes the priority of its slot.
std::vector<Rule> default_rule_pool();

/// Per-slot categorical distribution over {empty} plus a rule pool. Choice 0
/// is the empty slot, choice i > 0 is pool rule i-1.
class PolicyDistribution {
 public:
  PolicyDistribution() = default;
  /// Uniform over empty and every pool rule; slot s gets priority s+1.
  PolicyDistribution(std::vector<Rule> pool, int slots);

  /// All mass (up to `floor`) on `policy`, one slot per rule, keeping the
  /// rules' priorities. Rules missing from the pool are appended to it.
  static PolicyDistribution concentrated(std::vector<Rule> pool, const Policy& policy, double floor = 0.0);

  int slots() const { return static_cast<int>(probs_.size()); }
  const std::vector<Rule>& pool() const { return pool_; }
  int choices() const { return static_cast<int>(pool_.size()) + 1; }
  const std::vector<double>& probabilities(int slot) const { return probs_[slot]; }
  int slot_priority(int slot) const { return slot_priority_[slot]; }
  const std::vector<int>& slot_priorities() const { return slot_priority_; }

  void set_probabilities(int slot, std::vector<double> p);
  void set_slot_priorities(std::vector<int> priorities);

  /// Policy for one choice per slot.
  Policy policy_for(const std::vector<int>& choices) const;

  /// Throws ValidationError unless every slot sums to 1 within 1e-9 and no
  /// probability is below `floor`.
  void check(double floor = 0.0) const;

  bool operator==(const PolicyDistribution&) const = default;

 private:
  std::vector<Rule> pool_;
  std::vector<std::vector<double>> probs_;
  std::vector<int> slot_priority_;
};

struct FitnessSample {
  std::vector<int> choices;
  Policy policy;
  double fitness = 0.0;
  bool operator==(const FitnessSample&) const = default;
};

/// One choice per slot, drawn independently.
std::vector<int> draw_choices(const PolicyDistribution& dist, Rng& rng);
Policy draw_sample(const PolicyDistribution& dist, Rng& rng);

struct EliteSelection {
  std::vector<FitnessSample> elite;  // best first
  double theta = 0.0;                // fitness of the last elite sample
};

/// Number of elite samples: ceil(rho * n), at least 1.
int elite_count(int n, double rho);

/// Top ceil(rho*N) samples by fitness; equal fitness keeps draw order.
EliteSelection select_elite(const std::vector<FitnessSample>& samples, double rho);

/// (1-beta)*old + beta*elite frequency per slot, then the floor is applied and
/// each slot renormalized.
PolicyDistribution update_distribution(const PolicyDistribution& dist, const std::vector<FitnessSample>& elite,
                                       double beta, double floor);

struct TraceRow {
  int iteration = 0;
  double mean = 0.0;
  double theta = 0.0;
  double max = 0.0;  // best fitness seen so far
  bool operator==(const TraceRow&) const = default;
};

/// Fitness of a policy; `seed` is derived from (cem seed, iteration, sample).
using FitnessFn = std::function<double(const Policy& policy, std::uint64_t seed)>;

/// Everything needed to continue a run.
struct CemState {
  CemConfig config;
  PolicyDistribution dist;
  int iteration = 0;  // iterations completed
  Rng rng;
  std::optional<FitnessSample> best;
  std::vector<TraceRow> trace;

  bool operator==(const CemState&) const = default;
};

CemState cem_start(const CemConfig& config, PolicyDistribution initial);

/// One draw, evaluate, select, update round.
void cem_iterate(CemState& state, const FitnessFn& fitness);

struct TrainResult {
  Policy best_policy;
  double best_fitness = 0.0;
  std::vector<TraceRow> trace;
  PolicyDistribution dist;
};

/// Runs state up to config.iterations. `after_iteration` sees the state after
/// every completed iteration (checkpointing). Throws NoTraining when no
/// iteration has ever run.
TrainResult train(CemState state, const FitnessFn& fitness,
                  const std::function<void(const CemState&)>& after_iteration = {});
TrainResult train(const CemConfig& config, PolicyDistribution initial, const FitnessFn& fitness);

std::string trace_csv(const std::vector<TraceRow>& trace);

std::string checkpoint_text(const CemState& state);
CemState parse_checkpoint(const std::string& text);

/// Fitness = mean score over config.episodes episodes of the rule agent.
FitnessFn episode_fitness(std::shared_ptr<const Maze> maze, const WorldConfig& world, int episodes,
                          const EpisodeOptions& options = {});

/// Plays `base` everywhere except while its behavioural state equals `macro`;
/// there the sub-policy, which keeps its own module set, picks the move.
class MacroOverrideAgent : public Controller {
 public:
  MacroOverrideAgent(Policy base, Policy sub, MacroCode macro);

  void begin_episode(const GameState& state) override;
  AgentStep act(const GameState& state) override;

 private:
  RuleAgent base_;
  RuleAgent sub_;
  MacroCode macro_;
};

struct MacroOptimization {
  Policy sub_policy;
  double fitness = 0.0;         // mean episode score with the sub-policy in place
  double in_macro_score = 0.0;  // mean reward collected while in the macro
  double base_in_macro_score = 0.0;
  double base_fitness = 0.0;
  std::vector<TraceRow> trace;
};

/// CEM over sub-policies that act only inside `macro`. Throws MacroUnreachable
/// when `probe_episodes` of the base policy never enter the macro.
MacroOptimization optimize_macro(const CemConfig& config, std::shared_ptr<const Maze> maze,
                                 const WorldConfig& world, const Policy& base, MacroCode macro,
                                 PolicyDistribution initial, int probe_episodes = 20,
                                 const EpisodeOptions& options = {});

}  // namespace rulepac
