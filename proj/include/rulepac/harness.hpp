#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rulepac/cem.hpp"
#include "rulepac/lookahead.hpp"
#include "rulepac/replay.hpp"
#include "rulepac/rollout.hpp"
#include "rulepac/td.hpp"

namespace rulepac {

struct ExperimentConfig {
  // [world]
  std::string maze_path = "mazes/canonical.txt";
  WorldConfig world;
  int max_steps = 3000;
  // [cem]
  CemConfig cem;
  int cem_slots = 12;
  std::string cem_init = "uniform";  // or "prewired"
  int probe_episodes = 20;
  // [td]
  TdConfig td;
  // [lookahead]
  LookaheadConfig lookahead;
  std::vector<int> depths = {0, 1, 2, 3, 4, 20};
  int calibration_episodes = 20;
  std::string values_path;
  // [experiment]
  int episodes = 200;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  std::string policy_path;  // empty: the pre-wired policy
  int threads = 1;

  void validate() const;
};

/// INI text with sections [world] [cem] [td] [lookahead] [experiment].
/// Relative paths are resolved against `base_dir`. Unknown keys are errors.
ExperimentConfig parse_config(const std::string& text, const std::string& base_dir = "");
ExperimentConfig load_config(const std::string& path);

/// Writes `path.partial`, then renames it over `path`.
void write_file_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

Policy load_policy(const ExperimentConfig& config);

struct TrainOptions {
  std::string resume_path;         // continue from this checkpoint
  std::optional<MacroCode> macro;  // optimize one behavioural state instead
};

/// Global mode writes checkpoint.txt (after every iteration), best_policy.txt
/// and fitness_trace.csv. Macro mode writes macro_policy.txt,
/// fitness_trace.csv and macro_summary.csv.
void cmd_train(const ExperimentConfig& config, const TrainOptions& options = {});

/// Writes eval_report.csv, eval_report.json and replay_episode0.jsonl.
EvalReport cmd_eval(const ExperimentConfig& config);

/// Writes td_values.csv, td_histogram.csv, td_histogram_masked.csv and td_peaks.csv.
void cmd_td_stats(const ExperimentConfig& config);

struct SweepRow {
  int depth = 0;
  EvalReport report;
};

/// Writes lookahead_sweep.csv, and with plan_trace one JSON record per planned
/// step of episode 0 at every depth to lookahead_plans.jsonl.
std::vector<SweepRow> cmd_lookahead_sweep(const ExperimentConfig& config, bool plan_trace = false);
std::string sweep_csv(const std::vector<SweepRow>& rows);

/// Renders a replay log to `out`. Throws CorruptLog.
ReplaySummary cmd_replay(const std::string& log_path, std::ostream& out);

}  // namespace rulepac
