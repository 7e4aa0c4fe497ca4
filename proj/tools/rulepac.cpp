// rulepac command-line harness: train, eval, td-stats, lookahead-sweep, replay.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rulepac/harness.hpp"

namespace {

struct GlobalFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> episodes;
};

rulepac::ExperimentConfig resolve_config(const GlobalFlags& flags) {
  rulepac::ExperimentConfig config =
      flags.config_path.empty() ? rulepac::ExperimentConfig{} : rulepac::load_config(flags.config_path);
  if (flags.seed) config.seed = *flags.seed;
  if (flags.out) config.out_dir = *flags.out;
  if (flags.episodes) config.episodes = *flags.episodes;
  config.validate();
  return config;
}

void add_globals(CLI::App& app, GlobalFlags& flags) {
  app.add_option("--config", flags.config_path, "INI experiment config");
  app.add_option("--seed", flags.seed, "Base random seed");
  app.add_option("--out", flags.out, "Output directory");
  app.add_option("--episodes", flags.episodes, "Episode count")->check(CLI::NonNegativeNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rule-based Pac-Man agents: CEM policy search, TD macro values, look-ahead planning"};
  app.require_subcommand(1);
  GlobalFlags flags;
  add_globals(app, flags);

  std::string policy_path;
  auto add_policy = [&](CLI::App* cmd) {
    cmd->add_option("--policy", policy_path, "Policy file (default: the pre-wired policy)");
  };

  CLI::App* train = app.add_subcommand("train", "Optimize a rule policy with the cross-entropy method");
  std::string resume_path, macro_text;
  train->add_option("--resume", resume_path, "Continue from a checkpoint file");
  train->add_option("--macro", macro_text, "Optimize only this behavioural state (6-digit code)");
  add_policy(train);

  CLI::App* eval = app.add_subcommand("eval", "Evaluate a policy over seeded episodes");
  add_policy(eval);

  CLI::App* td = app.add_subcommand("td-stats", "TD(0) macro values and TD-error histograms");
  add_policy(td);

  CLI::App* sweep = app.add_subcommand("lookahead-sweep", "Evaluate look-ahead planning at several depths");
  std::string values_path, depths_text;
  bool plan_trace = false;
  add_policy(sweep);
  sweep->add_option("--values", values_path, "TD values CSV");
  sweep->add_option("--depths", depths_text, "Comma-separated depths, e.g. 0,1,2,20");
  sweep->add_flag("--plan-trace", plan_trace, "Write lookahead_plans.jsonl for episode 0");

  CLI::App* replay = app.add_subcommand("replay", "Print an episode log as ASCII boards");
  std::string log_path;
  replay->add_option("log", log_path, "JSON-lines episode log")->required();

  for (CLI::App* cmd : {train, eval, td, sweep, replay}) add_globals(*cmd, flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (replay->parsed()) {
      rulepac::cmd_replay(log_path, std::cout);
      return 0;
    }
    rulepac::ExperimentConfig config = resolve_config(flags);
    if (!policy_path.empty()) config.policy_path = policy_path;

    if (train->parsed()) {
      rulepac::TrainOptions options;
      options.resume_path = resume_path;
      if (!macro_text.empty()) options.macro = rulepac::MacroCode::parse(macro_text);
      rulepac::cmd_train(config, options);
    } else if (eval->parsed()) {
      const rulepac::EvalReport report = rulepac::cmd_eval(config);
      std::cout << rulepac::report_csv(report);
    } else if (td->parsed()) {
      rulepac::cmd_td_stats(config);
    } else if (sweep->parsed()) {
      if (!values_path.empty()) config.values_path = values_path;
      if (!depths_text.empty()) {
        config.depths.clear();
        std::size_t start = 0;
        while (start <= depths_text.size()) {
          const std::size_t end = std::min(depths_text.find(',', start), depths_text.size());
          config.depths.push_back(std::stoi(depths_text.substr(start, end - start)));
          start = end + 1;
        }
      }
      std::cout << rulepac::sweep_csv(rulepac::cmd_lookahead_sweep(config, plan_trace));
    }
  } catch (const std::exception& e) {
    std::cerr << "rulepac: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
