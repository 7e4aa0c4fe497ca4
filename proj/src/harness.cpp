#include "rulepac/harness.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

namespace rulepac {

namespace fs = std::filesystem;

void ExperimentConfig::validate() const {
  world.validate();
  cem.validate();
  td.validate();
  lookahead.validate();
  if (max_steps < 1) throw ConfigError("max_steps must be >= 1");
  if (cem_slots < 1) throw ConfigError("cem slots must be >= 1");
  if (cem_init != "uniform" && cem_init != "prewired") throw ConfigError("cem init must be 'uniform' or 'prewired'");
  if (probe_episodes < 1) throw ConfigError("probe_episodes must be >= 1");
  for (int d : depths) {
    if (d < 0) throw ConfigError("look-ahead depths must be >= 0");
  }
  if (calibration_episodes < 0) throw ConfigError("calibration_episodes must be >= 0");
  if (episodes < 0) throw ConfigError("episodes must be >= 0");
  if (threads < 0) throw ConfigError("threads must be >= 0");
}

namespace {

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("config key '" + key + "': cannot parse '" + text + "'");
  }
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError("config key '" + key + "': expected a boolean, got '" + text + "'");
}

std::vector<int> parse_int_list(const std::string& key, const std::string& text) {
  std::vector<int> out;
  std::istringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw ConfigError("config key '" + key + "': empty list item");
    out.push_back(parse_number<int>(key, item.substr(b, e - b + 1)));
  }
  return out;
}

std::string resolve(const std::string& base_dir, const std::string& path) {
  if (path.empty() || base_dir.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(base_dir) / path).lexically_normal().string();
}

using Setter = std::function<void(const std::string& key, const std::string& value)>;

template <class T>
Setter number(T& field) {
  return [&field](const std::string& k, const std::string& v) { field = parse_number<T>(k, v); };
}

Setter text(std::string& field) {
  return [&field](const std::string&, const std::string& v) { field = v; };
}

}  // namespace

ExperimentConfig parse_config(const std::string& content, const std::string& base_dir) {
  boost::property_tree::ptree tree;
  std::istringstream in(content);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  ExperimentConfig c;
  const std::map<std::string, std::map<std::string, Setter>> keys = {
      {"world",
       {{"maze", text(c.maze_path)},
        {"ghost_chase_prob", number(c.world.ghost_chase_prob)},
        {"edible_duration_steps", number(c.world.edible_duration_steps)},
        {"ghost_edible_speed_divisor", number(c.world.ghost_edible_speed_divisor)},
        {"max_steps", number(c.max_steps)}}},
      {"cem",
       {{"samples", number(c.cem.samples)},
        {"elite_fraction", number(c.cem.elite_fraction)},
        {"iterations", number(c.cem.iterations)},
        {"episodes", number(c.cem.episodes)},
        {"smoothing", number(c.cem.smoothing)},
        {"floor", number(c.cem.floor)},
        {"slots", number(c.cem_slots)},
        {"init", text(c.cem_init)},
        {"probe_episodes", number(c.probe_episodes)}}},
      {"td",
       {{"alpha", number(c.td.alpha)}, {"gamma", number(c.td.gamma)}, {"bin_width", number(c.td.bin_width)}}},
      {"lookahead",
       {{"depths", [&c](const std::string& k, const std::string& v) { c.depths = parse_int_list(k, v); }},
        {"allow_stop_at_zigzag",
         [&c](const std::string& k, const std::string& v) { c.lookahead.allow_stop_at_zigzag = parse_bool(k, v); }},
        {"node_budget", number(c.lookahead.node_budget)},
        {"death_penalty", number(c.lookahead.death_penalty)},
        {"calibration_episodes", number(c.calibration_episodes)},
        {"values", text(c.values_path)}}},
      {"experiment",
       {{"episodes", number(c.episodes)},
        {"seed", number(c.seed)},
        {"out", text(c.out_dir)},
        {"policy", text(c.policy_path)},
        {"threads", number(c.threads)}}},
  };

  for (const auto& [section, node] : tree) {
    if (node.empty()) throw ConfigError("config: key '" + section + "' outside a section");
    auto known = keys.find(section);
    if (known == keys.end()) throw ConfigError("config: unknown section [" + section + "]");
    for (const auto& [key, leaf] : node) {
      auto setter = known->second.find(key);
      if (setter == known->second.end()) throw ConfigError("config: unknown key '" + key + "' in [" + section + "]");
      setter->second(section + "." + key, leaf.data());
    }
  }
  c.maze_path = resolve(base_dir, c.maze_path);
  c.policy_path = resolve(base_dir, c.policy_path);
  c.values_path = resolve(base_dir, c.values_path);
  c.out_dir = resolve(base_dir, c.out_dir);
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  return parse_config(read_file(path), fs::path(path).parent_path().string());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const std::string partial = path + ".partial";
  {
    std::ofstream out(partial, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write '" + partial + "'");
    out << content;
    out.close();
    if (!out) throw ConfigError("error writing '" + partial + "'");
  }
  fs::rename(partial, target);
}

Policy load_policy(const ExperimentConfig& config) {
  return config.policy_path.empty() ? prewired_policy() : load_policy_file(config.policy_path);
}

namespace {

std::shared_ptr<const Maze> load_maze(const ExperimentConfig& config) {
  return std::make_shared<const Maze>(Maze::load_file(config.maze_path));
}

std::string out_path(const ExperimentConfig& config, const std::string& name) {
  return (fs::path(config.out_dir) / name).string();
}

EpisodeOptions episode_options(const ExperimentConfig& config) { return {config.max_steps}; }

PolicyDistribution initial_distribution(const ExperimentConfig& config) {
  if (config.cem_init == "prewired") {
    return PolicyDistribution::concentrated(default_rule_pool(), prewired_policy(), config.cem.floor);
  }
  return PolicyDistribution(default_rule_pool(), config.cem_slots);
}

}  // namespace

void cmd_train(const ExperimentConfig& config, const TrainOptions& options) {
  config.validate();
  auto maze = load_maze(config);
  const EpisodeOptions episode = episode_options(config);
  CemConfig cem = config.cem;
  cem.seed = config.seed;
  cem.threads = config.threads;

  if (options.macro) {
    const Policy base = load_policy(config);
    const MacroOptimization result = optimize_macro(cem, maze, config.world, base, *options.macro,
                                                    initial_distribution(config), config.probe_episodes, episode);
    write_file_atomic(out_path(config, "macro_policy.txt"), to_text(result.sub_policy));
    write_file_atomic(out_path(config, "fitness_trace.csv"), trace_csv(result.trace));
    write_file_atomic(out_path(config, "macro_summary.csv"),
                      "macro_code,base_score,score,base_in_macro_score,in_macro_score\n" +
                          options.macro->to_string() + ',' + format_number(result.base_fitness) + ',' +
                          format_number(result.fitness) + ',' + format_number(result.base_in_macro_score) + ',' +
                          format_number(result.in_macro_score) + '\n');
    return;
  }

  CemState state = options.resume_path.empty() ? cem_start(cem, initial_distribution(config))
                                               : parse_checkpoint(read_file(options.resume_path));
  state.config.threads = config.threads;
  const FitnessFn fitness = episode_fitness(maze, config.world, state.config.episodes, episode);
  const std::string checkpoint = out_path(config, "checkpoint.txt");
  const TrainResult result = train(std::move(state), fitness, [&](const CemState& s) {
    write_file_atomic(checkpoint, checkpoint_text(s));
  });
  write_file_atomic(out_path(config, "best_policy.txt"), to_text(result.best_policy));
  write_file_atomic(out_path(config, "fitness_trace.csv"), trace_csv(result.trace));
}

EvalReport cmd_eval(const ExperimentConfig& config) {
  config.validate();
  if (config.episodes < 1) throw ConfigError("eval needs at least one episode");
  auto maze = load_maze(config);
  const Policy policy = load_policy(config);
  const EpisodeOptions episode = episode_options(config);
  const auto results = run_batch(
      maze, config.world, [&] { return std::make_unique<RuleAgent>(policy); }, config.seed, config.episodes,
      episode, config.threads);
  const EvalReport report = summarize(results);

  RuleAgent agent(policy);
  const std::uint64_t seed0 = derive_seed(config.seed, 0);
  ReplayRecorder recorder(reset(maze, config.world), seed0);
  run_episode(maze, config.world, agent, seed0, episode, recorder.observer());

  write_file_atomic(out_path(config, "eval_report.csv"), report_csv(report));
  write_file_atomic(out_path(config, "eval_report.json"), report_json(report));
  write_file_atomic(out_path(config, "replay_episode0.jsonl"), recorder.text());
  return report;
}

void cmd_td_stats(const ExperimentConfig& config) {
  config.validate();
  auto maze = load_maze(config);
  const Policy policy = load_policy(config);
  const auto results = run_batch(
      maze, config.world, [&] { return std::make_unique<RuleAgent>(policy); }, config.seed, config.episodes,
      episode_options(config), config.threads);
  ValueTable table(config.td.alpha, config.td.gamma);
  TdHistogram hist(config.td.bin_width);
  for (const EpisodeResult& r : results) record_episode(table, hist, r.trace);

  std::string peaks = "macro_code,updates,peaks\n";
  for (const auto& [code, bins] : hist.bins()) {
    peaks += code.to_string() + ',' + std::to_string(hist.total(code)) + ',' +
             std::to_string(count_peaks(hist.dense_counts(code))) + '\n';
  }
  write_file_atomic(out_path(config, "td_values.csv"), values_csv(table));
  write_file_atomic(out_path(config, "td_histogram.csv"), histogram_csv(hist));
  write_file_atomic(out_path(config, "td_histogram_masked.csv"), histogram_csv(hist, true));
  write_file_atomic(out_path(config, "td_peaks.csv"), peaks);
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string csv = "depth,mean_score,mean_lives_lost,mean_score_per_life\n";
  for (const SweepRow& r : rows) {
    csv += std::to_string(r.depth) + ',' + format_number(r.report.mean_score) + ',' +
           format_number(r.report.mean_lives_lost) + ',' + format_number(r.report.mean_score_per_life) + '\n';
  }
  return csv;
}

std::vector<SweepRow> cmd_lookahead_sweep(const ExperimentConfig& config, bool plan_trace) {
  config.validate();
  if (config.episodes < 1) throw ConfigError("lookahead-sweep needs at least one episode");
  if (config.values_path.empty()) throw ConfigError("lookahead-sweep needs a TD values file ([lookahead] values)");
  auto maze = load_maze(config);
  const Policy policy = load_policy(config);
  const ValueTable values = load_values_file(config.values_path, config.td.alpha, config.td.gamma);
  const EpisodeOptions episode = episode_options(config);
  const CellSet stops = zigzag_cells(maze, config.world, policy, config.calibration_episodes,
                                     derive_seed(config.seed, 0x2162A6), episode);

  std::vector<SweepRow> rows;
  std::string plans;
  for (int depth : config.depths) {
    LookaheadConfig la = config.lookahead;
    la.depth = depth;
    const auto results = run_batch(
        maze, config.world, [&] { return std::make_unique<LookaheadAgent>(policy, values, la, stops); },
        config.seed, config.episodes, episode, config.threads);
    rows.push_back({depth, summarize(results)});
    if (plan_trace) {
      LookaheadAgent agent(policy, values, la, stops);
      agent.set_recording(true);
      run_episode(maze, config.world, agent, derive_seed(config.seed, 0), episode);
      for (const PlanRecord& p : agent.records()) {
        nlohmann::ordered_json j;
        j["step_index"] = p.step_index;
        j["depth"] = p.depth;
        j["leaves"] = p.leaves;
        j["action"] = to_string(p.action);
        j["value"] = p.value;
        plans += j.dump() + '\n';
      }
    }
  }
  write_file_atomic(out_path(config, "lookahead_sweep.csv"), sweep_csv(rows));
  if (plan_trace) write_file_atomic(out_path(config, "lookahead_plans.jsonl"), plans);
  return rows;
}

ReplaySummary cmd_replay(const std::string& log_path, std::ostream& out) {
  std::ifstream in(log_path, std::ios::binary);
  if (!in) throw ConfigError("cannot open replay log '" + log_path + "'");
  return replay_log(in, out);
}

}  // namespace rulepac
