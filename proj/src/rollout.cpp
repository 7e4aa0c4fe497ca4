#include "rulepac/rollout.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include <json.hpp>

namespace rulepac {

RuleAgent::RuleAgent(Policy policy) : policy_(std::move(policy)), modules_(boot_modules(policy_)) {}

void RuleAgent::begin_episode(const GameState& /*state*/) {
  modules_ = boot_modules(policy_);
  last_ = {};
}

AgentStep RuleAgent::act(const GameState& state) {
  last_ = settle(policy_, observe_all(state), modules_);
  modules_ = last_.modules;
  return {module_direction(last_.acting, state), macro_code(modules_), last_.acting};
}

EpisodeResult run_episode(std::shared_ptr<const Maze> maze, const WorldConfig& config, Controller& controller,
                          std::uint64_t seed, const EpisodeOptions& options, const StepObserver& observer) {
  EpisodeResult result;
  result.seed = seed;
  Rng rng(seed);
  GameState state = reset(std::move(maze), config);
  controller.begin_episode(state);
  while (!state.terminal) {
    if (result.steps >= options.max_steps) {
      result.truncated = true;
      break;
    }
    const AgentStep choice = controller.act(state);
    const int cell = state.agent_cell;
    GameState before;
    if (observer) before = state;
    const StepOutcome outcome = step(state, choice.action, rng);
    for (const Event& e : outcome.events) {
      if (e.kind == EventKind::LifeLost) ++result.lives_lost;
      if (e.kind == EventKind::LevelCleared) result.cleared = true;
    }
    result.trace.push_back({choice.action, choice.macro, choice.acting, cell, outcome.reward});
    ++result.steps;
    if (observer) observer(before, choice, outcome, state);
  }
  result.score = state.score;
  return result;
}

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  workers.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    workers.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<EpisodeResult> run_batch(std::shared_ptr<const Maze> maze, const WorldConfig& config,
                                     const ControllerFactory& factory, std::uint64_t base_seed, int episodes,
                                     const EpisodeOptions& options, int threads) {
  std::vector<EpisodeResult> results(std::max(episodes, 0));
  parallel_for(episodes, threads, [&](int i) {
    auto controller = factory();
    results[i] = run_episode(maze, config, *controller, derive_seed(base_seed, static_cast<std::uint64_t>(i)),
                             options);
  });
  return results;
}

EvalReport summarize(const std::vector<EpisodeResult>& results) {
  EvalReport report;
  report.episodes = static_cast<int>(results.size());
  if (results.empty()) return report;
  std::vector<int> scores;
  double score_sum = 0.0, lives_sum = 0.0, steps_sum = 0.0;
  for (const EpisodeResult& r : results) {
    scores.push_back(r.score);
    score_sum += r.score;
    lives_sum += r.lives_lost;
    steps_sum += r.steps;
    if (r.cleared) ++report.cleared;
    for (const StepRecord& s : r.trace) ++report.macro_visits[s.macro];
  }
  const double n = static_cast<double>(results.size());
  report.mean_score = score_sum / n;
  report.mean_lives_lost = lives_sum / n;
  // With no life lost the whole score was earned on one life.
  report.mean_score_per_life =
      report.mean_lives_lost > 0.0 ? report.mean_score / report.mean_lives_lost : report.mean_score;
  report.mean_steps = steps_sum / n;
  std::sort(scores.begin(), scores.end());
  report.min_score = scores.front();
  report.max_score = scores.back();
  const std::size_t mid = scores.size() / 2;
  report.median_score = scores.size() % 2 ? scores[mid] : 0.5 * (scores[mid - 1] + scores[mid]);
  return report;
}

std::string report_csv(const EvalReport& r) {
  std::string csv =
      "episodes,mean_score,mean_lives_lost,mean_score_per_life,min_score,median_score,max_score,mean_steps,"
      "cleared\n";
  csv += std::to_string(r.episodes) + ',' + format_number(r.mean_score) + ',' + format_number(r.mean_lives_lost) +
         ',' + format_number(r.mean_score_per_life) + ',' + std::to_string(r.min_score) + ',' +
         format_number(r.median_score) + ',' + std::to_string(r.max_score) + ',' + format_number(r.mean_steps) +
         ',' + std::to_string(r.cleared) + '\n';
  return csv;
}

std::string report_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["episodes"] = r.episodes;
  j["mean_score"] = r.mean_score;
  j["mean_lives_lost"] = r.mean_lives_lost;
  j["mean_score_per_life"] = r.mean_score_per_life;
  j["score"] = {{"min", r.min_score}, {"median", r.median_score}, {"max", r.max_score}};
  j["mean_steps"] = r.mean_steps;
  j["cleared"] = r.cleared;
  nlohmann::ordered_json visits = nlohmann::ordered_json::object();
  for (const auto& [code, count] : r.macro_visits) visits[code.to_string()] = count;
  j["macro_visits"] = visits;
  return j.dump(2) + '\n';
}

}  // namespace rulepac
