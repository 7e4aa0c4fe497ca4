#include "rulepac/cem.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

namespace rulepac {

void CemConfig::validate() const {
  if (samples < 1) throw ConfigError("cem samples must be >= 1");
  if (!(elite_fraction > 0.0 && elite_fraction <= 1.0)) throw ConfigError("cem elite_fraction must be in (0, 1]");
  if (samples * elite_fraction < 1.0 - 1e-9) throw ConfigError("cem samples * elite_fraction must be >= 1");
  if (iterations < 0) throw ConfigError("cem iterations must be >= 0");
  if (episodes < 1) throw ConfigError("cem episodes must be >= 1");
  if (!(smoothing >= 0.0 && smoothing <= 1.0)) throw ConfigError("cem smoothing must be in [0, 1]");
  if (!(floor >= 0.0 && floor < 1.0)) throw ConfigError("cem floor must be in [0, 1)");
}

std::vector<Rule> default_rule_pool() {
  std::vector<ObservationAtom> atoms;
  constexpr double kDistances[] = {1, 2, 3, 5, 8, 10, 99};
  constexpr double kDensities[] = {0.5, 1.0, 1.5, 2.0};
  for (ObservationKind kind : {ObservationKind::NearestDot, ObservationKind::NearestPowerDot,
                               ObservationKind::NearestGhost, ObservationKind::NearestEdGhost}) {
    for (Comparison cmp : {Comparison::Less, Comparison::Greater}) {
      for (double t : kDistances) atoms.push_back({kind, cmp, t});
    }
  }
  for (Comparison cmp : {Comparison::Less, Comparison::Greater}) {
    for (double t : kDensities) atoms.push_back({ObservationKind::GhostDensity, cmp, t});
  }
  atoms.push_back({ObservationKind::Constant, Comparison::Greater, 0});

  std::vector<Rule> pool;
  for (const ObservationAtom& atom : atoms) {
    for (ModuleKind module : kModuleKinds) {
      for (bool on : {true, false}) pool.push_back(Rule{Condition{{atom}}, module, on, 1});
    }
  }
  const Policy prewired = prewired_policy();
  for (Rule rule : prewired.rules()) {
    rule.priority = 1;
    if (std::find(pool.begin(), pool.end(), rule) == pool.end()) pool.push_back(rule);
  }
  return pool;
}

// ---------------------------------------------------------------------------
// PolicyDistribution
// ---------------------------------------------------------------------------

PolicyDistribution::PolicyDistribution(std::vector<Rule> pool, int slots) : pool_(std::move(pool)) {
  if (slots < 0) throw ValidationError("slot count must be >= 0");
  for (Rule& rule : pool_) rule.priority = 1;
  const double uniform = 1.0 / static_cast<double>(choices());
  probs_.assign(slots, std::vector<double>(choices(), uniform));
  slot_priority_.resize(slots);
  std::iota(slot_priority_.begin(), slot_priority_.end(), 1);
}

namespace {

// Mixes the floor in so that every entry is >= floor and the slot still sums to 1.
void apply_floor(std::vector<double>& p, double floor) {
  const double sum = std::accumulate(p.begin(), p.end(), 0.0);
  const double free_mass = 1.0 - floor * static_cast<double>(p.size());
  if (free_mass < 0.0) throw ValidationError("probability floor too large for the rule pool");
  for (double& x : p) x = floor + free_mass * (x / sum);
}

}  // namespace

PolicyDistribution PolicyDistribution::concentrated(std::vector<Rule> pool, const Policy& policy, double floor) {
  PolicyDistribution dist(std::move(pool), 0);
  std::vector<int> picks;
  for (Rule rule : policy.rules()) {
    const int priority = rule.priority;
    rule.priority = 1;
    auto it = std::find(dist.pool_.begin(), dist.pool_.end(), rule);
    if (it == dist.pool_.end()) {
      dist.pool_.push_back(rule);
      it = dist.pool_.end() - 1;
    }
    picks.push_back(static_cast<int>(it - dist.pool_.begin()) + 1);
    dist.slot_priority_.push_back(priority);
  }
  for (int pick : picks) {
    std::vector<double> p(dist.choices(), 0.0);
    p[pick] = 1.0;
    if (floor > 0.0) apply_floor(p, floor);
    dist.probs_.push_back(std::move(p));
  }
  return dist;
}

void PolicyDistribution::set_probabilities(int slot, std::vector<double> p) {
  if (static_cast<int>(p.size()) != choices()) throw ValidationError("probability vector has the wrong length");
  probs_.at(slot) = std::move(p);
}

void PolicyDistribution::set_slot_priorities(std::vector<int> priorities) {
  if (priorities.size() != probs_.size()) throw ValidationError("one priority per slot required");
  for (int p : priorities) {
    if (p < 1) throw ValidationError("slot priority must be >= 1");
  }
  slot_priority_ = std::move(priorities);
}

Policy PolicyDistribution::policy_for(const std::vector<int>& choices) const {
  if (static_cast<int>(choices.size()) != slots()) throw ValidationError("one choice per slot required");
  std::vector<Rule> rules;
  for (int s = 0; s < slots(); ++s) {
    if (choices[s] == 0) continue;
    Rule rule = pool_.at(choices[s] - 1);
    rule.priority = slot_priority_[s];
    rules.push_back(std::move(rule));
  }
  return Policy(std::move(rules));
}

void PolicyDistribution::check(double floor) const {
  for (int s = 0; s < slots(); ++s) {
    double sum = 0.0;
    for (double x : probs_[s]) {
      if (!(x >= floor - 1e-15)) throw ValidationError("slot " + std::to_string(s) + " has mass below the floor");
      sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ValidationError("slot " + std::to_string(s) + " does not sum to 1");
  }
}

// ---------------------------------------------------------------------------
// Sampling, selection, update
// ---------------------------------------------------------------------------

std::vector<int> draw_choices(const PolicyDistribution& dist, Rng& rng) {
  std::vector<int> choices(dist.slots(), 0);
  for (int s = 0; s < dist.slots(); ++s) {
    const std::vector<double>& p = dist.probabilities(s);
    const double u = uniform01(rng);
    double acc = 0.0;
    int pick = -1;
    for (int i = 0; i < static_cast<int>(p.size()); ++i) {
      if (p[i] <= 0.0) continue;
      pick = i;
      acc += p[i];
      if (u < acc) break;
    }
    choices[s] = std::max(pick, 0);
  }
  return choices;
}

Policy draw_sample(const PolicyDistribution& dist, Rng& rng) { return dist.policy_for(draw_choices(dist, rng)); }

int elite_count(int n, double rho) {
  // The epsilon keeps products such as 100 * 0.05 = 5.000000000000001 at 5.
  const int k = static_cast<int>(std::ceil(rho * n - 1e-9));
  return std::clamp(k, 1, std::max(n, 1));
}

EliteSelection select_elite(const std::vector<FitnessSample>& samples, double rho) {
  if (samples.empty()) throw EmptySamples("select_elite needs at least one sample");
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return samples[a].fitness > samples[b].fitness; });
  EliteSelection out;
  const int k = elite_count(static_cast<int>(samples.size()), rho);
  for (int i = 0; i < k; ++i) out.elite.push_back(samples[order[i]]);
  out.theta = out.elite.back().fitness;
  return out;
}

PolicyDistribution update_distribution(const PolicyDistribution& dist, const std::vector<FitnessSample>& elite,
                                       double beta, double floor) {
  if (elite.empty()) throw EmptySamples("update_distribution needs a non-empty elite");
  PolicyDistribution next = dist;
  const double weight = 1.0 / static_cast<double>(elite.size());
  for (int s = 0; s < dist.slots(); ++s) {
    std::vector<double> freq(dist.choices(), 0.0);
    for (const FitnessSample& e : elite) freq.at(e.choices.at(s)) += weight;
    std::vector<double> p = dist.probabilities(s);
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = (1.0 - beta) * p[i] + beta * freq[i];
    if (floor > 0.0) apply_floor(p, floor);
    next.set_probabilities(s, std::move(p));
  }
  return next;
}

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

namespace {

constexpr std::uint64_t kDrawStream = 0xD4A7;

}  // namespace

CemState cem_start(const CemConfig& config, PolicyDistribution initial) {
  config.validate();
  CemState state;
  state.config = config;
  state.dist = std::move(initial);
  state.rng.seed(derive_seed(config.seed, kDrawStream));
  return state;
}

void cem_iterate(CemState& state, const FitnessFn& fitness) {
  const CemConfig& cfg = state.config;
  const auto iteration = static_cast<std::uint64_t>(state.iteration);
  std::vector<FitnessSample> samples(cfg.samples);
  for (FitnessSample& s : samples) {
    s.choices = draw_choices(state.dist, state.rng);
    s.policy = state.dist.policy_for(s.choices);
  }
  parallel_for(cfg.samples, cfg.threads, [&](int i) {
    samples[i].fitness = fitness(samples[i].policy, derive_seed(cfg.seed, iteration, static_cast<std::uint64_t>(i)));
  });

  double sum = 0.0;
  for (const FitnessSample& s : samples) {
    sum += s.fitness;
    if (!state.best || s.fitness > state.best->fitness) state.best = s;
  }
  EliteSelection sel = select_elite(samples, cfg.elite_fraction);
  state.dist = update_distribution(state.dist, sel.elite, cfg.smoothing, cfg.floor);
  ++state.iteration;
  state.trace.push_back({state.iteration, sum / cfg.samples, sel.theta, state.best->fitness});
}

TrainResult train(CemState state, const FitnessFn& fitness, const std::function<void(const CemState&)>& after_iteration) {
  while (state.iteration < state.config.iterations) {
    cem_iterate(state, fitness);
    if (after_iteration) after_iteration(state);
  }
  if (!state.best) throw NoTraining("no CEM iteration was run, so there is no best policy");
  return {state.best->policy, state.best->fitness, state.trace, state.dist};
}

TrainResult train(const CemConfig& config, PolicyDistribution initial, const FitnessFn& fitness) {
  return train(cem_start(config, std::move(initial)), fitness);
}

std::string trace_csv(const std::vector<TraceRow>& trace) {
  std::string csv = "iteration,mean,theta,max\n";
  for (const TraceRow& r : trace) {
    csv += std::to_string(r.iteration) + ',' + format_number(r.mean) + ',' + format_number(r.theta) + ',' +
           format_number(r.max) + '\n';
  }
  return csv;
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

namespace {

constexpr std::string_view kCheckpointMagic = "rulepac-cem-checkpoint 1";

double parse_double(std::string_view text) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParseError("checkpoint: bad number '" + std::string(text) + "'");
  }
  return value;
}

template <class Int>
Int parse_int(std::string_view text) {
  Int value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParseError("checkpoint: bad integer '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string> words(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

}  // namespace

std::string checkpoint_text(const CemState& state) {
  const CemConfig& c = state.config;
  std::ostringstream out;
  out << kCheckpointMagic << '\n';
  out << "samples " << c.samples << '\n';
  out << "elite_fraction " << format_number(c.elite_fraction) << '\n';
  out << "iterations " << c.iterations << '\n';
  out << "episodes " << c.episodes << '\n';
  out << "smoothing " << format_number(c.smoothing) << '\n';
  out << "floor " << format_number(c.floor) << '\n';
  out << "seed " << c.seed << '\n';
  out << "iteration " << state.iteration << '\n';
  out << "rng " << state.rng << '\n';
  const PolicyDistribution& d = state.dist;
  out << "slots " << d.slots() << '\n';
  out << "priorities";
  for (int p : d.slot_priorities()) out << ' ' << p;
  out << '\n';
  out << "pool " << d.pool().size() << '\n';
  for (const Rule& rule : d.pool()) out << to_text(rule) << '\n';
  for (int s = 0; s < d.slots(); ++s) {
    out << "probs";
    for (double p : d.probabilities(s)) out << ' ' << format_number(p);
    out << '\n';
  }
  if (state.best) {
    out << "best " << format_number(state.best->fitness);
    for (int ch : state.best->choices) out << ' ' << ch;
    out << '\n';
  } else {
    out << "best none\n";
  }
  for (const TraceRow& r : state.trace) {
    out << "trace " << r.iteration << ' ' << format_number(r.mean) << ' ' << format_number(r.theta) << ' '
        << format_number(r.max) << '\n';
  }
  out << "end\n";
  return out.str();
}

CemState parse_checkpoint(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  auto next_line = [&]() -> std::string {
    if (!std::getline(in, line)) throw ParseError("checkpoint: unexpected end of file");
    return line;
  };
  auto field = [&](std::string_view key) -> std::vector<std::string> {
    std::vector<std::string> w = words(next_line());
    if (w.empty() || w[0] != key) throw ParseError("checkpoint: expected '" + std::string(key) + "'");
    w.erase(w.begin());
    return w;
  };
  auto single = [&](std::string_view key) {
    std::vector<std::string> w = field(key);
    if (w.size() != 1) throw ParseError("checkpoint: '" + std::string(key) + "' takes one value");
    return w[0];
  };

  if (next_line() != kCheckpointMagic) throw ParseError("not a CEM checkpoint");
  CemState state;
  CemConfig& c = state.config;
  c.samples = parse_int<int>(single("samples"));
  c.elite_fraction = parse_double(single("elite_fraction"));
  c.iterations = parse_int<int>(single("iterations"));
  c.episodes = parse_int<int>(single("episodes"));
  c.smoothing = parse_double(single("smoothing"));
  c.floor = parse_double(single("floor"));
  c.seed = parse_int<std::uint64_t>(single("seed"));
  c.validate();
  state.iteration = parse_int<int>(single("iteration"));
  {
    next_line();
    if (line.rfind("rng ", 0) != 0) throw ParseError("checkpoint: expected 'rng'");
    std::istringstream rng_in(line.substr(4));
    rng_in >> state.rng;
    if (!rng_in) throw ParseError("checkpoint: bad rng state");
  }
  const int slots = parse_int<int>(single("slots"));
  std::vector<int> priorities;
  for (const std::string& w : field("priorities")) priorities.push_back(parse_int<int>(w));
  const auto pool_size = parse_int<std::size_t>(single("pool"));
  std::vector<Rule> pool;
  for (std::size_t i = 0; i < pool_size; ++i) pool.push_back(parse_rule(next_line()));
  PolicyDistribution dist(std::move(pool), slots);
  dist.set_slot_priorities(std::move(priorities));
  for (int s = 0; s < slots; ++s) {
    std::vector<double> p;
    for (const std::string& w : field("probs")) p.push_back(parse_double(w));
    dist.set_probabilities(s, std::move(p));
  }
  state.dist = std::move(dist);

  std::vector<std::string> best = field("best");
  if (best.empty()) throw ParseError("checkpoint: empty 'best'");
  if (best[0] != "none") {
    FitnessSample s;
    s.fitness = parse_double(best[0]);
    for (std::size_t i = 1; i < best.size(); ++i) s.choices.push_back(parse_int<int>(best[i]));
    s.policy = state.dist.policy_for(s.choices);
    state.best = std::move(s);
  }
  while (true) {
    std::vector<std::string> w = words(next_line());
    if (w.size() == 1 && w[0] == "end") break;
    if (w.size() != 5 || w[0] != "trace") throw ParseError("checkpoint: bad trace row");
    state.trace.push_back({parse_int<int>(w[1]), parse_double(w[2]), parse_double(w[3]), parse_double(w[4])});
  }
  if (static_cast<int>(state.trace.size()) != state.iteration) {
    throw ParseError("checkpoint: trace length does not match the iteration count");
  }
  return state;
}

// ---------------------------------------------------------------------------
// Game fitness and per-macro optimization
// ---------------------------------------------------------------------------

FitnessFn episode_fitness(std::shared_ptr<const Maze> maze, const WorldConfig& world, int episodes,
                          const EpisodeOptions& options) {
  return [maze, world, episodes, options](const Policy& policy, std::uint64_t seed) {
    RuleAgent agent(policy);
    double total = 0.0;
    for (int e = 0; e < episodes; ++e) {
      total += run_episode(maze, world, agent, derive_seed(seed, static_cast<std::uint64_t>(e)), options).score;
    }
    return total / episodes;
  };
}

MacroOverrideAgent::MacroOverrideAgent(Policy base, Policy sub, MacroCode macro)
    : base_(std::move(base)), sub_(std::move(sub)), macro_(macro) {}

void MacroOverrideAgent::begin_episode(const GameState& state) {
  base_.begin_episode(state);
  sub_.begin_episode(state);
}

AgentStep MacroOverrideAgent::act(const GameState& state) {
  AgentStep base = base_.act(state);
  const AgentStep sub = sub_.act(state);
  if (base.macro == macro_) {
    base.action = sub.action;
    base.acting = sub.acting;
  }
  return base;
}

namespace {

struct MacroScore {
  double episode = 0.0;
  double in_macro = 0.0;
};

MacroScore score_in_macro(std::shared_ptr<const Maze> maze, const WorldConfig& world, Controller& agent,
                          MacroCode macro, int episodes, std::uint64_t seed, const EpisodeOptions& options) {
  MacroScore out;
  for (int e = 0; e < episodes; ++e) {
    const EpisodeResult r = run_episode(maze, world, agent, derive_seed(seed, static_cast<std::uint64_t>(e)), options);
    out.episode += r.score;
    for (const StepRecord& s : r.trace) {
      if (s.macro == macro) out.in_macro += s.reward;
    }
  }
  out.episode /= episodes;
  out.in_macro /= episodes;
  return out;
}

}  // namespace

MacroOptimization optimize_macro(const CemConfig& config, std::shared_ptr<const Maze> maze,
                                 const WorldConfig& world, const Policy& base, MacroCode macro,
                                 PolicyDistribution initial, int probe_episodes, const EpisodeOptions& options) {
  config.validate();
  if (probe_episodes < 1) throw ConfigError("probe_episodes must be >= 1");
  const std::uint64_t probe_seed = derive_seed(config.seed, 0x9E0BE);
  bool reached = false;
  {
    RuleAgent agent(base);
    for (int e = 0; e < probe_episodes && !reached; ++e) {
      const EpisodeResult r =
          run_episode(maze, world, agent, derive_seed(probe_seed, static_cast<std::uint64_t>(e)), options);
      reached = std::any_of(r.trace.begin(), r.trace.end(), [&](const StepRecord& s) { return s.macro == macro; });
    }
  }
  if (!reached) {
    throw MacroUnreachable("macro " + macro.to_string() + " never occurs in " + std::to_string(probe_episodes) +
                           " probe episodes");
  }

  const int episodes = config.episodes;
  FitnessFn fitness = [&](const Policy& sub, std::uint64_t seed) {
    MacroOverrideAgent agent(base, sub, macro);
    double total = 0.0;
    for (int e = 0; e < episodes; ++e) {
      total += run_episode(maze, world, agent, derive_seed(seed, static_cast<std::uint64_t>(e)), options).score;
    }
    return total / episodes;
  };
  TrainResult trained = train(config, std::move(initial), fitness);

  MacroOptimization out;
  out.sub_policy = trained.best_policy;
  out.trace = std::move(trained.trace);
  MacroOverrideAgent tuned(base, out.sub_policy, macro);
  RuleAgent plain(base);
  const MacroScore with_sub = score_in_macro(maze, world, tuned, macro, probe_episodes, probe_seed, options);
  const MacroScore without = score_in_macro(maze, world, plain, macro, probe_episodes, probe_seed, options);
  out.fitness = with_sub.episode;
  out.in_macro_score = with_sub.in_macro;
  out.base_fitness = without.episode;
  out.base_in_macro_score = without.in_macro;
  return out;
}

}  // namespace rulepac
