#include "rulepac/rules.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace rulepac {

std::string_view to_string(ModuleKind kind) {
  switch (kind) {
    case ModuleKind::ToDot: return "ToDot";
    case ModuleKind::ToPowerDot: return "ToPowerDot";
    case ModuleKind::FromPowerDot: return "FromPowerDot";
    case ModuleKind::ToEdGhost: return "ToEdGhost";
    case ModuleKind::FromGhost: return "FromGhost";
    case ModuleKind::ToNearestPill: return "ToNearestPill";
  }
  return "?";
}

std::optional<ModuleKind> parse_module_kind(std::string_view text) {
  for (ModuleKind kind : kModuleKinds) {
    if (to_string(kind) == text) return kind;
  }
  return std::nullopt;
}

Policy::Policy(std::vector<Rule> rules) : rules_(std::move(rules)) {
  for (const Rule& rule : rules_) {
    if (rule.priority < 1) throw ValidationError("rule priority must be >= 1");
    if (rule.condition.conjuncts.empty()) throw ValidationError("rule condition must not be empty");
  }
  std::stable_sort(rules_.begin(), rules_.end(),
                   [](const Rule& a, const Rule& b) { return a.priority < b.priority; });
}

// ---------------------------------------------------------------------------
// ModuleSet / MacroCode
// ---------------------------------------------------------------------------

ModuleSet ModuleSet::all_off() {
  ModuleSet set;
  for (ModuleKind kind : kModuleKinds) set.switch_off(kind);
  return set;
}

std::optional<int> ModuleSet::priority(ModuleKind kind) const {
  const Entry& e = entries_[index(kind)];
  if (e.state != ModuleState::On) return std::nullopt;
  return e.priority;
}

std::optional<ModuleKind> ModuleSet::acting() const {
  std::optional<ModuleKind> best;
  int best_priority = 0;
  for (ModuleKind kind : kModuleKinds) {
    const Entry& e = entries_[index(kind)];
    if (e.state == ModuleState::On && (!best || e.priority < best_priority)) {
      best = kind;
      best_priority = e.priority;
    }
  }
  return best;
}

std::string MacroCode::to_string() const {
  std::string digits(6, '0');
  for (int i = 0; i < 6; ++i) {
    if (bits & (1u << (5 - i))) digits[i] = '1';
  }
  return digits;
}

MacroCode MacroCode::parse(std::string_view digits) {
  if (digits.size() != 6) throw ParseError("macro code must have 6 digits");
  MacroCode code;
  for (int i = 0; i < 6; ++i) {
    if (digits[i] == '1') {
      code.bits |= static_cast<std::uint8_t>(1u << (5 - i));
    } else if (digits[i] != '0') {
      throw ParseError("macro code digits must be 0 or 1");
    }
  }
  return code;
}

MacroCode macro_code(const ModuleSet& modules) {
  const bool digits[6] = {
      modules.state(ModuleKind::FromGhost) == ModuleState::On,
      modules.state(ModuleKind::FromGhost) == ModuleState::Off,
      modules.is_on(ModuleKind::ToPowerDot),
      modules.is_on(ModuleKind::ToEdGhost),
      modules.is_on(ModuleKind::FromPowerDot),
      modules.is_on(ModuleKind::ToNearestPill),
  };
  MacroCode code;
  for (int i = 0; i < 6; ++i) {
    if (digits[i]) code.bits |= static_cast<std::uint8_t>(1u << (5 - i));
  }
  return code;
}

// ---------------------------------------------------------------------------
// Decision making
// ---------------------------------------------------------------------------

bool eval_condition(const Condition& condition, const Observations& obs, const ModuleSet& modules) {
  for (const Atom& atom : condition.conjuncts) {
    const bool holds = std::visit(
        [&](const auto& a) {
          using T = std::decay_t<decltype(a)>;
          if constexpr (std::is_same_v<T, ObservationAtom>) {
            const double value = obs[a.kind];
            return a.comparison == Comparison::Less ? value < a.threshold : value > a.threshold;
          } else {
            return modules.is_on(a.module) == a.on;
          }
        },
        atom);
    if (!holds) return false;
  }
  return true;
}

namespace {

void apply(const Rule& rule, ModuleSet& modules) {
  if (rule.switch_on) {
    modules.switch_on(rule.module, rule.priority);
  } else {
    modules.switch_off(rule.module);
  }
}

void resolve_acting(const ModuleSet& modules, ModuleKind& acting, bool& fallback) {
  if (auto kind = modules.acting()) {
    acting = *kind;
    fallback = false;
  } else {
    acting = ModuleKind::ToDot;
    fallback = true;
  }
}

bool is_unconditional(const Rule& rule) {
  return std::all_of(rule.condition.conjuncts.begin(), rule.condition.conjuncts.end(), [](const Atom& atom) {
    const auto* a = std::get_if<ObservationAtom>(&atom);
    return a && a->kind == ObservationKind::Constant &&
           (a->comparison == Comparison::Greater ? 1.0 > a->threshold : 1.0 < a->threshold);
  });
}

}  // namespace

Decision decide(const Policy& policy, const Observations& obs, const ModuleSet& modules) {
  Decision d;
  d.modules = modules;
  const auto& rules = policy.rules();
  for (std::size_t i = 0; i < rules.size(); ++i) {
    if (!eval_condition(rules[i].condition, obs, modules)) continue;
    apply(rules[i], d.modules);
    d.fired = i;
    d.changed = !(d.modules == modules);
    break;
  }
  resolve_acting(d.modules, d.acting, d.no_active_module);
  return d;
}

Settled settle(const Policy& policy, const Observations& obs, const ModuleSet& modules) {
  Settled s;
  s.modules = modules;
  const int cap = static_cast<int>(policy.size()) + 1;
  while (true) {
    if (s.decisions == cap) {
      s.capped = true;
      break;
    }
    Decision d = decide(policy, obs, s.modules);
    ++s.decisions;
    if (!d.fired || !d.changed) break;
    s.modules = d.modules;
    ++s.changes;
  }
  resolve_acting(s.modules, s.acting, s.no_active_module);
  return s;
}

ModuleSet boot_modules(const Policy& policy) {
  ModuleSet modules = ModuleSet::all_off();
  for (const Rule& rule : policy.rules()) {
    if (is_unconditional(rule)) apply(rule, modules);
  }
  return modules;
}

// ---------------------------------------------------------------------------
// Module steering
// ---------------------------------------------------------------------------

namespace {

enum class Target { Dots, PowerDots, EdibleGhosts, NormalGhosts };

std::optional<int> distance_to(const GameState& s, Target target, int from) {
  switch (target) {
    case Target::Dots: {
      auto d = nearest_dot_distance(s, from);
      return d ? d : nearest_power_dot_distance(s, from);
    }
    case Target::PowerDots: return nearest_power_dot_distance(s, from);
    case Target::EdibleGhosts: return nearest_ghost_distance(s, from, GhostMode::Edible);
    case Target::NormalGhosts: return nearest_ghost_distance(s, from, GhostMode::Normal);
  }
  return std::nullopt;
}

Direction steer(const GameState& s, Target target, bool away) {
  const Maze& maze = *s.maze;
  Direction best = Direction::Stop;
  int best_distance = 0;
  for (Direction d : kMoves) {
    const int next = maze.neighbor(s.agent_cell, d);
    if (next < 0) continue;
    const auto dist = distance_to(s, target, next);
    if (!dist) continue;
    if (best == Direction::Stop || (away ? *dist > best_distance : *dist < best_distance)) {
      best = d;
      best_distance = *dist;
    }
  }
  return best;
}

}  // namespace

Direction module_direction(ModuleKind kind, const GameState& state) {
  Target target = Target::Dots;
  bool away = false;
  switch (kind) {
    case ModuleKind::ToDot:
    case ModuleKind::ToNearestPill: break;
    case ModuleKind::ToPowerDot: target = Target::PowerDots; break;
    case ModuleKind::FromPowerDot:
      target = Target::PowerDots;
      away = true;
      break;
    case ModuleKind::ToEdGhost: target = Target::EdibleGhosts; break;
    case ModuleKind::FromGhost:
      target = Target::NormalGhosts;
      away = true;
      break;
  }
  if (!distance_to(state, target, state.agent_cell)) {
    target = Target::Dots;
    away = false;
  }
  Direction d = steer(state, target, away);
  if (d == Direction::Stop) {
    const DirectionList moves = legal_moves(state);
    if (!moves.empty()) d = moves.front();
  }
  return d;
}

// ---------------------------------------------------------------------------
// Pre-wired policy
// ---------------------------------------------------------------------------

namespace {

// The two priority-2 rules are the zig-zag pair; the priority-1 rules keep the
// ToPowerDot / ToEdGhost / FromPowerDot group mutually exclusive and flip
// FromGhost with a 4/6 hysteresis. GhostDensity takes multiples of 0.1, so
// ">1.45" is the complement of "<1.5".
constexpr std::string_view kPrewiredPolicy = R"(P1: if NearestGhost<4 and FromGhost- then FromGhost+
P1: if NearestGhost>5 and FromGhost+ then FromGhost-
P1: if NearestEdGhost<100 and ToPowerDot+ then ToPowerDot-
P1: if NearestEdGhost<100 and FromPowerDot+ then FromPowerDot-
P1: if NearestEdGhost<100 then ToEdGhost+
P1: if ToEdGhost+ then ToEdGhost-
P1: if NearestPowerDot>4 and FromPowerDot+ then FromPowerDot-
P1: if GhostDensity>1.45 and FromPowerDot+ then FromPowerDot-
P1: if GhostDensity<1.5 and NearestPowerDot<5 and ToPowerDot+ then ToPowerDot-
P2: if GhostDensity<1.5 and NearestPowerDot<5 then FromPowerDot+
P2: if NearestEdGhost>99 then ToPowerDot+
P3: if Constant>0 then ToNearestPill+
)";

}  // namespace

Policy prewired_policy() { return parse_policy(kPrewiredPolicy); }

// ---------------------------------------------------------------------------
// Text format
// ---------------------------------------------------------------------------

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, std::string_view separator) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t at = s.find(separator, start);
    if (at == std::string_view::npos) {
      parts.push_back(s.substr(start));
      return parts;
    }
    parts.push_back(s.substr(start, at - start));
    start = at + separator.size();
  }
}

Atom parse_atom(std::string_view text) {
  text = trim(text);
  if (text.size() >= 2 && text.front() == '(' && text.back() == ')') text = trim(text.substr(1, text.size() - 2));
  const std::size_t cmp_at = text.find_first_of("<>");
  if (cmp_at != std::string_view::npos) {
    const auto kind = parse_observation_kind(trim(text.substr(0, cmp_at)));
    if (!kind) throw ParseError("unknown observation in atom '" + std::string(text) + "'");
    const std::string_view number = trim(text.substr(cmp_at + 1));
    double threshold = 0.0;
    const auto [ptr, ec] = std::from_chars(number.data(), number.data() + number.size(), threshold);
    if (ec != std::errc() || ptr != number.data() + number.size()) {
      throw ParseError("bad threshold in atom '" + std::string(text) + "'");
    }
    if (threshold < 0.0) throw ParseError("thresholds must be non-negative");
    return ObservationAtom{*kind, text[cmp_at] == '<' ? Comparison::Less : Comparison::Greater, threshold};
  }
  if (text.size() < 2 || (text.back() != '+' && text.back() != '-')) {
    throw ParseError("malformed atom '" + std::string(text) + "'");
  }
  const auto module = parse_module_kind(text.substr(0, text.size() - 1));
  if (!module) throw ParseError("unknown module in atom '" + std::string(text) + "'");
  return ModuleAtom{*module, text.back() == '+'};
}

}  // namespace

std::string to_text(const Atom& atom) {
  return std::visit(
      [](const auto& a) -> std::string {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, ObservationAtom>) {
          return std::string(to_string(a.kind)) + (a.comparison == Comparison::Less ? "<" : ">") +
                 format_number(a.threshold);
        } else {
          return std::string(to_string(a.module)) + (a.on ? "+" : "-");
        }
      },
      atom);
}

std::string to_text(const Rule& rule) {
  std::string line = "P" + std::to_string(rule.priority) + ": if ";
  for (std::size_t i = 0; i < rule.condition.conjuncts.size(); ++i) {
    if (i) line += " and ";
    line += to_text(rule.condition.conjuncts[i]);
  }
  line += " then ";
  line += to_string(rule.module);
  line += rule.switch_on ? "+" : "-";
  return line;
}

std::string to_text(const Policy& policy) {
  std::string text;
  for (const Rule& rule : policy.rules()) text += to_text(rule) + '\n';
  return text;
}

Rule parse_rule(std::string_view line) {
  line = trim(line);
  const std::string context = "in rule '" + std::string(line) + "'";
  if (line.size() < 3 || line.front() != 'P') throw ParseError("rule must start with P<k>: " + context);
  const std::size_t colon = line.find(':');
  if (colon == std::string_view::npos) throw ParseError("missing ':' " + context);
  Rule rule;
  {
    const std::string_view digits = line.substr(1, colon - 1);
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), rule.priority);
    if (ec != std::errc() || ptr != digits.data() + digits.size() || rule.priority < 1) {
      throw ParseError("bad priority " + context);
    }
  }
  std::string_view body = trim(line.substr(colon + 1));
  if (body.substr(0, 3) != "if ") throw ParseError("expected 'if' " + context);
  body.remove_prefix(3);
  const std::size_t then_at = body.rfind(" then ");
  if (then_at == std::string_view::npos) throw ParseError("expected 'then' " + context);

  for (std::string_view atom_text : split(body.substr(0, then_at), " and ")) {
    if (trim(atom_text).empty()) throw ParseError("empty condition atom " + context);
    rule.condition.conjuncts.push_back(parse_atom(atom_text));
  }
  const std::string_view effect = trim(body.substr(then_at + 6));
  const Atom parsed = parse_atom(effect);
  const auto* module_atom = std::get_if<ModuleAtom>(&parsed);
  if (!module_atom) throw ParseError("effect must be <Module>+ or <Module>- " + context);
  rule.module = module_atom->module;
  rule.switch_on = module_atom->on;
  return rule;
}

Policy parse_policy(std::string_view text) {
  std::vector<Rule> rules;
  for (std::string_view line : split(text, "\n")) {
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    rules.push_back(parse_rule(line));
  }
  return Policy(std::move(rules));
}

Policy load_policy_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open policy file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_policy(buffer.str());
}

}  // namespace rulepac
