#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rulepac/observations.hpp"
#include "rulepac/world.hpp"

namespace rulepac {

// Enumeration order doubles as the tie-break order between equally
// prioritized active modules.
enum class ModuleKind : std::uint8_t { ToDot, ToPowerDot, FromPowerDot, ToEdGhost, FromGhost, ToNearestPill };

inline constexpr std::array<ModuleKind, 6> kModuleKinds = {ModuleKind::ToDot,     ModuleKind::ToPowerDot,
                                                           ModuleKind::FromPowerDot, ModuleKind::ToEdGhost,
                                                           ModuleKind::FromGhost, ModuleKind::ToNearestPill};

std::string_view to_string(ModuleKind kind);
std::optional<ModuleKind> parse_module_kind(std::string_view text);

enum class Comparison : std::uint8_t { Less, Greater };

/// `[observation] < [value]` or `[observation] > [value]`; comparisons are strict.
struct ObservationAtom {
  ObservationKind kind;
  Comparison comparison;
  double threshold;
  bool operator==(const ObservationAtom&) const = default;
};

/// `[module]+` (module switched on) or `[module]-` (module not on).
struct ModuleAtom {
  ModuleKind module;
  bool on;
  bool operator==(const ModuleAtom&) const = default;
};

using Atom = std::variant<ObservationAtom, ModuleAtom>;

struct Condition {
  std::vector<Atom> conjuncts;
  bool operator==(const Condition&) const = default;
};

struct Rule {
  Condition condition;
  ModuleKind module;
  bool switch_on = true;
  int priority = 1;  // 1 is the highest priority
  bool operator==(const Rule&) const = default;
};

/// Rules kept in ascending priority number; equal priorities keep insertion order.
class Policy {
 public:
  Policy() = default;
  explicit Policy(std::vector<Rule> rules);

  const std::vector<Rule>& rules() const { return rules_; }
  std::size_t size() const { return rules_.size(); }
  bool empty() const { return rules_.empty(); }
  bool operator==(const Policy&) const = default;

 private:
  std::vector<Rule> rules_;
};

enum class ModuleState : std::uint8_t { Untouched, On, Off };

/// Per-module switch state. A module switched on carries the priority of the
/// rule that switched it on; modules that are not on carry none.
class ModuleSet {
 public:
  /// Every module explicitly switched off; the state an agent starts from.
  static ModuleSet all_off();

  ModuleState state(ModuleKind kind) const { return entries_[index(kind)].state; }
  bool is_on(ModuleKind kind) const { return state(kind) == ModuleState::On; }
  std::optional<int> priority(ModuleKind kind) const;

  void switch_on(ModuleKind kind, int priority) { entries_[index(kind)] = {ModuleState::On, priority}; }
  void switch_off(ModuleKind kind) { entries_[index(kind)] = {ModuleState::Off, 0}; }

  /// Highest-priority active module; ties go to the earlier ModuleKind.
  std::optional<ModuleKind> acting() const;

  bool operator==(const ModuleSet&) const = default;

 private:
  struct Entry {
    ModuleState state = ModuleState::Untouched;
    int priority = 0;
    bool operator==(const Entry&) const = default;
  };
  static constexpr std::size_t index(ModuleKind kind) { return static_cast<std::size_t>(kind); }
  std::array<Entry, 6> entries_{};
};

/// Six-digit behavioural-state code. Digits left to right: FromGhost+,
/// FromGhost-, ToPowerDot, ToEdGhost, FromPowerDot, ToNearestPill.
struct MacroCode {
  std::uint8_t bits = 0;  // digit i (from the left) is bit 5-i

  std::string to_string() const;
  static MacroCode parse(std::string_view digits);
  auto operator<=>(const MacroCode&) const = default;
};

MacroCode macro_code(const ModuleSet& modules);

/// The six behavioural states of the pre-wired policy.
inline constexpr std::array<std::string_view, 6> kMacroCodes = {"010011", "010101", "011001",
                                                                 "100011", "100101", "101001"};

bool eval_condition(const Condition& condition, const Observations& obs, const ModuleSet& modules);

struct Decision {
  ModuleSet modules;
  ModuleKind acting = ModuleKind::ToDot;
  std::optional<std::size_t> fired;  // index into policy.rules()
  bool changed = false;              // the fired rule altered the module set
  bool no_active_module = false;     // acting fell back to ToDot
};

/// One pass of the rule list: the first satisfied rule is executed and the
/// scan halts. Switch-off is executed regardless of the module's priority.
Decision decide(const Policy& policy, const Observations& obs, const ModuleSet& modules);

struct Settled {
  ModuleSet modules;
  ModuleKind acting = ModuleKind::ToDot;
  int decisions = 0;  // decide() calls made
  int changes = 0;    // decisions whose rule changed the module set
  bool capped = false;
  bool no_active_module = false;
};

/// Agent-level decision for one time step: repeats decide() on the same
/// observations until no rule fires, a fired rule leaves the module set
/// unchanged, or size()+1 decisions have been made.
Settled settle(const Policy& policy, const Observations& obs, const ModuleSet& modules);

/// Module set an agent running `policy` starts an episode with: everything
/// switched off, then every rule whose condition holds unconditionally
/// (only Constant atoms) applied in priority order.
ModuleSet boot_modules(const Policy& policy);

/// Direction the module steers the agent in `state`. Falls back to ToDot when
/// the module's target class is empty.
Direction module_direction(ModuleKind kind, const GameState& state);

/// Shipped default policy; its behavioural states are the six codes above.
Policy prewired_policy();

std::string to_text(const Atom& atom);
std::string to_text(const Rule& rule);
/// `P<k>: if <atom> and <atom>... then <Module><+|->`, one rule per line.
std::string to_text(const Policy& policy);
Rule parse_rule(std::string_view line);
/// Blank lines and lines starting with '#' are ignored. Throws ParseError.
Policy parse_policy(std::string_view text);
Policy load_policy_file(const std::string& path);

}  // namespace rulepac
