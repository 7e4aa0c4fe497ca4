#include <doctest.h>

#include <set>

#include "rulepac/rollout.hpp"
#include "rulepac/rules.hpp"
#include "support.hpp"

using namespace rulepac;
using testing::cell;
using testing::fresh;
using testing::maze_from;

namespace {

Observations obs_with(std::initializer_list<std::pair<ObservationKind, double>> values) {
  Observations obs;
  for (auto [k, v] : values) obs.set(k, v);
  return obs;
}

Observations full_obs(double dot, double power, double ghost, double edible, double density) {
  return obs_with({{ObservationKind::NearestDot, dot},
                   {ObservationKind::NearestPowerDot, power},
                   {ObservationKind::NearestGhost, ghost},
                   {ObservationKind::NearestEdGhost, edible},
                   {ObservationKind::GhostDensity, density},
                   {ObservationKind::Constant, 1.0}});
}

Condition cond(std::string_view text) { return parse_rule(std::string("P1: if ") + std::string(text) + " then ToDot+").condition; }

// Digit-by-digit reading of the code definition.
std::string expected_code(const ModuleSet& m) {
  std::string s;
  s += m.state(ModuleKind::FromGhost) == ModuleState::On ? '1' : '0';
  s += m.state(ModuleKind::FromGhost) == ModuleState::Off ? '1' : '0';
  s += m.is_on(ModuleKind::ToPowerDot) ? '1' : '0';
  s += m.is_on(ModuleKind::ToEdGhost) ? '1' : '0';
  s += m.is_on(ModuleKind::FromPowerDot) ? '1' : '0';
  s += m.is_on(ModuleKind::ToNearestPill) ? '1' : '0';
  return s;
}

ModuleSet random_modules(Rng& rng) {
  ModuleSet m;
  for (ModuleKind k : kModuleKinds) {
    const auto u = uniform_index(rng, 3);
    if (u == 1) m.switch_on(k, 1 + static_cast<int>(uniform_index(rng, 5)));
    if (u == 2) m.switch_off(k);
  }
  return m;
}

}  // namespace

TEST_SUITE("conditions") {
  TEST_CASE("single comparison") {
    const ModuleSet none;
    CHECK(eval_condition(cond("NearestDot<5"), obs_with({{ObservationKind::NearestDot, 4}}), none));
    CHECK_FALSE(eval_condition(cond("NearestDot<5"), obs_with({{ObservationKind::NearestDot, 5}}), none));
    CHECK_FALSE(eval_condition(cond("NearestDot>5"), obs_with({{ObservationKind::NearestDot, 5}}), none));
  }

  TEST_CASE("module atom in a conjunction") {
    ModuleSet m = ModuleSet::all_off();
    const Observations obs = obs_with({{ObservationKind::NearestDot, 4}});
    CHECK_FALSE(eval_condition(cond("NearestDot<5 and FromGhost+"), obs, m));
    CHECK(eval_condition(cond("NearestDot<5 and FromGhost-"), obs, m));
    m.switch_on(ModuleKind::FromGhost, 2);
    CHECK(eval_condition(cond("NearestDot<5 and FromGhost+"), obs, m));
  }

  TEST_CASE("density and power-dot distance") {
    const Observations obs =
        obs_with({{ObservationKind::GhostDensity, 1.3}, {ObservationKind::NearestPowerDot, 3}});
    CHECK(eval_condition(cond("GhostDensity<1.5 and NearestPowerDot<5"), obs, ModuleSet{}));
  }

  TEST_CASE("missing observation") {
    CHECK_THROWS_AS(eval_condition(cond("NearestGhost>8"), obs_with({{ObservationKind::NearestDot, 1}}), {}),
                    MissingObservation);
  }
}

TEST_SUITE("decide") {
  TEST_CASE("empty rule list leaves the modules alone") {
    ModuleSet m;
    m.switch_on(ModuleKind::ToDot, 3);
    const Decision d = decide(Policy{}, full_obs(1, 1, 1, 100, 0), m);
    CHECK(d.modules == m);
    CHECK(d.acting == ModuleKind::ToDot);
    CHECK_FALSE(d.fired.has_value());
  }

  TEST_CASE("constant rule switches on ToNearestPill with its priority") {
    const Policy p = parse_policy("P1: if Constant>0 then ToNearestPill+\n");
    const Decision d = decide(p, full_obs(1, 1, 1, 100, 0), ModuleSet{});
    CHECK(d.modules.is_on(ModuleKind::ToNearestPill));
    CHECK(d.modules.priority(ModuleKind::ToNearestPill) == 1);
    CHECK(d.acting == ModuleKind::ToNearestPill);
    CHECK_FALSE(d.no_active_module);
  }

  TEST_CASE("zig-zag pair: the first satisfied rule wins") {
    const Policy p = parse_policy(
        "P2: if GhostDensity<1.5 and NearestPowerDot<5 then FromPowerDot+\n"
        "P2: if NearestEdGhost>99 then ToPowerDot+\n");
    const Decision d = decide(p, full_obs(2, 3, 6, 100, 1.3), ModuleSet::all_off());
    CHECK(d.fired == 0u);
    CHECK(d.modules.is_on(ModuleKind::FromPowerDot));
    CHECK_FALSE(d.modules.is_on(ModuleKind::ToPowerDot));
    CHECK(d.acting == ModuleKind::FromPowerDot);
  }

  TEST_CASE("switch-off beats a higher module priority") {
    ModuleSet m;
    m.switch_on(ModuleKind::FromGhost, 1);
    const Policy p = parse_policy("P7: if Constant>0 then FromGhost-\n");
    const Decision d = decide(p, full_obs(1, 1, 1, 100, 0), m);
    CHECK_FALSE(d.modules.is_on(ModuleKind::FromGhost));
    CHECK_FALSE(d.modules.priority(ModuleKind::FromGhost).has_value());
    CHECK(d.no_active_module);
    CHECK(d.acting == ModuleKind::ToDot);
  }

  TEST_CASE("acting module: lowest priority number, then module order") {
    ModuleSet m;
    m.switch_on(ModuleKind::FromGhost, 2);
    m.switch_on(ModuleKind::ToEdGhost, 2);
    m.switch_on(ModuleKind::ToNearestPill, 3);
    CHECK(m.acting() == ModuleKind::ToEdGhost);
    m.switch_on(ModuleKind::ToNearestPill, 1);
    CHECK(m.acting() == ModuleKind::ToNearestPill);
  }

  TEST_CASE("policies sort by priority and keep list order within a priority") {
    const Policy p = parse_policy(
        "P3: if Constant>0 then ToDot+\n"
        "P1: if NearestDot<2 then ToPowerDot+\n"
        "P3: if Constant>0 then ToEdGhost+\n"
        "P1: if NearestDot<3 then FromGhost+\n");
    REQUIRE(p.size() == 4);
    CHECK(p.rules()[0].module == ModuleKind::ToPowerDot);
    CHECK(p.rules()[1].module == ModuleKind::FromGhost);
    CHECK(p.rules()[2].module == ModuleKind::ToDot);
    CHECK(p.rules()[3].module == ModuleKind::ToEdGhost);
  }
}

TEST_SUITE("settle") {
  TEST_CASE("an oscillating pair is capped") {
    const Policy p = parse_policy("P1: if FromGhost- then FromGhost+\nP1: if FromGhost+ then FromGhost-\n");
    const Settled s = settle(p, full_obs(1, 1, 1, 100, 0), ModuleSet::all_off());
    CHECK(s.capped);
    CHECK(s.decisions == 3);
  }

  TEST_CASE("settles when a fired rule changes nothing") {
    const Policy p = parse_policy("P1: if Constant>0 then ToNearestPill+\n");
    const Settled s = settle(p, full_obs(1, 1, 1, 100, 0), ModuleSet::all_off());
    CHECK_FALSE(s.capped);
    CHECK(s.decisions == 2);
    CHECK(s.changes == 1);
  }

  TEST_CASE("boot modules of the pre-wired policy") {
    const ModuleSet m = boot_modules(prewired_policy());
    CHECK(m.is_on(ModuleKind::ToNearestPill));
    CHECK(m.state(ModuleKind::FromGhost) == ModuleState::Off);
    CHECK(macro_code(m).to_string() == "010001");
  }
}

TEST_SUITE("macro codes") {
  TEST_CASE("examples") {
    CHECK(macro_code(ModuleSet{}).to_string() == "000000");
    ModuleSet a = ModuleSet::all_off();
    a.switch_on(ModuleKind::ToEdGhost, 1);
    a.switch_on(ModuleKind::ToNearestPill, 3);
    CHECK(macro_code(a).to_string() == "010101");
    ModuleSet b;
    b.switch_on(ModuleKind::FromGhost, 1);
    b.switch_on(ModuleKind::ToPowerDot, 2);
    b.switch_on(ModuleKind::ToNearestPill, 3);
    CHECK(macro_code(b).to_string() == "101001");
  }

  TEST_CASE("parse and print") {
    for (std::string_view code : kMacroCodes) CHECK(MacroCode::parse(code).to_string() == code);
    CHECK_THROWS_AS(MacroCode::parse("0101"), ParseError);
    CHECK_THROWS_AS(MacroCode::parse("0101x1"), ParseError);
  }

  TEST_CASE("the code is a pure function of the module set") {
    Rng rng(3);
    for (int i = 0; i < 100000; ++i) {
      const ModuleSet m = random_modules(rng);
      const ModuleSet copy = m;
      REQUIRE(macro_code(m).to_string() == expected_code(m));
      REQUIRE(macro_code(m) == macro_code(copy));
    }
  }
}

TEST_SUITE("module steering") {
  TEST_CASE("single dot to the east") {
    GameState s = fresh(maze_from("#########\n#P    .G#\n#####GGH#\n#####G###\n#########\n"));
    CHECK(module_direction(ModuleKind::ToDot, s) == Direction::East);
    CHECK(module_direction(ModuleKind::ToNearestPill, s) == Direction::East);
  }

  TEST_CASE("flee a ghost due east") {
    GameState s = fresh(maze_from("#########\n#.  P  .#\n####G####\n###GGGH##\n#########\n"));
    for (GhostState& g : s.ghosts) g.mode = GhostMode::Returning;
    s.ghosts[0] = {cell(s, 1, 6), Direction::Stop, GhostMode::Normal, 0};
    s.agent_cell = cell(s, 1, 3);
    CHECK(module_direction(ModuleKind::FromGhost, s) == Direction::West);
  }

  TEST_CASE("absent target falls back to dots") {
    GameState s = fresh(maze_from("#########\n#P    .G#\n#####GGH#\n#####G###\n#########\n"));
    CHECK(module_direction(ModuleKind::ToEdGhost, s) == Direction::East);
    CHECK(module_direction(ModuleKind::ToPowerDot, s) == Direction::East);
  }

  TEST_CASE("T-junction: FromGhost maximizes the distance to the nearest ghost") {
    // Agent at the junction (2,4); arms go west, east and south.
    auto maze = maze_from(
        "#########\n"
        "#########\n"
        "#.  P  .#\n"
        "####.####\n"
        "####.####\n"
        "####GGGH#\n"
        "####G####\n"
        "#########\n");
    GameState s = fresh(maze);
    for (GhostState& g : s.ghosts) g.mode = GhostMode::Returning;
    const std::vector<Position> ghost_spots = {{2, 1}, {2, 7}, {4, 4}, {2, 2}, {2, 6}, {5, 5}};
    for (Position spot : ghost_spots) {
      s.ghosts[0] = {maze->cell(spot), Direction::Stop, GhostMode::Normal, 0};
      Direction best = Direction::Stop;
      int best_distance = -1;
      for (Direction d : kMoves) {
        const int next = maze->neighbor(s.agent_cell, d);
        if (next < 0) continue;
        const int dist = *maze->shortest_path_distance(maze->position(next), spot);
        if (dist > best_distance) {
          best = d;
          best_distance = dist;
        }
      }
      CHECK(module_direction(ModuleKind::FromGhost, s) == best);
    }
  }
}

TEST_SUITE("policy text") {
  TEST_CASE("round trip") {
    const Policy p = prewired_policy();
    CHECK(parse_policy(to_text(p)) == p);
    CHECK(to_text(parse_policy(to_text(p))) == to_text(p));
    const Rule r = parse_rule("P4: if (NearestDot<5) and (NearestGhost>8) and (FromGhost+) then ToDot-");
    CHECK(r.priority == 4);
    CHECK(r.condition.conjuncts.size() == 3);
    CHECK_FALSE(r.switch_on);
    CHECK(to_text(r) == "P4: if NearestDot<5 and NearestGhost>8 and FromGhost+ then ToDot-");
  }

  TEST_CASE("shipped policy file matches the built-in policy") {
    CHECK(load_policy_file(testing::source_path("policies/prewired.txt")) == prewired_policy());
  }

  TEST_CASE("errors") {
    CHECK_THROWS_AS(parse_rule("if Constant>0 then ToDot+"), ParseError);
    CHECK_THROWS_AS(parse_rule("P0: if Constant>0 then ToDot+"), ParseError);
    CHECK_THROWS_AS(parse_rule("P1: if Constant>0"), ParseError);
    CHECK_THROWS_AS(parse_rule("P1: if Foo>0 then ToDot+"), ParseError);
    CHECK_THROWS_AS(parse_rule("P1: if Constant>x then ToDot+"), ParseError);
    CHECK_THROWS_AS(parse_rule("P1: if Constant>0 then Fly+"), ParseError);
    CHECK_THROWS_AS(parse_rule("P1: if Constant>0 then NearestDot<3"), ParseError);
    CHECK(parse_policy("# comment\n\nP2: if Constant>0 then ToDot+\n").size() == 1);
  }
}

TEST_SUITE("pre-wired policy") {
  TEST_CASE("zig-zag pair is present with thresholds 1.5 and 5") {
    const Policy p = prewired_policy();
    const Rule from = parse_rule("P2: if GhostDensity<1.5 and NearestPowerDot<5 then FromPowerDot+");
    const Rule to = parse_rule("P2: if NearestEdGhost>99 then ToPowerDot+");
    bool has_from = false, has_to = false;
    for (const Rule& r : p.rules()) {
      has_from |= r == from;
      has_to |= r == to;
    }
    CHECK(has_from);
    CHECK(has_to);
  }

  TEST_CASE("fresh reset state has a well-defined acting module") {
    const Policy p = prewired_policy();
    const Settled s = settle(p, observe_all(fresh(testing::canonical_maze())), boot_modules(p));
    CHECK_FALSE(s.no_active_module);
    CHECK_FALSE(s.capped);
  }

  TEST_CASE("100 seeded episodes stay inside the six behavioural states") {
    const std::set<std::string> allowed(kMacroCodes.begin(), kMacroCodes.end());
    auto results = run_batch(testing::canonical_maze(), WorldConfig{},
                             [] { return std::make_unique<RuleAgent>(prewired_policy()); }, 11, 100);
    for (const EpisodeResult& r : results) {
      for (const StepRecord& step : r.trace) REQUIRE(allowed.count(step.macro.to_string()) == 1);
    }
  }

  TEST_CASE("every decision fires at most the first satisfied rule") {
    const Policy p = prewired_policy();
    auto maze = testing::canonical_maze();
    Rng world(5), agent(6);
    GameState s = reset(maze, WorldConfig{});
    ModuleSet modules = boot_modules(p);
    while (!s.terminal && s.step_index < 1500) {
      const Observations obs = observe_all(s);
      std::optional<std::size_t> first;
      for (std::size_t i = 0; i < p.size(); ++i) {
        if (eval_condition(p.rules()[i].condition, obs, modules)) {
          first = i;
          break;
        }
      }
      const Decision d = decide(p, obs, modules);
      REQUIRE(d.fired == first);
      int differing = 0;
      for (ModuleKind k : kModuleKinds) {
        differing += d.modules.state(k) != modules.state(k) || d.modules.priority(k) != modules.priority(k);
      }
      REQUIRE(differing <= 1);
      if (d.fired && p.rules()[*d.fired].switch_on) {
        CHECK(d.modules.priority(p.rules()[*d.fired].module) == p.rules()[*d.fired].priority);
      }
      CHECK(decide(p, obs, modules).modules == d.modules);
      modules = settle(p, obs, modules).modules;
      // A random agent explores states the policy itself would avoid.
      const DirectionList moves = legal_moves(s);
      step(s, moves[uniform_index(agent, moves.size())], world);
    }
  }
}
