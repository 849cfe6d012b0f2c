#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>
#include <vector>

#include "dcd/maze.hpp"

using namespace dcd;

namespace {

MazeLevel corridor_level(int length) {
  // 1 x length corridor, agent on the left end facing the goal on the right.
  MazeLevel level;
  level.width = length;
  level.height = 1;
  level.agent_cell = 0;
  level.agent_dir = Dir::East;
  level.goal_cell = length - 1;
  level.block_budget = 0;
  level.validate();
  return level;
}

MazeLevel enclosed_goal_level() {
  // Goal boxed in by walls in the 4x4 interior corner.
  MazeLevel level;
  level.width = 4;
  level.height = 4;
  level.agent_cell = 0;
  level.agent_dir = Dir::East;
  level.goal_cell = level.cell_of(3, 3);
  level.walls = {level.cell_of(2, 3), level.cell_of(3, 2), level.cell_of(2, 2)};
  level.block_budget = 3;
  level.validate();
  return level;
}

// Independent minimal-move oracle: iterative deepening over raw action
// sequences, no state graph.
int min_moves_by_iddfs(const MazeLevel& level, int depth_cap) {
  const EnvConfig cfg{depth_cap + 1, 1.0};
  std::function<bool(PosDir, int, int)> ok = [&](PosDir pos, int t, int remaining) {
    if (remaining == 0) return false;
    for (int a = 0; a < kNumActions; ++a) {
      const StepResult r = env_step(level, pos, static_cast<Action>(a), t, cfg);
      if (r.next.cell == level.goal_cell) return true;
      if (ok(r.next, t + 1, remaining - 1)) return true;
    }
    return false;
  };
  for (int d = 1; d <= depth_cap; ++d)
    if (ok(level_start(level), 0, d)) return d;
  return -1;
}

}  // namespace

TEST_CASE("design protocol places blocks, agent, then goal", "[maze]") {
  RngStream rng(1);
  DesignState s = DesignState::initial(4, 4, 2);
  REQUIRE(s.phase == DesignPhase::PlacingBlocks);
  s = design_step(s, 5, rng);
  REQUIRE(s.walls == std::set<int>{5});

  SECTION("block on an occupied cell is a no-op that still advances") {
    DesignState again = design_step(s, 5, rng);
    REQUIRE(again.walls == std::set<int>{5});
    REQUIRE(again.t == 2);
    REQUIRE(again.phase == DesignPhase::PlacingAgent);
  }
  SECTION("full run yields a valid level") {
    s = design_step(s, 6, rng);
    s = design_step(s, 0, rng);   // agent
    s = design_step(s, 10, rng);  // goal
    REQUIRE(s.phase == DesignPhase::Done);
    const MazeLevel level = s.to_level();
    REQUIRE(level.agent_cell == 0);
    REQUIRE(level.goal_cell == 10);
    REQUIRE(level.walls.size() == 2);
  }
}

TEST_CASE("zero block budget starts at agent placement", "[maze]") {
  const DesignState s = DesignState::initial(4, 4, 0);
  REQUIRE(s.phase == DesignPhase::PlacingAgent);
}

TEST_CASE("collision placements re-draw a random empty cell reproducibly", "[maze]") {
  auto run = [](std::uint64_t seed) {
    RngStream rng(seed);
    DesignState s = DesignState::initial(4, 4, 1);
    s = design_step(s, 7, rng);  // wall at 7
    s = design_step(s, 7, rng);  // agent collides, re-drawn
    s = design_step(s, s.agent_cell, rng);  // goal collides with agent, re-drawn
    return s;
  };
  const DesignState a = run(42), b = run(42), c = run(43);
  REQUIRE(a.agent_cell == b.agent_cell);
  REQUIRE(a.agent_dir == b.agent_dir);
  REQUIRE(a.goal_cell == b.goal_cell);
  REQUIRE(a.agent_cell != 7);
  REQUIRE(a.goal_cell != a.agent_cell);
  REQUIRE(a.goal_cell != 7);
  const bool differs =
      c.agent_cell != a.agent_cell || c.goal_cell != a.goal_cell || c.agent_dir != a.agent_dir;
  REQUIRE(differs);  // different seed, different draw
}

TEST_CASE("design_step rejects bad actions", "[maze]") {
  RngStream rng(0);
  DesignState s = DesignState::initial(3, 3, 1);
  REQUIRE_THROWS_AS(design_step(s, 9, rng), std::invalid_argument);
  REQUIRE_THROWS_AS(design_step(s, -1, rng), std::invalid_argument);
  s = design_step(s, 4, rng);
  s = design_step(s, 0, rng);
  s = design_step(s, 8, rng);
  REQUIRE_THROWS_AS(design_step(s, 0, rng), std::invalid_argument);  // already done
}

TEST_CASE("any action sequence over budget+2 steps yields a valid level", "[maze][property]") {
  RngStream rng(314);
  for (int trial = 0; trial < 300; ++trial) {
    const int budget = rng.uniform_int(6);
    DesignState s = DesignState::initial(4, 4, budget);
    for (int step = 0; step < budget + 2; ++step)
      s = design_step(s, rng.uniform_int(16), rng);
    REQUIRE(s.phase == DesignPhase::Done);
    REQUIRE_NOTHROW(s.to_level().validate());
  }
}

TEST_CASE("reaching the goal pays one minus the time fraction", "[maze]") {
  const MazeLevel level = corridor_level(6);
  const EnvConfig cfg{100, 1.0};
  PosDir pos = level_start(level);
  double reward = 0.0;
  bool done = false;
  int t = 0;
  while (!done) {
    const StepResult r = env_step(level, pos, Action::Forward, t++, cfg);
    pos = r.next;
    reward = r.reward;
    done = r.done;
  }
  REQUIRE(t == 5);
  REQUIRE(reward == 0.95);
}

TEST_CASE("timeout without the goal returns zero", "[maze]") {
  const MazeLevel level = corridor_level(4);
  const EnvConfig cfg{3, 1.0};  // too short to cross
  PosDir pos = level_start(level);
  double total = 0.0;
  for (int t = 0; t < cfg.t_max; ++t) {
    const StepResult r = env_step(level, pos, Action::Left, t, cfg);
    pos = r.next;
    total += r.reward;
    if (r.done) {
      REQUIRE(t == cfg.t_max - 1);
      break;
    }
  }
  REQUIRE(total == 0.0);
}

TEST_CASE("forward into a border or wall leaves the position unchanged", "[maze]") {
  MazeLevel level = corridor_level(4);
  const EnvConfig cfg{100, 1.0};
  // Border: face north on a 1-cell-high corridor.
  const StepResult north =
      env_step(level, {0, Dir::North}, Action::Forward, 0, cfg);
  REQUIRE(north.next.cell == 0);
  REQUIRE(north.reward == 0.0);
  REQUIRE_FALSE(north.done);
  // Wall directly ahead.
  MazeLevel walled = level;
  walled.walls = {1};
  walled.block_budget = 1;
  walled.validate();
  const StepResult blocked = env_step(walled, {0, Dir::East}, Action::Forward, 0, cfg);
  REQUIRE(blocked.next.cell == 0);
}

TEST_CASE("turning changes direction only", "[maze]") {
  const MazeLevel level = corridor_level(4);
  const EnvConfig cfg{100, 1.0};
  const StepResult left = env_step(level, {1, Dir::North}, Action::Left, 0, cfg);
  REQUIRE(left.next.dir == Dir::West);
  REQUIRE(left.next.cell == 1);
  const StepResult right = env_step(level, {1, Dir::North}, Action::Right, 0, cfg);
  REQUIRE(right.next.dir == Dir::East);
}

TEST_CASE("dynamics are deterministic", "[maze][property]") {
  RngStream rng(9);
  const MazeLevel level = enclosed_goal_level();
  const EnvConfig cfg{50, 1.0};
  for (int trial = 0; trial < 200; ++trial) {
    const PosDir pos{rng.uniform_int(16), static_cast<Dir>(rng.uniform_int(4))};
    if (level.is_wall(pos.cell)) continue;
    const auto a = static_cast<Action>(rng.uniform_int(3));
    const StepResult r1 = env_step(level, pos, a, 0, cfg);
    const StepResult r2 = env_step(level, pos, a, 0, cfg);
    REQUIRE(r1.next == r2.next);
    REQUIRE(r1.reward == r2.reward);
    REQUIRE(r1.done == r2.done);
  }
}

TEST_CASE("shortest path length fixtures", "[maze]") {
  REQUIRE(shortest_path_length(corridor_level(4)) == 3);
  REQUIRE(shortest_path_length(enclosed_goal_level()) == 0);
  REQUIRE(shortest_path_length(corridor_level(2)) == 1);  // adjacent goal
}

TEST_CASE("optimal value fixtures", "[maze]") {
  const EnvConfig cfg{100, 1.0};
  SECTION("unsolvable level is worth zero") {
    REQUIRE(optimal_value(enclosed_goal_level(), cfg) == 0.0);
  }
  SECTION("goal one step ahead") {
    REQUIRE(optimal_value(corridor_level(2), cfg) == 0.99);
  }
  SECTION("turns count as moves") {
    MazeLevel level = corridor_level(3);
    level.agent_dir = Dir::West;  // must turn around first: 2 turns + 2 forward
    REQUIRE(optimal_move_count(level) == 4);
    REQUIRE(optimal_value(level, cfg) == 1.0 - 4.0 / 100.0);
  }
  SECTION("too far for the step budget is worth zero") {
    REQUIRE(optimal_value(corridor_level(6), EnvConfig{4, 1.0}) == 0.0);
  }
}

TEST_CASE("optimal move count matches action-sequence search", "[maze][oracle]") {
  RngStream rng(140);
  for (int trial = 0; trial < 40; ++trial) {
    MazeLevel level;
    level.width = 3;
    level.height = 3;
    level.block_budget = 2;
    for (int k = 0; k < 2; ++k) level.walls.insert(rng.uniform_int(9));
    std::vector<int> open;
    for (int c = 0; c < 9; ++c)
      if (!level.walls.count(c)) open.push_back(c);
    if (open.size() < 2) continue;
    level.agent_cell = open[rng.uniform_int(static_cast<int>(open.size()))];
    do {
      level.goal_cell = open[rng.uniform_int(static_cast<int>(open.size()))];
    } while (level.goal_cell == level.agent_cell);
    level.agent_dir = static_cast<Dir>(rng.uniform_int(4));
    level.validate();
    REQUIRE(optimal_move_count(level) == min_moves_by_iddfs(level, 14));
  }
}

TEST_CASE("no rollout beats the optimal value", "[maze][oracle]") {
  // Exhaustive deterministic policies over the reachable states of a 3x1
  // corridor, plus random policies on a 3x3 room.
  const EnvConfig cfg{30, 1.0};
  auto rollout = [&](const MazeLevel& level, const std::function<int(int)>& policy_fn) {
    PosDir pos = level_start(level);
    double total = 0.0;
    for (int t = 0; t < cfg.t_max; ++t) {
      const StepResult r =
          env_step(level, pos, static_cast<Action>(policy_fn(state_index(pos))), t, cfg);
      pos = r.next;
      total += r.reward;
      if (r.done) break;
    }
    return total;
  };

  SECTION("exhaustive over a tiny corridor") {
    const MazeLevel level = corridor_level(3);
    const double best = optimal_value(level, cfg);
    // Reachable states: 2 open non-goal cells x 4 directions.
    std::vector<int> states;
    for (int c = 0; c < 2; ++c)
      for (int d = 0; d < 4; ++d) states.push_back(c * 4 + d);
    const int n = static_cast<int>(states.size());
    long long num_policies = 1;
    for (int k = 0; k < n; ++k) num_policies *= 3;
    double achieved_best = 0.0;
    for (long long code = 0; code < num_policies; ++code) {
      long long rest = code;
      std::vector<int> table(12, 0);
      for (int k = 0; k < n; ++k) {
        table[states[k]] = rest % 3;
        rest /= 3;
      }
      const double value = rollout(level, [&](int s) { return table[s]; });
      REQUIRE(value <= best + 1e-12);
      achieved_best = std::max(achieved_best, value);
    }
    REQUIRE(achieved_best == best);  // some deterministic policy attains it
  }
  SECTION("random policies on an open room") {
    MazeLevel level;
    level.width = 3;
    level.height = 3;
    level.agent_cell = 0;
    level.agent_dir = Dir::South;
    level.goal_cell = 8;
    level.block_budget = 0;
    level.validate();
    const double best = optimal_value(level, cfg);
    RngStream rng(5);
    for (int trial = 0; trial < 2000; ++trial) {
      std::vector<int> table(36);
      for (int& a : table) a = rng.uniform_int(3);
      REQUIRE(rollout(level, [&](int s) { return table[s]; }) <= best + 1e-12);
    }
  }
}

TEST_CASE("unreachable goal means zero optimal value and vice versa", "[maze][property]") {
  RngStream rng(8080);
  const EnvConfig cfg{100, 1.0};
  for (int trial = 0; trial < 300; ++trial) {
    DesignState s = DesignState::initial(4, 4, rng.uniform_int(9));
    while (s.phase != DesignPhase::Done) s = design_step(s, rng.uniform_int(16), rng);
    const MazeLevel level = s.to_level();
    const bool unreachable = shortest_path_length(level) == 0;
    REQUIRE(unreachable == (optimal_value(level, cfg) == 0.0));
  }
}

TEST_CASE("level text round trip", "[maze][property]") {
  RngStream rng(606);
  for (int trial = 0; trial < 200; ++trial) {
    DesignState s = DesignState::initial(5, 4, rng.uniform_int(8));
    while (s.phase != DesignPhase::Done) s = design_step(s, rng.uniform_int(20), rng);
    const MazeLevel level = s.to_level();
    const MazeLevel back = decode_level(encode_level(level));
    REQUIRE(back.walls == level.walls);
    REQUIRE(back.agent_cell == level.agent_cell);
    REQUIRE(back.agent_dir == level.agent_dir);
    REQUIRE(back.goal_cell == level.goal_cell);
    REQUIRE(back.block_budget == level.block_budget);
  }
}

TEST_CASE("documented sample grid decodes to three walls", "[maze]") {
  const std::string text =
      "4 3 5\n"
      "A..#\n"
      ".#..\n"
      "#..G\n"
      "dir: E\n";
  const MazeLevel level = decode_level(text);
  REQUIRE(level.walls.size() == 3);
  REQUIRE(level.agent_cell == 0);
  REQUIRE(level.goal_cell == 11);
  REQUIRE(level.agent_dir == Dir::East);
  REQUIRE(shortest_path_length(level) == 5);
}

TEST_CASE("decode rejects malformed grids", "[maze]") {
  SECTION("duplicate goal markers") {
    const std::string text =
        "3 2 0\n"
        "A.G\n"
        "..G\n"
        "dir: N\n";
    try {
      decode_level(text);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      REQUIRE(e.line == 3);
      REQUIRE(e.column == 3);
    }
  }
  SECTION("wrong row width") {
    REQUIRE_THROWS_AS(decode_level("3 2 0\nA.\n..G\ndir: N\n"), ParseError);
  }
  SECTION("unknown character") {
    REQUIRE_THROWS_AS(decode_level("3 2 0\nA?G\n...\ndir: N\n"), ParseError);
  }
  SECTION("missing agent") {
    REQUIRE_THROWS_AS(decode_level("3 2 0\n..G\n...\ndir: N\n"), ParseError);
  }
  SECTION("bad direction line") {
    REQUIRE_THROWS_AS(decode_level("3 2 0\nA.G\n...\ndir: Q\n"), ParseError);
  }
  SECTION("wall budget exceeded") {
    REQUIRE_THROWS_AS(decode_level("3 2 1\nA#G\n##.\ndir: N\n"), ParseError);
  }
}

TEST_CASE("level invariant violations are rejected", "[maze]") {
  MazeLevel level = corridor_level(4);
  SECTION("agent on goal") {
    level.goal_cell = level.agent_cell;
    REQUIRE_THROWS_AS(level.validate(), std::invalid_argument);
  }
  SECTION("goal on a wall") {
    level.walls = {3};
    level.block_budget = 1;
    REQUIRE_THROWS_AS(level.validate(), std::invalid_argument);
  }
  SECTION("too many walls for the budget") {
    level.walls = {1, 2};
    level.block_budget = 1;
    REQUIRE_THROWS_AS(level.validate(), std::invalid_argument);
  }
}
