#pragma once

// Evaluation: LZW action complexity, solved rates over held-out suites, the
// per-episode complexity record, and the four procedural test-suite builders.

#include <algorithm>
#include <cstdlib>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dcd/agent.hpp"
#include "dcd/maze.hpp"
#include "dcd/rng.hpp"

namespace dcd {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Number of LZW codes emitted for the sequence, with the dictionary seeded
// with the whole action alphabet. A compressibility proxy: decisive action
// streams compress well.
inline int lzw_complexity(std::span<const int> actions, int alphabet_size = kNumActions) {
  if (alphabet_size <= 0) throw std::invalid_argument("lzw_complexity: empty alphabet");
  if (actions.empty()) return 0;
  std::map<std::vector<int>, int> dict;
  int next_code = 0;
  for (int a = 0; a < alphabet_size; ++a) dict[{a}] = next_code++;

  int emitted = 0;
  std::vector<int> current;
  for (int symbol : actions) {
    if (symbol < 0 || symbol >= alphabet_size)
      throw std::invalid_argument("lzw_complexity: symbol outside alphabet");
    std::vector<int> extended = current;
    extended.push_back(symbol);
    if (dict.count(extended)) {
      current = std::move(extended);
    } else {
      ++emitted;
      dict[extended] = next_code++;
      current = {symbol};
    }
  }
  if (!current.empty()) ++emitted;
  return emitted;
}

// --- evaluation suites ------------------------------------------------------------

struct EvalSuite {
  std::string name;
  std::vector<MazeLevel> levels;
  int attempts_per_level = 1;
};

struct SolveOptions {
  EnvConfig env;
  bool greedy = true;  // argmax actions; stochastic attempts reproduce the sampled protocol
};

struct SolvedRateReport {
  std::vector<double> per_level;
  double aggregate = 0.0;
};

inline bool run_attempt(const PolicyTable& policy, const MazeLevel& level,
                        const SolveOptions& options, RngStream& rng) {
  PosDir pos = level_start(level);
  for (int t = 0; t < options.env.t_max; ++t) {
    const int s = state_index(pos);
    const int a = options.greedy ? greedy_action(policy, s) : act(policy, s, rng);
    const StepResult r = env_step(level, pos, static_cast<Action>(a), t, options.env);
    pos = r.next;
    if (r.done) return pos.cell == level.goal_cell;
  }
  return false;
}

// Evaluation rollout recorded as a trajectory (for complexity metrics); the
// value estimates are not needed and recorded as zero.
inline Trajectory eval_trajectory(const PolicyTable& policy, const MazeLevel& level,
                                  const SolveOptions& options, RngStream& rng) {
  Trajectory traj;
  traj.mode = RolloutMode::Eval;
  PosDir pos = level_start(level);
  traj.states.push_back(state_index(pos));
  for (int t = 0; t < options.env.t_max; ++t) {
    const int s = state_index(pos);
    const int a = options.greedy ? greedy_action(policy, s) : act(policy, s, rng);
    const StepResult r = env_step(level, pos, static_cast<Action>(a), t, options.env);
    traj.actions.push_back(a);
    traj.rewards.push_back(r.reward);
    traj.values.push_back(0.0);
    traj.states.push_back(state_index(r.next));
    pos = r.next;
    if (r.done) {
      traj.terminal_reached = pos.cell == level.goal_cell;
      break;
    }
  }
  return traj;
}

// Fraction of attempts reaching the goal, per level and averaged over the
// suite.
inline SolvedRateReport solved_rate(const PolicyTable& policy, const EvalSuite& suite,
                                    const SolveOptions& options, RngStream& rng) {
  if (suite.levels.empty()) throw std::invalid_argument("solved_rate: empty suite");
  if (suite.attempts_per_level <= 0)
    throw std::invalid_argument("solved_rate: attempts_per_level must be positive");
  SolvedRateReport report;
  for (const auto& level : suite.levels) {
    int solved = 0;
    for (int k = 0; k < suite.attempts_per_level; ++k)
      if (run_attempt(policy, level, options, rng)) ++solved;
    report.per_level.push_back(static_cast<double>(solved) / suite.attempts_per_level);
  }
  double sum = 0.0;
  for (double v : report.per_level) sum += v;
  report.aggregate = sum / report.per_level.size();
  return report;
}

// --- complexity ------------------------------------------------------------------

struct ComplexityRecord {
  int block_count = 0;
  int shortest_path = 0;
  std::optional<int> solved_path;  // present iff the episode was solved
  int action_lzw = 0;
};

inline ComplexityRecord complexity_record(const MazeLevel& level, const Trajectory& traj) {
  ComplexityRecord rec;
  rec.block_count = static_cast<int>(level.walls.size());
  rec.shortest_path = shortest_path_length(level);
  if (traj.terminal_reached) rec.solved_path = rec.shortest_path;
  rec.action_lzw = lzw_complexity(traj.actions);
  return rec;
}

inline std::vector<ComplexityRecord> complexity_report(
    std::span<const std::pair<MazeLevel, Trajectory>> episodes) {
  std::vector<ComplexityRecord> out;
  out.reserve(episodes.size());
  for (const auto& [level, traj] : episodes) out.push_back(complexity_record(level, traj));
  return out;
}

// --- suite builders ----------------------------------------------------------------

enum class SuiteKind { Rooms, Spiral, PerfectMaze, Corridor };

inline const char* suite_kind_name(SuiteKind kind) {
  switch (kind) {
    case SuiteKind::Rooms: return "rooms";
    case SuiteKind::Spiral: return "spiral";
    case SuiteKind::PerfectMaze: return "perfectmaze";
    case SuiteKind::Corridor: return "corridor";
  }
  return "?";
}

inline std::optional<SuiteKind> suite_kind_from_name(const std::string& name) {
  if (name == "rooms") return SuiteKind::Rooms;
  if (name == "spiral") return SuiteKind::Spiral;
  if (name == "perfectmaze") return SuiteKind::PerfectMaze;
  if (name == "corridor") return SuiteKind::Corridor;
  return std::nullopt;
}

namespace detail {

inline MazeLevel finish_suite_level(int size, std::set<int> walls, int agent, int goal,
                                    RngStream& rng) {
  MazeLevel level;
  level.width = size;
  level.height = size;
  level.walls = std::move(walls);
  level.agent_cell = agent;
  level.agent_dir = static_cast<Dir>(rng.uniform_int(4));
  level.goal_cell = goal;
  level.block_budget = static_cast<int>(level.walls.size());
  level.validate();
  if (shortest_path_length(level) == 0)
    throw std::logic_error("suite builder produced an unsolvable level");
  return level;
}

inline int random_open_cell(int size, const std::set<int>& walls, RngStream& rng,
                            int exclude = -1) {
  std::vector<int> open;
  for (int c = 0; c < size * size; ++c)
    if (!walls.count(c) && c != exclude) open.push_back(c);
  return open[rng.uniform_int(static_cast<int>(open.size()))];
}

// 2x2 rooms separated by one wall row and one wall column, each wall segment
// pierced by a single doorway.
inline MazeLevel build_rooms_level(int size, RngStream& rng) {
  const int mid = size / 2;
  std::set<int> walls;
  auto cell = [size](int x, int y) { return y * size + x; };
  for (int x = 0; x < size; ++x) walls.insert(cell(x, mid));
  for (int y = 0; y < size; ++y) walls.insert(cell(mid, y));
  // One doorway per segment.
  walls.erase(cell(rng.uniform_int(mid), mid));                          // left horizontal
  walls.erase(cell(mid + 1 + rng.uniform_int(size - mid - 1), mid));     // right horizontal
  walls.erase(cell(mid, rng.uniform_int(mid)));                          // top vertical
  walls.erase(cell(mid, mid + 1 + rng.uniform_int(size - mid - 1)));     // bottom vertical
  const int agent = random_open_cell(size, walls, rng);
  const int goal = random_open_cell(size, walls, rng, agent);
  return finish_suite_level(size, std::move(walls), agent, goal, rng);
}

// Single winding corridor from the outside to the center, carved in spiral
// order; the seed picks one of the eight grid symmetries and the travel
// direction.
inline MazeLevel build_spiral_level(int size, RngStream& rng) {
  std::set<int> walls;
  for (int c = 0; c < size * size; ++c) walls.insert(c);
  std::vector<std::pair<int, int>> path;
  int left = 0, right = size - 1, top = 0, bottom = size - 1;
  bool outer_ring = true;
  while (left <= right && top <= bottom) {
    // Inner rings start one cell early to connect with the previous ring's end.
    for (int x = outer_ring ? left : left - 1; x <= right; ++x) path.emplace_back(x, top);
    for (int y = top + 1; y <= bottom; ++y) path.emplace_back(right, y);
    if (top < bottom)
      for (int x = right - 1; x >= left; --x) path.emplace_back(x, bottom);
    if (left < right)
      for (int y = bottom - 1; y >= top + 2; --y) path.emplace_back(left, y);
    left += 2;
    top += 2;
    right -= 2;
    bottom -= 2;
    outer_ring = false;
  }
  // Keep the corridor simple: stop carving once a cell would touch the
  // existing corridor anywhere but at its own predecessor.
  std::set<std::pair<int, int>> seen;
  std::vector<std::pair<int, int>> corridor;
  for (const auto& cell : path) {
    int touches = 0;
    static constexpr int dx[4] = {0, 1, 0, -1};
    static constexpr int dy[4] = {-1, 0, 1, 0};
    for (int d = 0; d < 4; ++d)
      touches += seen.count({cell.first + dx[d], cell.second + dy[d]});
    const bool extends = corridor.empty() ||
                         (touches == 1 && (std::abs(cell.first - corridor.back().first) +
                                           std::abs(cell.second - corridor.back().second)) == 1);
    if (!extends) break;
    corridor.push_back(cell);
    seen.insert(cell);
  }

  const int transform = rng.uniform_int(8);
  auto apply = [&](int x, int y) {
    if (transform & 1) x = size - 1 - x;
    if (transform & 2) y = size - 1 - y;
    if (transform & 4) std::swap(x, y);
    return y * size + x;
  };
  std::vector<int> cells;
  for (const auto& [x, y] : corridor) {
    const int c = apply(x, y);
    walls.erase(c);
    cells.push_back(c);
  }
  const bool outward = rng.bernoulli(0.5);
  const int agent = outward ? cells.back() : cells.front();
  const int goal = outward ? cells.front() : cells.back();
  return finish_suite_level(size, std::move(walls), agent, goal, rng);
}

// Recursive-backtracker maze over the lattice of even-coordinate cells; the
// open cells form a tree.
inline MazeLevel build_perfect_maze_level(int size, RngStream& rng) {
  const int rooms = (size + 1) / 2;
  std::set<int> walls;
  for (int c = 0; c < size * size; ++c) walls.insert(c);
  auto cell = [size](int x, int y) { return y * size + x; };

  std::vector<bool> visited(static_cast<std::size_t>(rooms) * rooms, false);
  std::vector<std::pair<int, int>> stack;
  auto room_index = [rooms](int rx, int ry) { return ry * rooms + rx; };
  const int sx = rng.uniform_int(rooms), sy = rng.uniform_int(rooms);
  visited[room_index(sx, sy)] = true;
  walls.erase(cell(2 * sx, 2 * sy));
  stack.emplace_back(sx, sy);
  static constexpr int dx[4] = {0, 1, 0, -1};
  static constexpr int dy[4] = {-1, 0, 1, 0};
  while (!stack.empty()) {
    const auto [rx, ry] = stack.back();
    int dirs[4] = {0, 1, 2, 3};
    for (int i = 3; i > 0; --i) std::swap(dirs[i], dirs[rng.uniform_int(i + 1)]);
    bool advanced = false;
    for (int d : dirs) {
      const int nx = rx + dx[d], ny = ry + dy[d];
      if (nx < 0 || nx >= rooms || ny < 0 || ny >= rooms || visited[room_index(nx, ny)]) continue;
      visited[room_index(nx, ny)] = true;
      walls.erase(cell(2 * nx, 2 * ny));
      walls.erase(cell(rx + nx, ry + ny));  // connector between the two rooms
      stack.emplace_back(nx, ny);
      advanced = true;
      break;
    }
    if (!advanced) stack.pop_back();
  }
  const int agent = random_open_cell(size, walls, rng);
  const int goal = random_open_cell(size, walls, rng, agent);
  return finish_suite_level(size, std::move(walls), agent, goal, rng);
}

// Parallel dead-end corridors hanging off a top hallway; the goal sits at the
// far end of one randomly chosen corridor.
inline MazeLevel build_corridor_level(int size, RngStream& rng) {
  std::set<int> walls;
  auto cell = [size](int x, int y) { return y * size + x; };
  for (int y = 1; y < size; ++y)
    for (int x = 0; x < size; ++x)
      if (x % 2 == 1) walls.insert(cell(x, y));
  const int corridors = (size + 1) / 2;
  const int goal_corridor = rng.uniform_int(corridors);
  const int goal = cell(2 * goal_corridor, size - 1);
  const int agent = cell(rng.uniform_int(size), 0);
  if (agent == goal) return build_corridor_level(size, rng);  // only possible when size == 1
  return finish_suite_level(size, std::move(walls), agent, goal, rng);
}

}  // namespace detail

inline MazeLevel build_suite_level(SuiteKind kind, int size, RngStream& rng) {
  switch (kind) {
    case SuiteKind::Rooms:
      if (size < 5) throw ConfigError("rooms suite needs size >= 5");
      return detail::build_rooms_level(size, rng);
    case SuiteKind::Spiral:
      if (size < 3) throw ConfigError("spiral suite needs size >= 3");
      return detail::build_spiral_level(size, rng);
    case SuiteKind::PerfectMaze:
      if (size < 3) throw ConfigError("perfectmaze suite needs size >= 3");
      return detail::build_perfect_maze_level(size, rng);
    case SuiteKind::Corridor:
      if (size < 3) throw ConfigError("corridor suite needs size >= 3");
      return detail::build_corridor_level(size, rng);
  }
  throw ConfigError("unknown suite kind");
}

// Procedural suite, reproducible from (kind, size, seed).
inline EvalSuite build_test_suite(SuiteKind kind, int size, std::uint64_t seed,
                                  int num_levels = 8, int attempts_per_level = 1) {
  if (num_levels <= 0) throw ConfigError("build_test_suite: num_levels must be positive");
  RngRoot root(seed);
  EvalSuite suite;
  suite.name = suite_kind_name(kind);
  suite.attempts_per_level = attempts_per_level;
  for (int i = 0; i < num_levels; ++i) {
    RngStream rng = root.stream("suite-level", static_cast<std::uint64_t>(i));
    suite.levels.push_back(build_suite_level(kind, size, rng));
  }
  return suite;
}

}  // namespace dcd
