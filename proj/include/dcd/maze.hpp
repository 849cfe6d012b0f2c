#pragma once

// Gridworld maze levels: the step-by-step design protocol, deterministic
// navigation dynamics with a sparse time-scaled reward, BFS oracles for
// solvability and optimal value, and the text codec.

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dcd/rng.hpp"

namespace dcd {

enum class Dir : int { North = 0, East = 1, South = 2, West = 3 };

inline char dir_char(Dir d) {
  switch (d) {
    case Dir::North: return 'N';
    case Dir::East: return 'E';
    case Dir::South: return 'S';
    case Dir::West: return 'W';
  }
  return '?';
}

inline std::optional<Dir> dir_from_char(char c) {
  switch (c) {
    case 'N': return Dir::North;
    case 'E': return Dir::East;
    case 'S': return Dir::South;
    case 'W': return Dir::West;
  }
  return std::nullopt;
}

// Interior grid; the surrounding border wall is implicit. Cells are indexed
// row-major, cell = y * width + x.
struct MazeLevel {
  int width = 8;
  int height = 8;
  std::set<int> walls;
  int agent_cell = 0;
  Dir agent_dir = Dir::East;
  int goal_cell = 0;
  int block_budget = 12;

  int num_cells() const { return width * height; }
  bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
  int cell_of(int x, int y) const { return y * width + x; }
  int cell_x(int cell) const { return cell % width; }
  int cell_y(int cell) const { return cell / width; }
  bool is_wall(int cell) const { return walls.count(cell) > 0; }

  void validate() const {
    if (width <= 0 || height <= 0)
      throw std::invalid_argument("MazeLevel: grid dimensions must be positive");
    if (block_budget < 0) throw std::invalid_argument("MazeLevel: negative block budget");
    if (static_cast<int>(walls.size()) > block_budget)
      throw std::invalid_argument("MazeLevel: wall count exceeds block budget");
    for (int w : walls)
      if (w < 0 || w >= num_cells()) throw std::invalid_argument("MazeLevel: wall out of bounds");
    if (agent_cell < 0 || agent_cell >= num_cells() || goal_cell < 0 || goal_cell >= num_cells())
      throw std::invalid_argument("MazeLevel: agent/goal out of bounds");
    if (agent_cell == goal_cell)
      throw std::invalid_argument("MazeLevel: agent and goal must differ");
    if (is_wall(agent_cell) || is_wall(goal_cell))
      throw std::invalid_argument("MazeLevel: agent/goal placed on a wall");
  }
};

struct EnvConfig {
  int t_max = 100;
  double gamma = 0.995;

  void validate() const {
    if (t_max <= 0) throw std::invalid_argument("EnvConfig: t_max must be positive");
    if (!(gamma > 0.0 && gamma <= 1.0))
      throw std::invalid_argument("EnvConfig: gamma must be in (0,1]");
  }
};

// --- level design protocol ---------------------------------------------------

enum class DesignPhase { PlacingBlocks, PlacingAgent, PlacingGoal, Done };

// Mid-design level: block placements for exactly `budget` steps, then the
// agent, then the goal.
struct DesignState {
  int width = 8;
  int height = 8;
  int budget = 12;
  std::set<int> walls;
  int t = 0;
  DesignPhase phase = DesignPhase::PlacingBlocks;
  int agent_cell = -1;
  Dir agent_dir = Dir::East;
  int goal_cell = -1;

  static DesignState initial(int width, int height, int budget) {
    if (width <= 0 || height <= 0)
      throw std::invalid_argument("DesignState: grid dimensions must be positive");
    if (budget < 0 || budget > width * height - 2)
      throw std::invalid_argument("DesignState: budget must leave room for agent and goal");
    DesignState s;
    s.width = width;
    s.height = height;
    s.budget = budget;
    s.phase = budget == 0 ? DesignPhase::PlacingAgent : DesignPhase::PlacingBlocks;
    return s;
  }

  int num_cells() const { return width * height; }

  MazeLevel to_level() const {
    if (phase != DesignPhase::Done)
      throw std::logic_error("DesignState: design is not finished");
    MazeLevel level;
    level.width = width;
    level.height = height;
    level.walls = walls;
    level.agent_cell = agent_cell;
    level.agent_dir = agent_dir;
    level.goal_cell = goal_cell;
    level.block_budget = budget;
    level.validate();
    return level;
  }
};

namespace detail {

inline int random_cell_excluding(const DesignState& s, RngStream& rng, int also_exclude) {
  std::vector<int> candidates;
  candidates.reserve(s.num_cells());
  for (int c = 0; c < s.num_cells(); ++c)
    if (!s.walls.count(c) && c != also_exclude) candidates.push_back(c);
  if (candidates.empty()) throw std::logic_error("design_step: no empty cell available");
  return candidates[rng.uniform_int(static_cast<int>(candidates.size()))];
}

}  // namespace detail

// One design action. Block placement on an occupied cell is a no-op (the step
// still advances); agent/goal placement that collides with a wall (or, for the
// goal, with the agent) is redirected to a uniformly random empty cell. The
// agent's facing is drawn uniformly at the agent-placement step.
inline DesignState design_step(const DesignState& state, int action, RngStream& rng) {
  if (state.phase == DesignPhase::Done)
    throw std::invalid_argument("design_step: design already finished");
  if (action < 0 || action >= state.num_cells())
    throw std::invalid_argument("design_step: action cell out of grid");

  DesignState next = state;
  switch (state.phase) {
    case DesignPhase::PlacingBlocks:
      next.walls.insert(action);  // no-op if already present
      next.t += 1;
      if (next.t == next.budget) next.phase = DesignPhase::PlacingAgent;
      break;
    case DesignPhase::PlacingAgent: {
      int cell = action;
      if (next.walls.count(cell)) cell = detail::random_cell_excluding(next, rng, -1);
      next.agent_cell = cell;
      next.agent_dir = static_cast<Dir>(rng.uniform_int(4));
      next.t += 1;
      next.phase = DesignPhase::PlacingGoal;
      break;
    }
    case DesignPhase::PlacingGoal: {
      int cell = action;
      if (next.walls.count(cell) || cell == next.agent_cell)
        cell = detail::random_cell_excluding(next, rng, next.agent_cell);
      next.goal_cell = cell;
      next.t += 1;
      next.phase = DesignPhase::Done;
      break;
    }
    case DesignPhase::Done: break;
  }
  return next;
}

// --- dynamics -----------------------------------------------------------------

enum class Action : int { Left = 0, Right = 1, Forward = 2 };
inline constexpr int kNumActions = 3;

struct PosDir {
  int cell = 0;
  Dir dir = Dir::East;

  bool operator==(const PosDir&) const = default;
};

inline int state_index(const PosDir& s) { return s.cell * 4 + static_cast<int>(s.dir); }

inline int num_states(const MazeLevel& level) { return level.num_cells() * 4; }

inline PosDir level_start(const MazeLevel& level) {
  return {level.agent_cell, level.agent_dir};
}

struct StepResult {
  PosDir next;
  double reward = 0.0;
  bool done = false;
};

// Deterministic transition. Forward into a wall or the border leaves the
// position unchanged. Reaching the goal ends the episode with reward
// 1 - T/T_max; running out the step budget ends it with reward 0.
inline StepResult env_step(const MazeLevel& level, const PosDir& state, Action action, int t,
                           const EnvConfig& config) {
  if (t < 0 || t >= config.t_max) throw std::invalid_argument("env_step: t out of range");

  StepResult out;
  out.next = state;
  switch (action) {
    case Action::Left:
      out.next.dir = static_cast<Dir>((static_cast<int>(state.dir) + 3) % 4);
      break;
    case Action::Right:
      out.next.dir = static_cast<Dir>((static_cast<int>(state.dir) + 1) % 4);
      break;
    case Action::Forward: {
      static constexpr int dx[4] = {0, 1, 0, -1};
      static constexpr int dy[4] = {-1, 0, 1, 0};
      const int d = static_cast<int>(state.dir);
      const int nx = level.cell_x(state.cell) + dx[d];
      const int ny = level.cell_y(state.cell) + dy[d];
      if (level.in_bounds(nx, ny) && !level.is_wall(level.cell_of(nx, ny)))
        out.next.cell = level.cell_of(nx, ny);
      break;
    }
  }

  const int steps_taken = t + 1;
  if (out.next.cell == level.goal_cell) {
    out.reward = 1.0 - static_cast<double>(steps_taken) / config.t_max;
    out.done = true;
  } else if (steps_taken == config.t_max) {
    out.reward = 0.0;
    out.done = true;
  }
  return out;
}

// --- oracles ------------------------------------------------------------------

// BFS move count from the agent cell to the goal, ignoring orientation.
// Unreachable goals give 0.
inline int shortest_path_length(const MazeLevel& level) {
  level.validate();
  std::vector<int> dist(level.num_cells(), -1);
  std::deque<int> queue;
  dist[level.agent_cell] = 0;
  queue.push_back(level.agent_cell);
  static constexpr int dx[4] = {0, 1, 0, -1};
  static constexpr int dy[4] = {-1, 0, 1, 0};
  while (!queue.empty()) {
    const int c = queue.front();
    queue.pop_front();
    if (c == level.goal_cell) return dist[c];
    for (int d = 0; d < 4; ++d) {
      const int nx = level.cell_x(c) + dx[d];
      const int ny = level.cell_y(c) + dy[d];
      if (!level.in_bounds(nx, ny)) continue;
      const int nc = level.cell_of(nx, ny);
      if (level.is_wall(nc) || dist[nc] >= 0) continue;
      dist[nc] = dist[c] + 1;
      queue.push_back(nc);
    }
  }
  return 0;
}

// Minimal number of actions (turns count) to reach the goal, via BFS over
// position x direction. Returns -1 when the goal is unreachable.
inline int optimal_move_count(const MazeLevel& level) {
  level.validate();
  std::vector<int> dist(static_cast<std::size_t>(level.num_cells()) * 4, -1);
  std::deque<PosDir> queue;
  const PosDir start = level_start(level);
  dist[state_index(start)] = 0;
  queue.push_back(start);
  const EnvConfig plenty{level.num_cells() * 8 + 8, 1.0};
  while (!queue.empty()) {
    const PosDir s = queue.front();
    queue.pop_front();
    const int base = dist[state_index(s)];
    for (int a = 0; a < kNumActions; ++a) {
      const StepResult r = env_step(level, s, static_cast<Action>(a), 0, plenty);
      if (r.next.cell == level.goal_cell) return base + 1;
      const int idx = state_index(r.next);
      if (dist[idx] >= 0) continue;
      dist[idx] = base + 1;
      queue.push_back(r.next);
    }
  }
  return -1;
}

// Best achievable return: 1 - L*/T_max for a solvable level whose optimal
// move count L* fits in the budget, 0 otherwise.
inline double optimal_value(const MazeLevel& level, const EnvConfig& config) {
  config.validate();
  const int moves = optimal_move_count(level);
  if (moves < 0 || moves > config.t_max) return 0.0;
  return 1.0 - static_cast<double>(moves) / config.t_max;
}

// --- episodes -------------------------------------------------------------------

enum class RolloutMode { Train, Eval };

// One episode: states has T+1 entries, actions/rewards/values have T. The
// value estimates are the table's outputs at collection time; bootstrap_value
// is V(s_T) when the episode was truncated, 0 at a true terminal.
struct Trajectory {
  std::vector<int> states;
  std::vector<int> actions;
  std::vector<double> rewards;
  std::vector<double> values;
  double bootstrap_value = 0.0;
  bool terminal_reached = false;
  RolloutMode mode = RolloutMode::Train;

  int length() const { return static_cast<int>(actions.size()); }

  double total_return() const {
    double r = 0.0;
    for (double x : rewards) r += x;
    return r;
  }
};

// --- codec ----------------------------------------------------------------------

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int column, const std::string& msg)
      : std::runtime_error("parse error at line " + std::to_string(line) + ", column " +
                           std::to_string(column) + ": " + msg),
        line(line),
        column(column) {}
  int line;
  int column;
};

// Text form: header "W H budget", H rows of W characters from {., #, A, G},
// then a "dir: X" line for the agent's facing.
inline std::string encode_level(const MazeLevel& level) {
  std::ostringstream os;
  os << level.width << ' ' << level.height << ' ' << level.block_budget << '\n';
  for (int y = 0; y < level.height; ++y) {
    for (int x = 0; x < level.width; ++x) {
      const int c = level.cell_of(x, y);
      char ch = '.';
      if (level.is_wall(c)) ch = '#';
      if (c == level.agent_cell) ch = 'A';
      if (c == level.goal_cell) ch = 'G';
      os << ch;
    }
    os << '\n';
  }
  os << "dir: " << dir_char(level.agent_dir) << '\n';
  return os.str();
}

// Reads one encoded level from the stream (header through dir line).
inline MazeLevel decode_level(std::istream& in, int line_offset = 0) {
  std::string line;
  int line_no = line_offset;
  auto next_line = [&]() {
    if (!std::getline(in, line)) throw ParseError(line_no + 1, 1, "unexpected end of input");
    ++line_no;
  };

  next_line();
  std::istringstream header(line);
  MazeLevel level;
  if (!(header >> level.width >> level.height >> level.block_budget))
    throw ParseError(line_no, 1, "expected header \"W H budget\"");
  if (level.width <= 0 || level.height <= 0)
    throw ParseError(line_no, 1, "grid dimensions must be positive");

  level.walls.clear();
  int agent = -1, goal = -1;
  for (int y = 0; y < level.height; ++y) {
    next_line();
    if (static_cast<int>(line.size()) != level.width)
      throw ParseError(line_no, static_cast<int>(line.size()) + 1, "row has wrong width");
    for (int x = 0; x < level.width; ++x) {
      const int c = level.cell_of(x, y);
      switch (line[x]) {
        case '.': break;
        case '#': level.walls.insert(c); break;
        case 'A':
          if (agent >= 0) throw ParseError(line_no, x + 1, "duplicate agent marker");
          agent = c;
          break;
        case 'G':
          if (goal >= 0) throw ParseError(line_no, x + 1, "duplicate goal marker");
          goal = c;
          break;
        default: throw ParseError(line_no, x + 1, "unexpected character");
      }
    }
  }
  if (agent < 0) throw ParseError(line_no, 1, "missing agent marker");
  if (goal < 0) throw ParseError(line_no, 1, "missing goal marker");
  level.agent_cell = agent;
  level.goal_cell = goal;

  next_line();
  if (line.rfind("dir: ", 0) != 0 || line.size() != 6)
    throw ParseError(line_no, 1, "expected \"dir: N|S|E|W\"");
  const auto dir = dir_from_char(line[5]);
  if (!dir) throw ParseError(line_no, 6, "unknown direction");
  level.agent_dir = *dir;

  try {
    level.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(line_no, 1, e.what());
  }
  return level;
}

inline MazeLevel decode_level(const std::string& text) {
  std::istringstream is(text);
  return decode_level(is);
}

// Canonical key for duplicate detection.
inline std::string level_key(const MazeLevel& level) { return encode_level(level); }

}  // namespace dcd
