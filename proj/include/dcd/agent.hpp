#pragma once

// Tabular softmax actor-critic: sparse logit/value tables keyed by state
// index, GAE advantage estimation, and the vanilla policy-gradient update.

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "dcd/maze.hpp"
#include "dcd/rng.hpp"

namespace dcd {

inline std::array<double, kNumActions> softmax3(const std::array<double, kNumActions>& logits) {
  double m = logits[0];
  for (double v : logits) m = std::max(m, v);
  std::array<double, kNumActions> p{};
  double sum = 0.0;
  for (int a = 0; a < kNumActions; ++a) {
    p[a] = std::exp(logits[a] - m);
    sum += p[a];
  }
  for (double& v : p) v /= sum;
  return p;
}

namespace detail {

inline std::uint64_t mix_bits(std::uint64_t h) {
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdull;
  h ^= h >> 33;
  h *= 0xc4ceb9fe1a85ec53ull;
  h ^= h >> 33;
  return h;
}

inline std::uint64_t double_bits(double v) {
  std::uint64_t b;
  static_assert(sizeof(b) == sizeof(v));
  __builtin_memcpy(&b, &v, sizeof(b));
  return b;
}

}  // namespace detail

// Policy parameters: one logit row per visited state; states without a row
// behave as all-zero logits (uniform policy).
struct PolicyTable {
  std::unordered_map<int, std::array<double, kNumActions>> logits;
  double learning_rate = 0.2;

  std::array<double, kNumActions> row(int state) const {
    const auto it = logits.find(state);
    return it == logits.end() ? std::array<double, kNumActions>{} : it->second;
  }

  std::array<double, kNumActions> probs(int state) const { return softmax3(row(state)); }

  // Order-independent content hash; used to assert stop-gradient contracts.
  std::uint64_t param_hash() const {
    std::uint64_t h = detail::mix_bits(logits.size());
    for (const auto& [state, row] : logits) {
      std::uint64_t e = detail::mix_bits(static_cast<std::uint64_t>(state) + 0x9e3779b97f4a7c15ull);
      for (double v : row) e = detail::mix_bits(e ^ detail::double_bits(v));
      h += e;  // commutative combine: map order must not matter
    }
    return h;
  }
};

struct ValueTable {
  std::unordered_map<int, double> values;
  double learning_rate = 0.2;

  double value(int state) const {
    const auto it = values.find(state);
    return it == values.end() ? 0.0 : it->second;
  }

  std::uint64_t param_hash() const {
    std::uint64_t h = detail::mix_bits(values.size());
    for (const auto& [state, v] : values) {
      std::uint64_t e = detail::mix_bits(static_cast<std::uint64_t>(state) + 0x9e3779b97f4a7c15ull);
      e = detail::mix_bits(e ^ detail::double_bits(v));
      h += e;
    }
    return h;
  }
};

inline int act(const PolicyTable& policy, int state, RngStream& rng) {
  const auto p = policy.probs(state);
  return rng.categorical(std::span<const double>(p.data(), p.size()));
}

// Deterministic evaluation action: argmax probability, ties to lowest index.
inline int greedy_action(const PolicyTable& policy, int state) {
  const auto p = policy.probs(state);
  int best = 0;
  for (int a = 1; a < kNumActions; ++a)
    if (p[a] > p[best]) best = a;
  return best;
}

// Rolls out one episode on the level, recording the value table's estimates
// along the way. Eval mode collects exactly the same data; the mode tag is
// what update_actor_critic later refuses.
inline Trajectory collect_trajectory(const PolicyTable& policy, const ValueTable& value_table,
                                     const MazeLevel& level, const EnvConfig& config,
                                     RolloutMode mode, RngStream& rng) {
  level.validate();
  config.validate();
  Trajectory traj;
  traj.mode = mode;
  PosDir pos = level_start(level);
  traj.states.push_back(state_index(pos));
  for (int t = 0; t < config.t_max; ++t) {
    const int s = state_index(pos);
    const int a = act(policy, s, rng);
    const StepResult r = env_step(level, pos, static_cast<Action>(a), t, config);
    traj.values.push_back(value_table.value(s));
    traj.actions.push_back(a);
    traj.rewards.push_back(r.reward);
    traj.states.push_back(state_index(r.next));
    pos = r.next;
    if (r.done) {
      traj.terminal_reached = pos.cell == level.goal_cell;
      break;
    }
  }
  traj.bootstrap_value = traj.terminal_reached ? 0.0 : value_table.value(traj.states.back());
  return traj;
}

struct GaeConfig {
  double gamma = 0.995;
  double lambda = 0.95;

  void validate() const {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("GaeConfig: gamma in (0,1]");
    if (!(lambda >= 0.0 && lambda <= 1.0))
      throw std::invalid_argument("GaeConfig: lambda in [0,1]");
  }
};

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> targets;
};

inline std::vector<double> td_errors(const Trajectory& traj, const GaeConfig& config) {
  const int T = traj.length();
  std::vector<double> delta(T);
  for (int t = 0; t < T; ++t) {
    const double next_v = t + 1 < T ? traj.values[t + 1] : traj.bootstrap_value;
    delta[t] = traj.rewards[t] + config.gamma * next_v - traj.values[t];
  }
  return delta;
}

// A_t = sum_{k>=t} (gamma*lambda)^{k-t} delta_k; targets are A_t + V(s_t).
inline GaeResult gae_advantages(const Trajectory& traj, const GaeConfig& config) {
  config.validate();
  const int T = traj.length();
  if (T == 0 || static_cast<int>(traj.values.size()) != T)
    throw std::invalid_argument("gae_advantages: trajectory values not populated");
  const auto delta = td_errors(traj, config);
  GaeResult out;
  out.advantages.assign(T, 0.0);
  out.targets.assign(T, 0.0);
  double acc = 0.0;
  for (int t = T - 1; t >= 0; --t) {
    acc = delta[t] + config.gamma * config.lambda * acc;
    out.advantages[t] = acc;
    out.targets[t] = acc + traj.values[t];
  }
  return out;
}

// Vanilla policy gradient on the visited rows plus a soft value regression:
//   logits[s_t][a] += lr * A_t * (1[a==a_t] - pi(a|s_t))
//   V(s_t)        += lr_v * (target_t - V(s_t))
inline void update_actor_critic(PolicyTable& policy, ValueTable& value_table,
                                const Trajectory& traj, std::span<const double> advantages,
                                std::span<const double> targets, double lr, double lr_v) {
  if (traj.mode == RolloutMode::Eval)
    throw std::logic_error("update_actor_critic: refusing an evaluation trajectory");
  const int T = traj.length();
  if (static_cast<int>(advantages.size()) != T || static_cast<int>(targets.size()) != T)
    throw std::invalid_argument("update_actor_critic: advantage/target size mismatch");
  for (int t = 0; t < T; ++t) {
    const int s = traj.states[t];
    const int a = traj.actions[t];
    auto& row = policy.logits.try_emplace(s).first->second;
    const auto p = softmax3(row);
    for (int k = 0; k < kNumActions; ++k)
      row[k] += lr * advantages[t] * ((k == a ? 1.0 : 0.0) - p[k]);
    auto& v = value_table.values.try_emplace(s, 0.0).first->second;
    v += lr_v * (targets[t] - v);
  }
}

// --- checkpoint text format -----------------------------------------------------

// One "state v0 v1 v2" row per policy state, then one "state v" row per value
// state, each section with a count header. Rows are sorted for stable output.
inline std::string format_tables(const PolicyTable& policy, const ValueTable& value_table) {
  std::vector<int> pstates;
  pstates.reserve(policy.logits.size());
  for (const auto& [s, _] : policy.logits) pstates.push_back(s);
  std::sort(pstates.begin(), pstates.end());
  std::vector<int> vstates;
  vstates.reserve(value_table.values.size());
  for (const auto& [s, _] : value_table.values) vstates.push_back(s);
  std::sort(vstates.begin(), vstates.end());

  std::ostringstream os;
  os.precision(17);
  os << "policy " << pstates.size() << " lr " << policy.learning_rate << '\n';
  for (int s : pstates) {
    const auto& row = policy.logits.at(s);
    os << s;
    for (double v : row) os << ' ' << v;
    os << '\n';
  }
  os << "value " << vstates.size() << " lr " << value_table.learning_rate << '\n';
  for (int s : vstates) os << s << ' ' << value_table.values.at(s) << '\n';
  return os.str();
}

inline void parse_tables(std::istream& in, PolicyTable& policy, ValueTable& value_table) {
  std::string tag;
  std::size_t n = 0;
  if (!(in >> tag >> n) || tag != "policy")
    throw std::invalid_argument("parse_tables: expected policy section");
  if (!(in >> tag >> policy.learning_rate) || tag != "lr")
    throw std::invalid_argument("parse_tables: expected policy learning rate");
  policy.logits.clear();
  for (std::size_t i = 0; i < n; ++i) {
    int s;
    std::array<double, kNumActions> row{};
    if (!(in >> s >> row[0] >> row[1] >> row[2]))
      throw std::invalid_argument("parse_tables: bad policy row");
    policy.logits[s] = row;
  }
  if (!(in >> tag >> n) || tag != "value")
    throw std::invalid_argument("parse_tables: expected value section");
  if (!(in >> tag >> value_table.learning_rate) || tag != "lr")
    throw std::invalid_argument("parse_tables: expected value learning rate");
  value_table.values.clear();
  for (std::size_t i = 0; i < n; ++i) {
    int s;
    double v;
    if (!(in >> s >> v)) throw std::invalid_argument("parse_tables: bad value row");
    value_table.values[s] = v;
  }
}

}  // namespace dcd
