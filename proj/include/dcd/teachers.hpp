#pragma once

// Level generators and the training loops of the method family: domain
// randomization, PLR, robust PLR (train only on replay), minimax, PAIRED,
// and REPAIRED (PAIRED generator plus per-student replay buffers).

#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "dcd/agent.hpp"
#include "dcd/curation.hpp"
#include "dcd/maze.hpp"
#include "dcd/metrics.hpp"
#include "dcd/report.hpp"
#include "dcd/rng.hpp"

namespace dcd {

enum class Algorithm { DR, PLR, RobustPLR, PAIRED, REPAIRED, Minimax };

inline const char* algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::DR: return "dr";
    case Algorithm::PLR: return "plr";
    case Algorithm::RobustPLR: return "robust-plr";
    case Algorithm::PAIRED: return "paired";
    case Algorithm::REPAIRED: return "repaired";
    case Algorithm::Minimax: return "minimax";
  }
  return "?";
}

inline std::optional<Algorithm> algorithm_from_name(const std::string& name) {
  if (name == "dr") return Algorithm::DR;
  if (name == "plr") return Algorithm::PLR;
  if (name == "robust-plr") return Algorithm::RobustPLR;
  if (name == "paired") return Algorithm::PAIRED;
  if (name == "repaired") return Algorithm::REPAIRED;
  if (name == "minimax") return Algorithm::Minimax;
  return std::nullopt;
}

struct DcdConfig {
  Algorithm algorithm = Algorithm::RobustPLR;
  ReplayConfig replay;
  EnvConfig env;
  GaeConfig gae;
  int buffer_size = 128;
  long long budget = 2000;
  std::uint64_t seed = 1;
  long long eval_interval = 500;
  int grid_width = 8;
  int grid_height = 8;
  int block_budget = 12;
  double student_lr = 0.2;
  double value_lr = 0.2;
  double generator_lr = 0.05;
  double generator_entropy_coef = 0.0;
  bool eval_greedy = true;

  void validate() const {
    replay.validate();
    env.validate();
    gae.validate();
    if (buffer_size <= 0) throw ConfigError("buffer-size must be positive");
    if (budget <= 0) throw ConfigError("budget must be positive");
    if (eval_interval <= 0) throw ConfigError("eval-interval must be positive");
    if (grid_width <= 0 || grid_height <= 0) throw ConfigError("grid dimensions must be positive");
    if (block_budget < 0 || block_budget > grid_width * grid_height - 2)
      throw ConfigError("block-budget must leave room for agent and goal");
    if (!(student_lr > 0.0) || !(value_lr > 0.0) || !(generator_lr > 0.0))
      throw ConfigError("learning rates must be positive");
    if (generator_entropy_coef < 0.0) throw ConfigError("generator-entropy must be >= 0");
  }
};

// --- level generators -----------------------------------------------------------

// Uniform design actions through the full placement protocol.
inline MazeLevel generate_random_design(RngStream& rng, int width, int height, int budget) {
  DesignState s = DesignState::initial(width, height, budget);
  while (s.phase != DesignPhase::Done) s = design_step(s, rng.uniform_int(s.num_cells()), rng);
  return s.to_level();
}

inline std::vector<double> softmax_vec(const std::vector<double>& logits) {
  double m = logits.front();
  for (double v : logits) m = std::max(m, v);
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp(logits[i] - m);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

// Tabular design policy conditioned on (design step, walls placed so far), a
// coarse sketch summary that keeps the table enumerable.
struct GeneratorPolicy {
  std::unordered_map<long long, std::vector<double>> logits;
  int num_actions = 64;
  double entropy_coef = 0.0;
  double learning_rate = 0.05;

  static long long key(int t, int walls_placed) {
    return (static_cast<long long>(t) << 32) | static_cast<unsigned>(walls_placed);
  }

  std::vector<double> row(long long k) const {
    const auto it = logits.find(k);
    return it == logits.end() ? std::vector<double>(num_actions, 0.0) : it->second;
  }

  std::vector<double> probs(long long k) const { return softmax_vec(row(k)); }
};

struct DesignTrajectory {
  struct Step {
    long long key = 0;
    int action = 0;
    double log_prob = 0.0;
  };
  std::vector<Step> steps;
};

struct GeneratedLevel {
  MazeLevel level;
  DesignTrajectory design;
};

inline GeneratedLevel generate_policy_design(const GeneratorPolicy& gen, int width, int height,
                                             int budget, RngStream& rng) {
  DesignState s = DesignState::initial(width, height, budget);
  GeneratedLevel out;
  while (s.phase != DesignPhase::Done) {
    const long long k = GeneratorPolicy::key(s.t, static_cast<int>(s.walls.size()));
    const auto probs = gen.probs(k);
    const int a = rng.categorical(probs);
    out.design.steps.push_back({k, a, std::log(probs[a])});
    s = design_step(s, a, rng);
  }
  out.level = s.to_level();
  return out;
}

// Per-episode regret estimate from achieved returns (antagonist minus
// protagonist). May be negative; unsolvable levels give 0.
inline double estimate_regret_paired(double return_a, double return_b) {
  return return_b - return_a;
}

// REINFORCE ascent on reward * sum_t log pi(a_t) plus an entropy bonus.
inline void update_generator(GeneratorPolicy& gen, const DesignTrajectory& traj, double reward) {
  if (reward == 0.0 && gen.entropy_coef == 0.0) return;
  for (const auto& step : traj.steps) {
    auto [it, inserted] = gen.logits.try_emplace(step.key, std::vector<double>(gen.num_actions, 0.0));
    auto& row = it->second;
    const auto p = softmax_vec(row);
    double entropy = 0.0;
    if (gen.entropy_coef != 0.0)
      for (double q : p)
        if (q > 0.0) entropy -= q * std::log(q);
    for (int k = 0; k < gen.num_actions; ++k) {
      double grad = reward * ((k == step.action ? 1.0 : 0.0) - p[k]);
      if (gen.entropy_coef != 0.0 && p[k] > 0.0)
        grad -= gen.entropy_coef * p[k] * (std::log(p[k]) + entropy);
      row[k] += gen.learning_rate * grad;
    }
  }
}

// --- orchestration -----------------------------------------------------------------

struct RunOutcome {
  RunReport report;
  PolicyTable policy;  // protagonist
  ValueTable value;
  PolicyTable antagonist_policy;
  ValueTable antagonist_value;
  std::string buffer_snapshot;             // protagonist buffer, empty when unused
  std::string antagonist_buffer_snapshot;  // REPAIRED only
};

struct CheckpointData {
  long long episode = 0;
  const PolicyTable& policy;
  const ValueTable& value;
  const LevelBuffer* buffer = nullptr;
};

using CheckpointHook = std::function<void(const CheckpointData&)>;

namespace detail {

struct IntervalStats {
  long long n = 0;
  long long solved = 0;
  double blocks = 0.0;
  double spath = 0.0;
  double solved_path = 0.0;
  double lzw = 0.0;

  void add(const ComplexityRecord& rec) {
    ++n;
    blocks += rec.block_count;
    spath += rec.shortest_path;
    lzw += rec.action_lzw;
    if (rec.solved_path) {
      ++solved;
      solved_path += *rec.solved_path;
    }
  }
  void reset() { *this = IntervalStats{}; }
};

}  // namespace detail

// Runs one training loop to the episode budget, evaluating on the suites at
// every eval interval. All randomness is derived from config.seed, so equal
// configs produce byte-identical reports (wall clock aside).
inline RunOutcome run_dcd(const DcdConfig& config, const std::vector<EvalSuite>& suites,
                          const CheckpointHook& checkpoint_hook = {}) {
  config.validate();
  const auto t_start = std::chrono::steady_clock::now();

  RngRoot root(config.seed);
  RngStream env_rng = root.stream("env");
  RngStream agent_rng = root.stream("agent");
  RngStream buffer_rng = root.stream("buffer");
  RngStream teacher_rng = root.stream("teacher");

  const Algorithm alg = config.algorithm;
  const bool has_buffer =
      alg == Algorithm::PLR || alg == Algorithm::RobustPLR || alg == Algorithm::REPAIRED;

  RunOutcome out;
  out.policy.learning_rate = config.student_lr;
  out.value.learning_rate = config.value_lr;
  out.antagonist_policy.learning_rate = config.student_lr;
  out.antagonist_value.learning_rate = config.value_lr;

  GeneratorPolicy gen;
  gen.num_actions = config.grid_width * config.grid_height;
  gen.entropy_coef = config.generator_entropy_coef;
  gen.learning_rate = config.generator_lr;

  std::optional<LevelBuffer> buffer_a, buffer_b;
  if (has_buffer) buffer_a.emplace(config.buffer_size);
  if (alg == Algorithm::REPAIRED) buffer_b.emplace(config.buffer_size);

  std::unordered_map<std::string, double> rmax_a, rmax_b;

  RunReport& report = out.report;
  report.config_echo["algorithm"] = algorithm_name(alg);
  report.config_echo["seed"] = std::to_string(config.seed);
  report.config_echo["budget"] = std::to_string(config.budget);

  detail::IntervalStats interval;
  long long eval_count = 0;

  auto score_of = [&](const MazeLevel& level, const Trajectory& traj,
                      std::unordered_map<std::string, double>& rmax) {
    switch (config.replay.scoring) {
      case Scoring::PositiveValueLoss: return score_positive_value_loss(traj, config.gae);
      case Scoring::MaxMC: {
        const std::string key = level_key(level);
        const double ret = traj.total_return();
        const auto it = rmax.find(key);
        const double best = it == rmax.end() ? ret : std::max(it->second, ret);
        rmax[key] = best;
        return score_max_mc(traj, best, config.replay.max_mc_variant);
      }
      case Scoring::TrueRegret: return score_true_regret(level, traj, config.env);
    }
    throw ConfigError("unknown scoring function");
  };

  auto train_student = [&](PolicyTable& policy, ValueTable& value, const MazeLevel& level) {
    Trajectory traj =
        collect_trajectory(policy, value, level, config.env, RolloutMode::Train, agent_rng);
    const GaeResult gae = gae_advantages(traj, config.gae);
    update_actor_critic(policy, value, traj, gae.advantages, gae.targets, policy.learning_rate,
                        value.learning_rate);
    return traj;
  };

  auto eval_student = [&](const PolicyTable& policy, const ValueTable& value,
                          const MazeLevel& level) {
    const std::uint64_t before = policy.param_hash() ^ (value.param_hash() * 3);
    Trajectory traj =
        collect_trajectory(policy, value, level, config.env, RolloutMode::Eval, agent_rng);
    const std::uint64_t after = policy.param_hash() ^ (value.param_hash() * 3);
    if (before != after)
      throw std::logic_error("stop-gradient contract violated on a generate episode");
    return traj;
  };

  auto evaluate = [&](long long episode_no) {
    for (std::size_t i = 0; i < suites.size(); ++i) {
      RngStream eval_rng = root.stream("eval", static_cast<std::uint64_t>(eval_count) * 4096 + i);
      const SolveOptions opts{config.env, config.eval_greedy};
      const SolvedRateReport rate = solved_rate(out.policy, suites[i], opts, eval_rng);
      MetricsRow row;
      row.episode = episode_no;
      row.updates = report.student_updates;
      row.suite = suites[i].name;
      row.solved_rate = rate.aggregate;
      if (interval.n > 0) {
        row.block_count = interval.blocks / interval.n;
        row.shortest_path = interval.spath / interval.n;
        row.action_lzw_mean = interval.lzw / interval.n;
        if (interval.solved > 0) row.solved_path_mean = interval.solved_path / interval.solved;
      }
      row.buffer_size = buffer_a ? buffer_a->size() : 0;
      row.mean_buffer_score = buffer_a ? buffer_a->mean_score() : 0.0;
      report.rows.push_back(row);
      report.final_solved_rates[suites[i].name] = rate.aggregate;
    }
    ++eval_count;
    interval.reset();
  };

  for (long long episode = 0; episode < config.budget; ++episode) {
    const long long c = episode;
    switch (alg) {
      case Algorithm::DR: {
        const MazeLevel level =
            generate_random_design(env_rng, config.grid_width, config.grid_height, config.block_budget);
        const Trajectory traj = train_student(out.policy, out.value, level);
        ++report.student_updates;
        ++report.generate_episodes;
        interval.add(complexity_record(level, traj));
        break;
      }
      case Algorithm::PLR:
      case Algorithm::RobustPLR: {
        const Decision d = sample_decision(config.replay.replay_rate, buffer_rng);
        if (d == Decision::Replay && !buffer_a->empty()) {
          const MazeLevel level = sample_replay(*buffer_a, config.replay, c, buffer_rng);
          const Trajectory traj = train_student(out.policy, out.value, level);
          ++report.student_updates;
          ++report.replay_episodes;
          update_buffer(*buffer_a, config.replay, level, score_of(level, traj, rmax_a), c);
          interval.add(complexity_record(level, traj));
        } else {
          const MazeLevel level = generate_random_design(env_rng, config.grid_width,
                                                         config.grid_height, config.block_budget);
          Trajectory traj;
          if (alg == Algorithm::PLR) {
            traj = train_student(out.policy, out.value, level);
            ++report.student_updates;
          } else {
            traj = eval_student(out.policy, out.value, level);
          }
          ++report.generate_episodes;
          update_buffer(*buffer_a, config.replay, level, score_of(level, traj, rmax_a), c);
          interval.add(complexity_record(level, traj));
        }
        break;
      }
      case Algorithm::Minimax: {
        const GeneratedLevel g =
            generate_policy_design(gen, config.grid_width, config.grid_height, config.block_budget,
                                   teacher_rng);
        const Trajectory traj = train_student(out.policy, out.value, g.level);
        ++report.student_updates;
        update_generator(gen, g.design, -traj.total_return());
        ++report.generator_updates;
        ++report.generate_episodes;
        interval.add(complexity_record(g.level, traj));
        break;
      }
      case Algorithm::PAIRED: {
        const GeneratedLevel g =
            generate_policy_design(gen, config.grid_width, config.grid_height, config.block_budget,
                                   teacher_rng);
        const Trajectory traj_a = train_student(out.policy, out.value, g.level);
        ++report.student_updates;
        const Trajectory traj_b = train_student(out.antagonist_policy, out.antagonist_value, g.level);
        ++report.antagonist_updates;
        update_generator(gen, g.design,
                         estimate_regret_paired(traj_a.total_return(), traj_b.total_return()));
        ++report.generator_updates;
        ++report.generate_episodes;
        interval.add(complexity_record(g.level, traj_a));
        break;
      }
      case Algorithm::REPAIRED: {
        const Decision d = sample_decision(config.replay.replay_rate, buffer_rng);
        const bool replay = d == Decision::Replay && !buffer_a->empty() && !buffer_b->empty();
        if (replay) {
          const MazeLevel level_a = sample_replay(*buffer_a, config.replay, c, buffer_rng);
          const MazeLevel level_b = sample_replay(*buffer_b, config.replay, c, buffer_rng);
          const Trajectory traj_a = train_student(out.policy, out.value, level_a);
          ++report.student_updates;
          const Trajectory traj_b = train_student(out.antagonist_policy, out.antagonist_value, level_b);
          ++report.antagonist_updates;
          update_buffer(*buffer_a, config.replay, level_a, score_of(level_a, traj_a, rmax_a), c);
          update_buffer(*buffer_b, config.replay, level_b, score_of(level_b, traj_b, rmax_b), c);
          ++report.replay_episodes;
          interval.add(complexity_record(level_a, traj_a));
        } else {
          const GeneratedLevel g =
              generate_policy_design(gen, config.grid_width, config.grid_height,
                                     config.block_budget, teacher_rng);
          const Trajectory traj_a = eval_student(out.policy, out.value, g.level);
          const Trajectory traj_b = eval_student(out.antagonist_policy, out.antagonist_value, g.level);
          update_generator(gen, g.design,
                           estimate_regret_paired(traj_a.total_return(), traj_b.total_return()));
          ++report.generator_updates;
          update_buffer(*buffer_a, config.replay, g.level, score_of(g.level, traj_a, rmax_a), c);
          update_buffer(*buffer_b, config.replay, g.level, score_of(g.level, traj_b, rmax_b), c);
          ++report.generate_episodes;
          interval.add(complexity_record(g.level, traj_a));
        }
        break;
      }
    }
    ++report.episodes;

    const bool at_interval = (episode + 1) % config.eval_interval == 0;
    const bool at_end = episode + 1 == config.budget;
    if (at_interval || at_end) {
      if (!suites.empty()) evaluate(episode + 1);
      if (checkpoint_hook)
        checkpoint_hook({episode + 1, out.policy, out.value, buffer_a ? &*buffer_a : nullptr});
    }
  }

  if (buffer_a) out.buffer_snapshot = format_buffer(*buffer_a, config.budget);
  if (buffer_b) out.antagonist_buffer_snapshot = format_buffer(*buffer_b, config.budget);

  const auto t_end = std::chrono::steady_clock::now();
  report.wall_clock_seconds = std::chrono::duration<double>(t_end - t_start).count();
  return out;
}

}  // namespace dcd
