#pragma once

// Prioritized level replay: the level buffer with scores and timestamps, the
// regret-estimating scoring functions, the rank/proportional replay
// distribution with staleness mixing, and the buffer update rule.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "dcd/agent.hpp"
#include "dcd/maze.hpp"
#include "dcd/rng.hpp"

namespace dcd {

enum class Prioritization { Rank, Proportional };
enum class Scoring { PositiveValueLoss, MaxMC, TrueRegret };
enum class MaxMcVariant { PerStep, S0 };

struct ReplayConfig {
  double replay_rate = 0.5;      // p
  double temperature = 0.3;      // beta
  double staleness_coef = 0.3;   // rho
  Prioritization prioritization = Prioritization::Rank;
  Scoring scoring = Scoring::MaxMC;
  MaxMcVariant max_mc_variant = MaxMcVariant::PerStep;

  void validate() const {
    if (!(replay_rate >= 0.0 && replay_rate <= 1.0))
      throw std::invalid_argument("ReplayConfig: replay_rate must be in [0,1]");
    if (!(temperature > 0.0))
      throw std::invalid_argument("ReplayConfig: temperature must be > 0");
    if (!(staleness_coef >= 0.0 && staleness_coef <= 1.0))
      throw std::invalid_argument("ReplayConfig: staleness_coef must be in [0,1]");
  }
};

// --- scoring -------------------------------------------------------------------

// Mean clipped GAE advantage: (1/T) sum_t max(A_t, 0). Zero for a value table
// that is exact for the rollout policy.
inline double score_positive_value_loss(const Trajectory& traj, const GaeConfig& config) {
  if (traj.length() == 0)
    throw std::invalid_argument("score_positive_value_loss: empty trajectory");
  const GaeResult gae = gae_advantages(traj, config);
  double sum = 0.0;
  for (double a : gae.advantages) sum += std::max(a, 0.0);
  return sum / gae.advantages.size();
}

// Regret estimate against the best return seen on this level so far. PerStep
// averages R_max - V(s_t); S0 uses the initial state only. Can be negative
// when the value table overestimates; stored as-is.
inline double score_max_mc(const Trajectory& traj, double r_max, MaxMcVariant variant) {
  if (traj.length() == 0) throw std::invalid_argument("score_max_mc: empty trajectory");
  if (variant == MaxMcVariant::S0) return r_max - traj.values.front();
  double sum = 0.0;
  for (double v : traj.values) sum += r_max - v;
  return sum / traj.values.size();
}

// Oracle regret: best achievable return minus the achieved return.
inline double score_true_regret(const MazeLevel& level, const Trajectory& traj,
                                const EnvConfig& config) {
  return optimal_value(level, config) - traj.total_return();
}

// --- buffer --------------------------------------------------------------------

struct BufferEntry {
  MazeLevel level;
  double score = 0.0;
  long long timestamp = 0;
};

// Fixed-capacity store of distinct levels (by canonical encoding) with scores
// and last-touched timestamps.
class LevelBuffer {
 public:
  explicit LevelBuffer(int capacity) : capacity_(capacity) {
    if (capacity <= 0) throw std::invalid_argument("LevelBuffer: capacity must be positive");
  }

  int capacity() const { return capacity_; }
  int size() const { return static_cast<int>(entries_.size()); }
  bool empty() const { return entries_.empty(); }
  bool full() const { return size() >= capacity_; }
  const std::vector<BufferEntry>& entries() const { return entries_; }
  const BufferEntry& entry(int i) const { return entries_.at(i); }

  int find(const MazeLevel& level) const {
    const auto it = index_.find(level_key(level));
    return it == index_.end() ? -1 : it->second;
  }

  double min_score() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& e : entries_) m = std::min(m, e.score);
    return m;
  }

  double mean_score() const {
    if (entries_.empty()) return 0.0;
    double s = 0.0;
    for (const auto& e : entries_) s += e.score;
    return s / entries_.size();
  }

  // Internal mutations used by update_buffer.
  void set(int i, double score, long long timestamp) {
    entries_.at(i).score = score;
    entries_.at(i).timestamp = timestamp;
  }
  void insert(const MazeLevel& level, double score, long long timestamp) {
    if (full()) throw std::logic_error("LevelBuffer: insert into full buffer");
    index_[level_key(level)] = size();
    entries_.push_back({level, score, timestamp});
  }
  void replace(int i, const MazeLevel& level, double score, long long timestamp) {
    index_.erase(level_key(entries_.at(i).level));
    entries_.at(i) = {level, score, timestamp};
    index_[level_key(level)] = i;
  }

 private:
  int capacity_;
  std::vector<BufferEntry> entries_;
  std::unordered_map<std::string, int> index_;
};

// P_replay = (1-rho) * P_S + rho * P_C, with P_S from h(S_i)^{1/beta} (rank or
// clipped-proportional prioritization) and P_C proportional to staleness
// c - C_i. Degenerate weights (all zero) fall back to uniform.
inline std::vector<double> replay_distribution(const LevelBuffer& buffer,
                                               const ReplayConfig& config, long long c) {
  config.validate();
  const int n = buffer.size();
  if (n == 0) throw std::invalid_argument("replay_distribution: empty buffer");

  std::vector<double> weight(n, 0.0);
  if (config.prioritization == Prioritization::Rank) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return buffer.entry(a).score > buffer.entry(b).score;  // ties keep insertion order
    });
    for (int rank = 0; rank < n; ++rank)
      weight[order[rank]] = std::pow(1.0 / (rank + 1), 1.0 / config.temperature);
  } else {
    for (int i = 0; i < n; ++i) {
      const double h = std::max(buffer.entry(i).score, 0.0);
      weight[i] = h > 0.0 ? std::pow(h, 1.0 / config.temperature) : 0.0;
    }
  }
  double wsum = 0.0;
  for (double w : weight) wsum += w;
  std::vector<double> p_s(n, 1.0 / n);
  if (wsum > 0.0)
    for (int i = 0; i < n; ++i) p_s[i] = weight[i] / wsum;

  std::vector<double> p_c(n, 1.0 / n);
  double stale_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const long long age = c - buffer.entry(i).timestamp;
    if (age < 0) throw std::invalid_argument("replay_distribution: timestamp ahead of episode count");
    stale_sum += static_cast<double>(age);
  }
  if (stale_sum > 0.0)
    for (int i = 0; i < n; ++i)
      p_c[i] = static_cast<double>(c - buffer.entry(i).timestamp) / stale_sum;

  std::vector<double> out(n);
  for (int i = 0; i < n; ++i)
    out[i] = (1.0 - config.staleness_coef) * p_s[i] + config.staleness_coef * p_c[i];
  return out;
}

// Buffer update rule: refresh a known level in place; insert while below
// capacity; otherwise evict the entry with minimal replay support, but only
// if its score is below the incoming one.
inline void update_buffer(LevelBuffer& buffer, const ReplayConfig& config, const MazeLevel& level,
                          double score, long long c) {
  if (!std::isfinite(score)) throw std::invalid_argument("update_buffer: score must be finite");
  const int existing = buffer.find(level);
  if (existing >= 0) {
    buffer.set(existing, score, c);
    return;
  }
  if (!buffer.full()) {
    buffer.insert(level, score, c);
    return;
  }
  const auto dist = replay_distribution(buffer, config, c);
  int min_idx = 0;
  for (int i = 1; i < buffer.size(); ++i)
    if (dist[i] < dist[min_idx]) min_idx = i;
  if (buffer.entry(min_idx).score < score) buffer.replace(min_idx, level, score, c);
}

inline const MazeLevel& sample_replay(const LevelBuffer& buffer, const ReplayConfig& config,
                                      long long c, RngStream& rng) {
  if (buffer.empty()) throw std::invalid_argument("sample_replay: empty buffer");
  const auto dist = replay_distribution(buffer, config, c);
  return buffer.entry(rng.categorical(dist)).level;
}

enum class Decision { Generate, Replay };

inline Decision sample_decision(double p, RngStream& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("sample_decision: p must be in [0,1]");
  return rng.bernoulli(p) ? Decision::Replay : Decision::Generate;
}

// --- snapshot format -------------------------------------------------------------

// Header "K c N", then per entry a "score timestamp" line followed by the
// encoded level block.
inline std::string format_buffer(const LevelBuffer& buffer, long long c) {
  std::ostringstream os;
  os.precision(17);
  os << buffer.capacity() << ' ' << c << ' ' << buffer.size() << '\n';
  for (const auto& e : buffer.entries()) {
    os << e.score << ' ' << e.timestamp << '\n';
    os << encode_level(e.level);
  }
  return os.str();
}

struct BufferSnapshot {
  LevelBuffer buffer;
  long long episode_count = 0;
};

inline BufferSnapshot parse_buffer(std::istream& in) {
  int capacity = 0, n = 0;
  long long c = 0;
  std::string header;
  if (!std::getline(in, header)) throw std::invalid_argument("parse_buffer: missing header");
  {
    std::istringstream hs(header);
    if (!(hs >> capacity >> c >> n)) throw std::invalid_argument("parse_buffer: bad header");
  }
  BufferSnapshot snap{LevelBuffer(capacity), c};
  for (int i = 0; i < n; ++i) {
    std::string meta;
    if (!std::getline(in, meta)) throw std::invalid_argument("parse_buffer: missing entry");
    double score = 0.0;
    long long timestamp = 0;
    {
      std::istringstream ms(meta);
      if (!(ms >> score >> timestamp)) throw std::invalid_argument("parse_buffer: bad entry line");
    }
    snap.buffer.insert(decode_level(in), score, timestamp);
  }
  return snap;
}

}  // namespace dcd
