#pragma once

// Finite student x parameter games: payoff matrices, regret, the three-player
// dual curriculum game, equilibrium certification, and a certified zero-sum
// solver for minimax regret.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iostream>
#include <limits>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dcd/rng.hpp"

namespace dcd {

// V[i][j] is the value of policy i on environment parameter j, bounded in
// [lower_bound, upper_bound].
struct PayoffGame {
  int num_policies = 0;
  int num_params = 0;
  std::vector<double> values;  // row-major: values[i * num_params + j]
  double lower_bound = 0.0;
  double upper_bound = 1.0;

  double value(int policy, int param) const {
    return values[static_cast<std::size_t>(policy) * num_params + param];
  }
  double& value(int policy, int param) {
    return values[static_cast<std::size_t>(policy) * num_params + param];
  }

  double bound_range() const { return upper_bound - lower_bound; }

  void validate() const {
    if (num_policies <= 0 || num_params <= 0)
      throw std::invalid_argument("PayoffGame: dimensions must be positive");
    if (values.size() != static_cast<std::size_t>(num_policies) * num_params)
      throw std::invalid_argument("PayoffGame: value matrix size mismatch");
    if (!(lower_bound <= upper_bound))
      throw std::invalid_argument("PayoffGame: lower_bound must be <= upper_bound");
    for (double v : values) {
      if (!std::isfinite(v) || v < lower_bound || v > upper_bound)
        throw std::invalid_argument("PayoffGame: entry outside [lower_bound, upper_bound]");
    }
  }
};

inline void validate_simplex(std::span<const double> probs, int expected_size,
                             const char* what) {
  if (static_cast<int>(probs.size()) != expected_size)
    throw std::invalid_argument(std::string(what) + ": dimension mismatch");
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw std::invalid_argument(std::string(what) + ": negative probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::invalid_argument(std::string(what) + ": probabilities must sum to 1");
}

struct MixedStudent {
  std::vector<double> probs;

  static MixedStudent pure(int index, int n) {
    MixedStudent s;
    s.probs.assign(n, 0.0);
    s.probs.at(index) = 1.0;
    return s;
  }
  static MixedStudent uniform(int n) {
    MixedStudent s;
    s.probs.assign(n, 1.0 / n);
    return s;
  }
};

struct MixedTeacher {
  std::vector<double> probs;

  static MixedTeacher pure(int index, int n) {
    MixedTeacher t;
    t.probs.assign(n, 0.0);
    t.probs.at(index) = 1.0;
    return t;
  }
  static MixedTeacher uniform(int n) {
    MixedTeacher t;
    t.probs.assign(n, 1.0 / n);
    return t;
  }
};

enum class ObjectiveKind { Regret, Uniform };

struct TeacherObjective {
  ObjectiveKind kind = ObjectiveKind::Regret;
  double uniform_constant = 0.0;  // C; only read for the Uniform kind

  static TeacherObjective regret() { return {ObjectiveKind::Regret, 0.0}; }
  static TeacherObjective uniform(double c = 0.0) { return {ObjectiveKind::Uniform, c}; }
};

// Three-player game: the first teacher plays with probability p, the second
// with probability 1-p.
struct DualGameSpec {
  PayoffGame base;
  TeacherObjective teacher1;
  TeacherObjective teacher2;
  double p = 0.5;

  void validate() const {
    base.validate();
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("DualGameSpec: p must be in [0,1]");
  }
};

struct Profile {
  MixedStudent student;
  MixedTeacher teacher1;
  MixedTeacher teacher2;

  void validate(const DualGameSpec& spec) const {
    validate_simplex(student.probs, spec.base.num_policies, "Profile.student");
    validate_simplex(teacher1.probs, spec.base.num_params, "Profile.teacher1");
    validate_simplex(teacher2.probs, spec.base.num_params, "Profile.teacher2");
  }
};

// --- basic evaluations ------------------------------------------------------

// Expected value of a pure policy against a mixture over parameters.
inline double pure_value_on_mix(const PayoffGame& game, int policy,
                                std::span<const double> teacher_mix) {
  double v = 0.0;
  for (int j = 0; j < game.num_params; ++j) v += teacher_mix[j] * game.value(policy, j);
  return v;
}

inline double student_value_on_mix(const PayoffGame& game, const MixedStudent& student,
                                   std::span<const double> teacher_mix) {
  double v = 0.0;
  for (int i = 0; i < game.num_policies; ++i)
    if (student.probs[i] != 0.0) v += student.probs[i] * pure_value_on_mix(game, i, teacher_mix);
  return v;
}

// Lowest-index argmax over pure policies against a parameter mixture.
inline int student_best_response(const PayoffGame& game, std::span<const double> teacher_mix) {
  int best = 0;
  double best_v = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < game.num_policies; ++i) {
    const double v = pure_value_on_mix(game, i, teacher_mix);
    if (v > best_v) {
      best_v = v;
      best = i;
    }
  }
  return best;
}

inline double column_max(const PayoffGame& game, int param) {
  double m = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < game.num_policies; ++i) m = std::max(m, game.value(i, param));
  return m;
}

// Regret of the student on one parameter: best pure value minus the student's
// value. Nonnegative and at most the payoff range.
inline double regret(const PayoffGame& game, const MixedStudent& student, int param_index) {
  validate_simplex(student.probs, game.num_policies, "regret: student");
  if (param_index < 0 || param_index >= game.num_params)
    throw std::invalid_argument("regret: param_index out of range");
  double student_v = 0.0;
  for (int i = 0; i < game.num_policies; ++i)
    student_v += student.probs[i] * game.value(i, param_index);
  return column_max(game, param_index) - student_v;
}

struct WorstCaseRegret {
  double value = 0.0;
  int param_index = 0;
};

// Max over parameters of regret(); ties go to the lowest index.
inline WorstCaseRegret worst_case_regret(const PayoffGame& game, const MixedStudent& student) {
  WorstCaseRegret out;
  out.value = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < game.num_params; ++j) {
    const double r = regret(game, student, j);
    if (r > out.value) {
      out.value = r;
      out.param_index = j;
    }
  }
  return out;
}

// Expected regret of the student under a mixture over parameters.
inline double expected_regret(const PayoffGame& game, const MixedStudent& student,
                              std::span<const double> teacher_mix) {
  double r = 0.0;
  for (int j = 0; j < game.num_params; ++j)
    if (teacher_mix[j] != 0.0) r += teacher_mix[j] * regret(game, student, j);
  return r;
}

// Teacher utility: the Regret kind is the expected student regret under the
// teacher's mixture; the Uniform kind is the constant C.
inline double teacher_utility(const TeacherObjective& obj, const PayoffGame& game,
                              const MixedStudent& student, const MixedTeacher& teacher) {
  if (obj.kind == ObjectiveKind::Uniform) return obj.uniform_constant;
  validate_simplex(teacher.probs, game.num_params, "teacher_utility: teacher");
  return expected_regret(game, student, teacher.probs);
}

// Teacher utility of a pure parameter choice (used for best-response
// enumeration; a pure best response always exists).
inline double teacher_pure_utility(const TeacherObjective& obj, const PayoffGame& game,
                                   const MixedStudent& student, int param) {
  if (obj.kind == ObjectiveKind::Uniform) return obj.uniform_constant;
  return regret(game, student, param);
}

inline int teacher_best_response(const TeacherObjective& obj, const PayoffGame& game,
                                 const MixedStudent& student) {
  int best = 0;
  double best_u = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < game.num_params; ++j) {
    const double u = teacher_pure_utility(obj, game, student, j);
    if (u > best_u) {
      best_u = u;
      best = j;
    }
  }
  return best;
}

struct DualUtilities {
  double student = 0.0;
  double teacher1 = 0.0;
  double teacher2 = 0.0;
};

inline DualUtilities dual_utilities(const DualGameSpec& spec, const Profile& profile) {
  profile.validate(spec);
  DualUtilities u;
  u.student = spec.p * student_value_on_mix(spec.base, profile.student, profile.teacher1.probs) +
              (1.0 - spec.p) * student_value_on_mix(spec.base, profile.student, profile.teacher2.probs);
  u.teacher1 = spec.p * teacher_utility(spec.teacher1, spec.base, profile.student, profile.teacher1);
  u.teacher2 =
      (1.0 - spec.p) * teacher_utility(spec.teacher2, spec.base, profile.student, profile.teacher2);
  return u;
}

struct NashGaps {
  double student = 0.0;
  double teacher1 = 0.0;
  double teacher2 = 0.0;

  double max_gap() const { return std::max(student, std::max(teacher1, teacher2)); }
};

// Per-player exploitability in the dual curriculum game: best-response utility
// minus current utility, holding the other players fixed. A profile is an
// eps-NE iff all three gaps are <= eps.
inline NashGaps nash_gap(const DualGameSpec& spec, const Profile& profile) {
  profile.validate(spec);
  const PayoffGame& g = spec.base;
  const double p = spec.p;

  // Student best-responds to the p-mixture of the two teachers.
  std::vector<double> mix(g.num_params, 0.0);
  for (int j = 0; j < g.num_params; ++j)
    mix[j] = p * profile.teacher1.probs[j] + (1.0 - p) * profile.teacher2.probs[j];
  const int br = student_best_response(g, mix);
  const double student_now = student_value_on_mix(g, profile.student, mix);
  const double student_best = pure_value_on_mix(g, br, mix);

  // Teachers best-respond to the student; only their own parameter matters.
  double t1_best = -std::numeric_limits<double>::infinity();
  double t2_best = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < g.num_params; ++j) {
    t1_best = std::max(t1_best, teacher_pure_utility(spec.teacher1, g, profile.student, j));
    t2_best = std::max(t2_best, teacher_pure_utility(spec.teacher2, g, profile.student, j));
  }
  const double t1_now = teacher_utility(spec.teacher1, g, profile.student, profile.teacher1);
  const double t2_now = teacher_utility(spec.teacher2, g, profile.student, profile.teacher2);

  NashGaps gaps;
  gaps.student = std::max(0.0, student_best - student_now);
  gaps.teacher1 = std::max(0.0, p * (t1_best - t1_now));
  gaps.teacher2 = std::max(0.0, (1.0 - p) * (t2_best - t2_now));
  return gaps;
}

// --- zero-sum solving -------------------------------------------------------

class SolverFailure : public std::runtime_error {
 public:
  SolverFailure(const std::string& msg, double gap)
      : std::runtime_error(msg), last_exploitability(gap) {}
  double last_exploitability;
};

struct ZeroSumSolution {
  std::vector<double> row_strategy;  // minimizer
  std::vector<double> col_strategy;  // maximizer
  double row_worst_case = 0.0;       // max_j x^T M e_j
  double col_worst_case = 0.0;       // min_i (M y)_i
  double gap = 0.0;                  // duality gap of the averaged pair
  long long iterations = 0;
};

namespace detail {

inline void normalize_or_uniform(std::span<const double> weights, std::vector<double>& out) {
  const std::size_t n = weights.size();
  out.resize(n);
  double sum = 0.0;
  for (double w : weights) sum += w;
  if (sum <= 0.0) {
    std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(n));
  } else {
    for (std::size_t i = 0; i < n; ++i) out[i] = weights[i] / sum;
  }
}

}  // namespace detail

namespace detail {

// Drop entries below a relative threshold and renormalize. Returns false when
// nothing was dropped (candidate would be identical).
inline bool purge_small(const std::vector<double>& in, double rel_threshold,
                        std::vector<double>& out) {
  double m = 0.0;
  for (double v : in) m = std::max(m, v);
  const double cut = rel_threshold * m;
  out.resize(in.size());
  bool dropped = false;
  double sum = 0.0;
  for (std::size_t i = 0; i < in.size(); ++i) {
    out[i] = in[i] < cut ? 0.0 : in[i];
    dropped |= out[i] != in[i];
    sum += out[i];
  }
  if (!dropped || sum <= 0.0) return false;
  for (double& v : out) v /= sum;
  return true;
}

// Least squares min ||A z - b|| via normal equations and Gaussian elimination
// with partial pivoting. Returns false when the system is (near) singular.
inline bool solve_least_squares(int m, int n, const std::vector<double>& a,
                                const std::vector<double>& b, std::vector<double>& z) {
  std::vector<double> ata(static_cast<std::size_t>(n) * n, 0.0);
  std::vector<double> atb(n, 0.0);
  for (int r = 0; r < m; ++r) {
    for (int i = 0; i < n; ++i) {
      const double ari = a[static_cast<std::size_t>(r) * n + i];
      atb[i] += ari * b[r];
      for (int j = i; j < n; ++j)
        ata[static_cast<std::size_t>(i) * n + j] += ari * a[static_cast<std::size_t>(r) * n + j];
    }
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j)
      ata[static_cast<std::size_t>(i) * n + j] = ata[static_cast<std::size_t>(j) * n + i];

  double scale = 0.0;
  for (double v : ata) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return false;

  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(ata[static_cast<std::size_t>(r) * n + col]) >
          std::abs(ata[static_cast<std::size_t>(pivot) * n + col]))
        pivot = r;
    if (std::abs(ata[static_cast<std::size_t>(pivot) * n + col]) < 1e-13 * scale) return false;
    if (pivot != col) {
      for (int j = 0; j < n; ++j)
        std::swap(ata[static_cast<std::size_t>(pivot) * n + j],
                  ata[static_cast<std::size_t>(col) * n + j]);
      std::swap(atb[pivot], atb[col]);
    }
    for (int r = col + 1; r < n; ++r) {
      const double f =
          ata[static_cast<std::size_t>(r) * n + col] / ata[static_cast<std::size_t>(col) * n + col];
      if (f == 0.0) continue;
      for (int j = col; j < n; ++j)
        ata[static_cast<std::size_t>(r) * n + j] -= f * ata[static_cast<std::size_t>(col) * n + j];
      atb[r] -= f * atb[col];
    }
  }
  z.assign(n, 0.0);
  for (int i = n - 1; i >= 0; --i) {
    double s = atb[i];
    for (int j = i + 1; j < n; ++j) s -= ata[static_cast<std::size_t>(i) * n + j] * z[j];
    z[i] = s / ata[static_cast<std::size_t>(i) * n + i];
  }
  return true;
}

}  // namespace detail

// Solves min_x max_y x^T M y for an arbitrary real matrix by regret-matching+
// self-play with alternating updates and linearly weighted strategy averaging.
// Averaging restarts at geometric epochs so the initial transient washes out,
// and purged/last-iterate candidate pairs are also evaluated; every candidate
// is certified by its duality gap, so only the certificate matters. A gap of
// at most the tolerance means row_worst_case is within tolerance of the game
// value.
inline ZeroSumSolution solve_zero_sum(int rows, int cols, std::span<const double> m,
                                      double tolerance, long long max_iterations = 1'000'000) {
  if (rows <= 0 || cols <= 0 || m.size() != static_cast<std::size_t>(rows) * cols)
    throw std::invalid_argument("solve_zero_sum: bad matrix dimensions");
  if (!(tolerance > 0.0)) throw std::invalid_argument("solve_zero_sum: tolerance must be > 0");

  auto at = [&](int i, int j) { return m[static_cast<std::size_t>(i) * cols + j]; };

  std::vector<double> row_regret(rows, 0.0), col_regret(cols, 0.0);
  std::vector<double> x(rows, 1.0 / rows), y(cols, 1.0 / cols);
  std::vector<double> row_avg(rows, 0.0), col_avg(cols, 0.0);
  std::vector<double> col_payoff(cols, 0.0), row_cost(rows, 0.0);

  ZeroSumSolution best;
  best.gap = std::numeric_limits<double>::infinity();

  auto evaluate = [&](const std::vector<double>& xa, const std::vector<double>& ya,
                      long long t) {
    double upper = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < cols; ++j) {
      double v = 0.0;
      for (int i = 0; i < rows; ++i) v += xa[i] * at(i, j);
      upper = std::max(upper, v);
    }
    double lower = std::numeric_limits<double>::infinity();
    for (int i = 0; i < rows; ++i) {
      double v = 0.0;
      for (int j = 0; j < cols; ++j) v += ya[j] * at(i, j);
      lower = std::min(lower, v);
    }
    if (upper - lower < best.gap) {
      best.row_strategy = xa;
      best.col_strategy = ya;
      best.row_worst_case = upper;
      best.col_worst_case = lower;
      best.gap = upper - lower;
      best.iterations = t;
    }
  };

  const long long check_every = 64;
  long long epoch_begin = 1;
  long long next_restart = 512;
  std::vector<double> xa, ya, xp, yp;
  for (long long t = 1; t <= max_iterations; ++t) {
    detail::normalize_or_uniform(row_regret, x);

    // Column player update against the row player's current strategy.
    double col_baseline = 0.0;
    for (int j = 0; j < cols; ++j) {
      double v = 0.0;
      for (int i = 0; i < rows; ++i) v += x[i] * at(i, j);
      col_payoff[j] = v;
      col_baseline += y[j] * v;
    }
    for (int j = 0; j < cols; ++j)
      col_regret[j] = std::max(0.0, col_regret[j] + col_payoff[j] - col_baseline);
    detail::normalize_or_uniform(col_regret, y);

    // Row player update against the column player's new strategy.
    double row_baseline = 0.0;
    for (int i = 0; i < rows; ++i) {
      double v = 0.0;
      for (int j = 0; j < cols; ++j) v += y[j] * at(i, j);
      row_cost[i] = v;
      row_baseline += x[i] * v;
    }
    for (int i = 0; i < rows; ++i)
      row_regret[i] = std::max(0.0, row_regret[i] + row_baseline - row_cost[i]);

    const double w = static_cast<double>(t - epoch_begin + 1);
    for (int i = 0; i < rows; ++i) row_avg[i] += w * x[i];
    for (int j = 0; j < cols; ++j) col_avg[j] += w * y[j];

    // Exact polish: solve the indifference equations on the supports the
    // current best pair suggests. The result is only kept if the full-matrix
    // gap certifies it, so a wrong support guess is harmless.
    auto polish = [&](double threshold) {
      std::vector<int> rs, cs;
      double rmax = 0.0, cmax = 0.0;
      for (double v : best.row_strategy) rmax = std::max(rmax, v);
      for (double v : best.col_strategy) cmax = std::max(cmax, v);
      for (int i = 0; i < rows; ++i)
        if (best.row_strategy[i] > threshold * rmax) rs.push_back(i);
      for (int j = 0; j < cols; ++j)
        if (best.col_strategy[j] > threshold * cmax) cs.push_back(j);
      if (rs.empty() || cs.empty()) return;

      auto solve_side = [&](const std::vector<int>& support, const std::vector<int>& opponent,
                            bool row_side, std::vector<double>& strategy) {
        const int n = static_cast<int>(support.size()) + 1;  // weights plus game value
        const int m_rows = static_cast<int>(opponent.size()) + 1;
        std::vector<double> a(static_cast<std::size_t>(m_rows) * n, 0.0);
        std::vector<double> b(m_rows, 0.0);
        for (int r = 0; r < m_rows - 1; ++r) {
          for (int k = 0; k < n - 1; ++k)
            a[static_cast<std::size_t>(r) * n + k] =
                row_side ? at(support[k], opponent[r]) : at(opponent[r], support[k]);
          a[static_cast<std::size_t>(r) * n + (n - 1)] = -1.0;
        }
        for (int k = 0; k < n - 1; ++k)
          a[static_cast<std::size_t>(m_rows - 1) * n + k] = 1.0;
        b[m_rows - 1] = 1.0;
        std::vector<double> z;
        if (!detail::solve_least_squares(m_rows, n, a, b, z)) return false;
        strategy.assign(row_side ? rows : cols, 0.0);
        double sum = 0.0;
        for (int k = 0; k < n - 1; ++k) {
          if (z[k] < -1e-9) return false;  // support guess was wrong
          const double w = std::max(z[k], 0.0);
          strategy[support[k]] = w;
          sum += w;
        }
        if (sum <= 0.0) return false;
        for (double& v : strategy) v /= sum;
        return true;
      };

      std::vector<double> xq, yq;
      if (solve_side(rs, cs, true, xq) && solve_side(cs, rs, false, yq)) evaluate(xq, yq, t);
    };

    if (t % check_every == 0 || t == max_iterations) {
      detail::normalize_or_uniform(row_avg, xa);
      detail::normalize_or_uniform(col_avg, ya);
      evaluate(xa, ya, t);
      evaluate(x, y, t);
      for (double threshold : {1e-2, 1e-5, 1e-9}) {
        const bool px = detail::purge_small(xa, threshold, xp);
        const bool py = detail::purge_small(ya, threshold, yp);
        if (px || py) evaluate(px ? xp : xa, py ? yp : ya, t);
      }
      if (best.gap < 0.1)
        for (double threshold : {1e-6, 1e-3, 1e-1}) polish(threshold);
      if (best.gap <= tolerance) return best;
    }
    if (t == next_restart) {
      std::fill(row_avg.begin(), row_avg.end(), 0.0);
      std::fill(col_avg.begin(), col_avg.end(), 0.0);
      epoch_begin = t + 1;
      next_restart *= 4;
    }
  }
  std::ostringstream msg;
  msg << "solve_zero_sum: no certificate after " << max_iterations
      << " iterations; last exploitability " << best.gap;
  throw SolverFailure(msg.str(), best.gap);
}

// Regret matrix of a game: M[i][j] = max_k V(k, j) - V(i, j).
inline std::vector<double> regret_matrix(const PayoffGame& game) {
  std::vector<double> m(static_cast<std::size_t>(game.num_policies) * game.num_params);
  for (int j = 0; j < game.num_params; ++j) {
    const double cm = column_max(game, j);
    for (int i = 0; i < game.num_policies; ++i)
      m[static_cast<std::size_t>(i) * game.num_params + j] = cm - game.value(i, j);
  }
  return m;
}

struct MinimaxRegretResult {
  double worst_case_regret = 0.0;  // certified within tolerance of R*
  MixedStudent student;
  MixedTeacher adversary;  // regret-maximizing parameter mixture
  double certificate_gap = 0.0;
  long long iterations = 0;
};

// R* = min over students of the worst-case regret, solved as the zero-sum
// game on the regret matrix. The returned student's worst-case regret equals
// the reported value and is within tolerance of R* by the solver certificate.
inline MinimaxRegretResult minimax_regret_solve(const PayoffGame& game, double tolerance,
                                                long long max_iterations = 1'000'000) {
  game.validate();
  const auto m = regret_matrix(game);
  const auto sol = solve_zero_sum(game.num_policies, game.num_params, m, tolerance, max_iterations);
  MinimaxRegretResult out;
  out.student.probs = sol.row_strategy;
  out.adversary.probs = sol.col_strategy;
  out.worst_case_regret = worst_case_regret(game, out.student).value;
  out.certificate_gap = sol.gap;
  out.iterations = sol.iterations;
  return out;
}

// --- the four-policy counterexample family ----------------------------------

// 4 policies x (n+1) parameters with payoffs
//   pi_0: B on theta_0;  pi_1: B on theta_1;
//   pi_2: Bp+2e on theta_0 and Bp/2+e on theta_2..theta_n;
//   pi_3: Bp+2e on theta_1 and Bp/2+e on theta_2..theta_n.
// Mixing pi_0/pi_1 is minimax-regret optimal (R* = B/2) while pi_2/pi_3 earn
// more in expectation against a random parameter.
inline PayoffGame build_table1_game(double B, double p, double eps, int n) {
  if (!(B > 0.0)) throw std::invalid_argument("build_table1_game: B must be > 0");
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("build_table1_game: p must be in (0,1)");
  if (!(eps > 0.0 && eps < B * (1.0 - p) / 2.0))
    throw std::invalid_argument("build_table1_game: eps must be in (0, B(1-p)/2)");
  if (n < 2) throw std::invalid_argument("build_table1_game: n must be >= 2");

  PayoffGame g;
  g.num_policies = 4;
  g.num_params = n + 1;
  g.lower_bound = 0.0;
  g.upper_bound = B;
  g.values.assign(static_cast<std::size_t>(4) * (n + 1), 0.0);
  g.value(0, 0) = B;
  g.value(1, 1) = B;
  g.value(2, 0) = B * p + 2.0 * eps;
  g.value(3, 1) = B * p + 2.0 * eps;
  for (int j = 2; j <= n; ++j) {
    g.value(2, j) = B * p / 2.0 + eps;
    g.value(3, j) = B * p / 2.0 + eps;
  }
  g.validate();
  return g;
}

// The equilibrium profile of the dual game on build_table1_game: the student
// mixes pi_2/pi_3, the regret teacher mixes theta_0/theta_1, and the random
// teacher spreads uniformly over theta_2..theta_n (on theta_0/theta_1 its mass
// would raise pi_0/pi_1's expected value above pi_2/pi_3's for small n).
inline Profile table1_equilibrium_profile(const PayoffGame& game) {
  const int n_params = game.num_params;
  Profile prof;
  prof.student.probs.assign(game.num_policies, 0.0);
  prof.student.probs[2] = 0.5;
  prof.student.probs[3] = 0.5;
  prof.teacher1.probs.assign(n_params, 0.0);
  prof.teacher1.probs[0] = 0.5;
  prof.teacher1.probs[1] = 0.5;
  prof.teacher2.probs.assign(n_params, 0.0);
  for (int j = 2; j < n_params; ++j) prof.teacher2.probs[j] = 1.0 / (n_params - 2);
  return prof;
}

// --- approximation-bound verification ----------------------------------------

enum class BaseGameChoice { Joint, Teacher1, Teacher2 };

struct BoundCheck {
  double bound = 0.0;
  double measured = 0.0;
  bool ok = false;
};

// Max pointwise difference of the two teacher utilities over pure profiles.
inline double teacher_utility_diff_bound(const DualGameSpec& spec) {
  double b = 0.0;
  for (int i = 0; i < spec.base.num_policies; ++i) {
    const MixedStudent s = MixedStudent::pure(i, spec.base.num_policies);
    for (int j = 0; j < spec.base.num_params; ++j) {
      const double u1 = teacher_pure_utility(spec.teacher1, spec.base, s, j);
      const double u2 = teacher_pure_utility(spec.teacher2, spec.base, s, j);
      b = std::max(b, std::abs(u1 - u2));
    }
  }
  return b;
}

// Verifies that a certified equilibrium of the dual game, collapsed to the
// combined strategy p*theta1 + (1-p)*theta2, is an approximate equilibrium of
// the chosen two-player base game within 2Bp(1-p) / 2B(1-p) / 2Bp plus
// certification slack.
inline BoundCheck theorem1_bound_check(const DualGameSpec& spec, const Profile& profile,
                                       BaseGameChoice which, double certify_eps) {
  const NashGaps gaps = nash_gap(spec, profile);
  if (gaps.max_gap() > certify_eps)
    throw std::invalid_argument("theorem1_bound_check: profile is not a certified equilibrium");

  const PayoffGame& g = spec.base;
  const double p = spec.p;
  const double B = teacher_utility_diff_bound(spec);

  std::vector<double> combined(g.num_params, 0.0);
  for (int j = 0; j < g.num_params; ++j)
    combined[j] = p * profile.teacher1.probs[j] + (1.0 - p) * profile.teacher2.probs[j];

  // Student side of the base game.
  const int br = student_best_response(g, combined);
  const double student_gap = std::max(
      0.0, pure_value_on_mix(g, br, combined) - student_value_on_mix(g, profile.student, combined));

  // Teacher side under the chosen objective.
  auto teacher_value = [&](std::span<const double> mix) {
    double u1 = 0.0, u2 = 0.0;
    if (spec.teacher1.kind == ObjectiveKind::Uniform)
      u1 = spec.teacher1.uniform_constant;
    else
      u1 = expected_regret(g, profile.student, mix);
    if (spec.teacher2.kind == ObjectiveKind::Uniform)
      u2 = spec.teacher2.uniform_constant;
    else
      u2 = expected_regret(g, profile.student, mix);
    switch (which) {
      case BaseGameChoice::Joint: return p * u1 + (1.0 - p) * u2;
      case BaseGameChoice::Teacher1: return u1;
      case BaseGameChoice::Teacher2: return u2;
    }
    return 0.0;
  };

  double teacher_best = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < g.num_params; ++j) {
    std::vector<double> pure(g.num_params, 0.0);
    pure[j] = 1.0;
    teacher_best = std::max(teacher_best, teacher_value(pure));
  }
  const double teacher_gap = std::max(0.0, teacher_best - teacher_value(combined));

  BoundCheck out;
  switch (which) {
    case BaseGameChoice::Joint: out.bound = 2.0 * B * p * (1.0 - p); break;
    case BaseGameChoice::Teacher1: out.bound = 2.0 * B * (1.0 - p); break;
    case BaseGameChoice::Teacher2: out.bound = 2.0 * B * p; break;
  }
  out.measured = std::max(student_gap, teacher_gap);
  out.ok = out.measured <= out.bound + 2.0 * certify_eps + 1e-9;
  return out;
}

// --- equilibrium discovery ----------------------------------------------------

struct AlternatingBrResult {
  Profile profile;
  bool converged = false;
  int iterations = 0;
};

// Alternating pure best response from a random pure student. Converges only
// when a pure fixed point exists; callers certify the result with nash_gap.
// Ties break to the lowest index, so a Uniform-kind teacher settles on
// parameter 0.
inline AlternatingBrResult alternating_best_response(const DualGameSpec& spec, RngStream& rng,
                                                     int max_iterations = 200) {
  spec.validate();
  const PayoffGame& g = spec.base;
  int student = rng.uniform_int(g.num_policies);
  int t1 = 0, t2 = 0;

  AlternatingBrResult out;
  for (int it = 0; it < max_iterations; ++it) {
    const MixedStudent s = MixedStudent::pure(student, g.num_policies);
    const int nt1 = teacher_best_response(spec.teacher1, g, s);
    const int nt2 = teacher_best_response(spec.teacher2, g, s);

    std::vector<double> mix(g.num_params, 0.0);
    mix[nt1] += spec.p;
    mix[nt2] += 1.0 - spec.p;
    const int ns = student_best_response(g, mix);

    out.iterations = it + 1;
    if (ns == student && nt1 == t1 && nt2 == t2 && it > 0) {
      out.converged = true;
      break;
    }
    student = ns;
    t1 = nt1;
    t2 = nt2;
  }
  out.profile.student = MixedStudent::pure(student, g.num_policies);
  out.profile.teacher1 = MixedTeacher::pure(t1, g.num_params);
  out.profile.teacher2 = MixedTeacher::pure(t2, g.num_params);
  return out;
}

// Constructs an equilibrium of the dual game by reduction to a zero-sum
// matrix game. Maximizing expected value and minimizing expected regret have
// the same best responses (they differ by a term independent of the policy),
// so Regret/Regret games reduce to the regret matrix M, and Regret/Uniform
// games to A[i][j] = p*M[i][j] - (1-p)*u_i with u_i the policy's mean value,
// a row-wise shift that also preserves the teacher's best responses. Callers
// certify the result with nash_gap.
inline Profile construct_equilibrium(const DualGameSpec& spec, double tolerance,
                                     long long max_iterations = 1'000'000) {
  spec.validate();
  const PayoffGame& g = spec.base;
  const int np = g.num_policies;
  const int nq = g.num_params;
  const bool r1 = spec.teacher1.kind == ObjectiveKind::Regret;
  const bool r2 = spec.teacher2.kind == ObjectiveKind::Regret;

  Profile prof;
  if (!r1 && !r2) {
    prof.teacher1 = MixedTeacher::uniform(nq);
    prof.teacher2 = MixedTeacher::uniform(nq);
    prof.student = MixedStudent::pure(student_best_response(g, prof.teacher1.probs), np);
    return prof;
  }

  const auto m = regret_matrix(g);
  if (r1 && r2) {
    const auto sol = solve_zero_sum(np, nq, m, tolerance, max_iterations);
    prof.student.probs = sol.row_strategy;
    prof.teacher1.probs = sol.col_strategy;
    prof.teacher2.probs = sol.col_strategy;
    return prof;
  }

  // One regret teacher, one uniform teacher: the regret teacher's weight is
  // the probability its game is played.
  const double w = r1 ? spec.p : 1.0 - spec.p;
  std::vector<double> mean_value(np, 0.0);
  for (int i = 0; i < np; ++i) {
    double u = 0.0;
    for (int j = 0; j < nq; ++j) u += g.value(i, j);
    mean_value[i] = u / nq;
  }
  std::vector<double> a(static_cast<std::size_t>(np) * nq);
  for (int i = 0; i < np; ++i)
    for (int j = 0; j < nq; ++j)
      a[static_cast<std::size_t>(i) * nq + j] =
          w * m[static_cast<std::size_t>(i) * nq + j] - (1.0 - w) * mean_value[i];

  const auto sol = solve_zero_sum(np, nq, a, tolerance, max_iterations);
  prof.student.probs = sol.row_strategy;
  if (r1) {
    prof.teacher1.probs = sol.col_strategy;
    prof.teacher2 = MixedTeacher::uniform(nq);
  } else {
    prof.teacher1 = MixedTeacher::uniform(nq);
    prof.teacher2.probs = sol.col_strategy;
  }
  return prof;
}

// Random game with payoffs uniform in [0, 1]; dimensions drawn in
// [2, max_policies] x [2, max_params].
inline PayoffGame random_payoff_game(RngStream& rng, int max_policies = 5, int max_params = 5) {
  PayoffGame g;
  g.num_policies = 2 + rng.uniform_int(std::max(1, max_policies - 1));
  g.num_params = 2 + rng.uniform_int(std::max(1, max_params - 1));
  g.lower_bound = 0.0;
  g.upper_bound = 1.0;
  g.values.resize(static_cast<std::size_t>(g.num_policies) * g.num_params);
  for (double& v : g.values) v = rng.uniform();
  return g;
}

// --- serialization ------------------------------------------------------------

// Text matrix format: "num_policies num_params B- B+" then one row of
// payoffs per policy.
inline std::string format_payoff_game(const PayoffGame& game) {
  std::ostringstream os;
  os.precision(17);
  os << game.num_policies << ' ' << game.num_params << ' ' << game.lower_bound << ' '
     << game.upper_bound << '\n';
  for (int i = 0; i < game.num_policies; ++i) {
    for (int j = 0; j < game.num_params; ++j) {
      if (j) os << ' ';
      os << game.value(i, j);
    }
    os << '\n';
  }
  return os.str();
}

inline PayoffGame parse_payoff_game(std::istream& in) {
  PayoffGame g;
  if (!(in >> g.num_policies >> g.num_params >> g.lower_bound >> g.upper_bound))
    throw std::invalid_argument("parse_payoff_game: bad header");
  if (g.num_policies <= 0 || g.num_params <= 0)
    throw std::invalid_argument("parse_payoff_game: dimensions must be positive");
  g.values.resize(static_cast<std::size_t>(g.num_policies) * g.num_params);
  for (double& v : g.values)
    if (!(in >> v)) throw std::invalid_argument("parse_payoff_game: missing payoff entry");
  g.validate();
  return g;
}

inline PayoffGame parse_payoff_game(const std::string& text) {
  std::istringstream is(text);
  return parse_payoff_game(is);
}

}  // namespace dcd
