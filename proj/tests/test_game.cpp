#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>
#include <vector>

#include "dcd/game.hpp"

using namespace dcd;

namespace {

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

PayoffGame make_game(int np, int nq, std::vector<double> values, double lo = 0.0,
                     double hi = 1.0) {
  PayoffGame g{np, nq, std::move(values), lo, hi};
  g.validate();
  return g;
}

// Brute-force reference: max over pure policies on one column minus the
// student's expected value there.
double regret_oracle(const PayoffGame& g, const std::vector<double>& student, int j) {
  double best = -1e300, mine = 0.0;
  for (int i = 0; i < g.num_policies; ++i) {
    best = std::max(best, g.value(i, j));
    mine += student[i] * g.value(i, j);
  }
  return best - mine;
}

PayoffGame table1() { return build_table1_game(1.0, 0.5, 0.1, 2); }

MixedStudent half_half(int a, int b, int n) {
  MixedStudent s;
  s.probs.assign(n, 0.0);
  s.probs[a] = 0.5;
  s.probs[b] = 0.5;
  return s;
}

}  // namespace

TEST_CASE("regret on pure-optimal student is zero", "[game]") {
  const PayoffGame g = make_game(2, 2, {1, 0, 0, 1});
  REQUIRE(regret(g, MixedStudent::pure(0, 2), 0) == 0.0);
}

TEST_CASE("regret of the off policy equals the payoff gap", "[game]") {
  const PayoffGame g = make_game(2, 2, {1, 0, 0, 1});
  REQUIRE(regret(g, MixedStudent::pure(0, 2), 1) == 1.0);
}

TEST_CASE("regret on the counterexample game matches the closed form", "[game]") {
  const PayoffGame g = table1();
  const MixedStudent s = half_half(2, 3, 4);
  const double r = regret(g, s, 0);
  REQUIRE(near(r, 0.65, 1e-12));
  REQUIRE(near(r, regret_oracle(g, s.probs, 0), 1e-15));
}

TEST_CASE("regret rejects bad input", "[game]") {
  const PayoffGame g = make_game(2, 2, {1, 0, 0, 1});
  MixedStudent wrong;
  wrong.probs = {0.5, 0.25, 0.25};
  REQUIRE_THROWS_AS(regret(g, wrong, 0), std::invalid_argument);
  REQUIRE_THROWS_AS(regret(g, MixedStudent::pure(0, 2), 5), std::invalid_argument);
}

TEST_CASE("worst_case_regret over a single parameter equals regret", "[game]") {
  const PayoffGame g = make_game(2, 1, {0.3, 0.9});
  const MixedStudent s = MixedStudent::uniform(2);
  const auto wcr = worst_case_regret(g, s);
  REQUIRE(wcr.value == regret(g, s, 0));
  REQUIRE(wcr.param_index == 0);
}

TEST_CASE("worst_case_regret of the minimax mix on the counterexample", "[game]") {
  const PayoffGame g = table1();
  const auto wcr = worst_case_regret(g, half_half(0, 1, 4));
  REQUIRE(near(wcr.value, 0.5, 1e-12));
  REQUIRE(wcr.param_index == 0);  // theta_0 and theta_1 tie; lowest index wins
  REQUIRE(near(regret(g, half_half(0, 1, 4), 2), 0.35, 1e-12));

  const auto wcr23 = worst_case_regret(g, half_half(2, 3, 4));
  REQUIRE(near(wcr23.value, 0.65, 1e-12));
}

TEST_CASE("teacher_utility", "[game]") {
  const PayoffGame g = table1();
  const MixedStudent s = half_half(2, 3, 4);
  SECTION("uniform kind is the constant") {
    REQUIRE(teacher_utility(TeacherObjective::uniform(), g, s, MixedTeacher::uniform(3)) == 0.0);
    REQUIRE(teacher_utility(TeacherObjective::uniform(2.5), g, s, MixedTeacher::pure(1, 3)) ==
            2.5);
  }
  SECTION("regret kind on a pure teacher equals the regret op") {
    REQUIRE(near(teacher_utility(TeacherObjective::regret(), g, s, MixedTeacher::pure(0, 3)),
                 0.65, 1e-12));
  }
  SECTION("dominant student leaves no regret anywhere") {
    const PayoffGame dom = make_game(2, 2, {1, 1, 0, 0});
    REQUIRE(teacher_utility(TeacherObjective::regret(), dom, MixedStudent::pure(0, 2),
                            MixedTeacher::uniform(2)) == 0.0);
  }
}

TEST_CASE("dual_utilities", "[game]") {
  SECTION("p = 0 zeroes the first teacher") {
    DualGameSpec spec{make_game(2, 2, {1, 0, 0, 1}), TeacherObjective::regret(),
                      TeacherObjective::regret(), 0.0};
    Profile prof{MixedStudent::uniform(2), MixedTeacher::uniform(2), MixedTeacher::uniform(2)};
    REQUIRE(dual_utilities(spec, prof).teacher1 == 0.0);
  }
  SECTION("student utility mixes the two teachers") {
    DualGameSpec spec{make_game(1, 2, {0.2, 0.6}), TeacherObjective::uniform(),
                      TeacherObjective::uniform(), 0.5};
    Profile prof{MixedStudent::pure(0, 1), MixedTeacher::pure(0, 2), MixedTeacher::pure(1, 2)};
    REQUIRE(near(dual_utilities(spec, prof).student, 0.4, 1e-15));
  }
  SECTION("counterexample equilibrium teacher-1 utility") {
    const PayoffGame g = table1();
    DualGameSpec spec{g, TeacherObjective::regret(), TeacherObjective::uniform(), 0.5};
    const Profile prof = table1_equilibrium_profile(g);
    REQUIRE(near(dual_utilities(spec, prof).teacher1, 0.5 * 0.65, 1e-12));
  }
}

TEST_CASE("nash_gap is zero when everyone best-responds", "[game]") {
  const PayoffGame dom = make_game(2, 2, {1, 1, 0, 0});  // policy 0 dominates
  DualGameSpec spec{dom, TeacherObjective::regret(), TeacherObjective::uniform(), 0.5};
  Profile prof{MixedStudent::pure(0, 2), MixedTeacher::pure(0, 2), MixedTeacher::pure(0, 2)};
  const auto gaps = nash_gap(spec, prof);
  REQUIRE(gaps.student == 0.0);
  REQUIRE(gaps.teacher1 == 0.0);
  REQUIRE(gaps.teacher2 == 0.0);
}

TEST_CASE("counterexample equilibrium certifies exactly", "[game]") {
  const PayoffGame g = table1();
  DualGameSpec spec{g, TeacherObjective::regret(), TeacherObjective::uniform(), 0.5};
  const auto gaps = nash_gap(spec, table1_equilibrium_profile(g));
  REQUIRE(gaps.max_gap() <= 1e-9);
}

TEST_CASE("uniform support over all parameters breaks the n=2 equilibrium", "[game]") {
  // With mass on theta_0/theta_1 the random branch pays pi_0 a share of B, so
  // pi_0 earns 0.25 + 1/6 against the profile mixture while pi_2/pi_3 earn
  // 0.35: the student gains exactly 1/15 by deviating.
  const PayoffGame g = table1();
  DualGameSpec spec{g, TeacherObjective::regret(), TeacherObjective::uniform(), 0.5};
  Profile prof = table1_equilibrium_profile(g);
  prof.teacher2 = MixedTeacher::uniform(3);
  const auto gaps = nash_gap(spec, prof);
  REQUIRE(near(gaps.student, 1.0 / 15.0, 1e-12));
}

TEST_CASE("nash_gap student deviation on identity payoffs", "[game]") {
  DualGameSpec spec{make_game(2, 2, {1, 0, 0, 1}), TeacherObjective::regret(),
                    TeacherObjective::uniform(), 1.0};
  Profile prof{MixedStudent::pure(0, 2), MixedTeacher::pure(1, 2), MixedTeacher::uniform(2)};
  REQUIRE(nash_gap(spec, prof).student == 1.0);
}

TEST_CASE("minimax_regret_solve", "[game]") {
  SECTION("dominant policy gives zero minimax regret") {
    const PayoffGame dom = make_game(2, 2, {1, 1, 0.2, 0.0});
    const auto mm = minimax_regret_solve(dom, 1e-9);
    REQUIRE(mm.worst_case_regret <= 1e-9);
  }
  SECTION("counterexample value is B/2 on the pi_0/pi_1 mix") {
    const auto mm = minimax_regret_solve(table1(), 1e-7);
    REQUIRE(near(mm.worst_case_regret, 0.5, 1e-6));
    REQUIRE(near(mm.student.probs[0], 0.5, 1e-5));
    REQUIRE(near(mm.student.probs[1], 0.5, 1e-5));
  }
  SECTION("identity payoffs need the uniform mix") {
    const auto mm = minimax_regret_solve(make_game(2, 2, {1, 0, 0, 1}), 1e-9);
    REQUIRE(near(mm.worst_case_regret, 0.5, 1e-9));
    REQUIRE(near(mm.student.probs[0], 0.5, 1e-8));
  }
  SECTION("iteration cap failure reports the last exploitability") {
    try {
      minimax_regret_solve(make_game(2, 2, {1, 0, 0, 1}), 1e-18, 3);
      FAIL("expected SolverFailure");
    } catch (const SolverFailure& e) {
      REQUIRE(e.last_exploitability > 0.0);
    }
  }
}

TEST_CASE("build_table1_game entries and bounds", "[game]") {
  const PayoffGame g = table1();
  REQUIRE(g.num_policies == 4);
  REQUIRE(g.num_params == 3);
  REQUIRE(near(g.value(2, 0), 0.7, 1e-15));   // Bp + 2eps
  REQUIRE(near(g.value(2, 2), 0.35, 1e-15));  // Bp/2 + eps
  REQUIRE(g.value(0, 1) == 0.0);
  REQUIRE(g.lower_bound == 0.0);
  REQUIRE(g.upper_bound == 1.0);

  REQUIRE_THROWS_AS(build_table1_game(1.0, 0.5, 0.3, 2), std::invalid_argument);  // eps too big
  REQUIRE_THROWS_AS(build_table1_game(1.0, 1.0, 0.1, 2), std::invalid_argument);
  REQUIRE_THROWS_AS(build_table1_game(1.0, 0.5, 0.1, 1), std::invalid_argument);
  REQUIRE_THROWS_AS(build_table1_game(-1.0, 0.5, 0.1, 2), std::invalid_argument);
}

TEST_CASE("theorem1_bound_check", "[game]") {
  const PayoffGame g = table1();
  DualGameSpec spec{g, TeacherObjective::regret(), TeacherObjective::uniform(), 0.5};
  const Profile prof = table1_equilibrium_profile(g);

  SECTION("bounds use the pointwise teacher-utility difference") {
    // Max regret entry of the counterexample is B = 1, giving 2Bp(1-p) = 0.5.
    const auto joint = theorem1_bound_check(spec, prof, BaseGameChoice::Joint, 1e-9);
    REQUIRE(near(joint.bound, 0.5, 1e-12));
    REQUIRE(joint.ok);
    REQUIRE(theorem1_bound_check(spec, prof, BaseGameChoice::Teacher1, 1e-9).ok);
    REQUIRE(theorem1_bound_check(spec, prof, BaseGameChoice::Teacher2, 1e-9).ok);
  }
  SECTION("p = 0 collapses the teacher-2 bound to zero") {
    DualGameSpec spec0{g, TeacherObjective::regret(), TeacherObjective::uniform(), 0.0};
    const Profile prof0 = construct_equilibrium(spec0, 1e-10);
    REQUIRE(nash_gap(spec0, prof0).max_gap() <= 1e-9);
    const auto check = theorem1_bound_check(spec0, prof0, BaseGameChoice::Teacher2, 1e-9);
    REQUIRE(check.bound == 0.0);
    REQUIRE(check.ok);
  }
  SECTION("uncertified profiles are rejected") {
    Profile bad = prof;
    bad.student = MixedStudent::pure(0, 4);
    REQUIRE_THROWS_AS(theorem1_bound_check(spec, bad, BaseGameChoice::Joint, 1e-12),
                      std::invalid_argument);
  }
}

TEST_CASE("alternating best response certifies on solvable games", "[game]") {
  const PayoffGame dom = make_game(3, 3, {0.9, 0.8, 0.7, 0.1, 0.0, 0.2, 0.4, 0.3, 0.1});
  DualGameSpec spec{dom, TeacherObjective::regret(), TeacherObjective::uniform(), 0.5};
  RngStream rng(11);
  const auto result = alternating_best_response(spec, rng);
  REQUIRE(result.converged);
  REQUIRE(nash_gap(spec, result.profile).max_gap() <= 1e-12);
}

TEST_CASE("regret is nonnegative and bounded by the payoff range", "[game][property]") {
  RngStream rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const PayoffGame g = random_payoff_game(rng, 6, 6);
    MixedStudent s;
    s.probs.assign(g.num_policies, 0.0);
    double sum = 0.0;
    for (double& p : s.probs) {
      p = rng.uniform();
      sum += p;
    }
    for (double& p : s.probs) p /= sum;
    for (int j = 0; j < g.num_params; ++j) {
      const double r = regret(g, s, j);
      REQUIRE(r >= -1e-12);
      REQUIRE(r <= g.bound_range() + 1e-12);
    }
  }
}

TEST_CASE("regret quantities are translation invariant", "[game][property]") {
  RngStream rng(99);
  for (int trial = 0; trial < 25; ++trial) {
    const PayoffGame g = random_payoff_game(rng);
    PayoffGame shifted = g;
    const double c = -3.0 + 6.0 * rng.uniform();
    for (double& v : shifted.values) v += c;
    shifted.lower_bound += c;
    shifted.upper_bound += c;

    MixedStudent s = MixedStudent::uniform(g.num_policies);
    for (int j = 0; j < g.num_params; ++j)
      REQUIRE(near(regret(g, s, j), regret(shifted, s, j), 1e-9));
    REQUIRE(near(worst_case_regret(g, s).value, worst_case_regret(shifted, s).value, 1e-9));
    REQUIRE(near(minimax_regret_solve(g, 1e-8).worst_case_regret,
                 minimax_regret_solve(shifted, 1e-8).worst_case_regret, 1e-7));
  }
}

TEST_CASE("certified equilibria satisfy all three base-game bounds", "[game][property]") {
  RngStream rng(7);
  const TeacherObjective kinds[3][2] = {
      {TeacherObjective::regret(), TeacherObjective::uniform()},
      {TeacherObjective::regret(), TeacherObjective::regret()},
      {TeacherObjective::uniform(), TeacherObjective::uniform()}};
  int certified = 0;
  for (int trial = 0; trial < 60; ++trial) {
    DualGameSpec spec;
    spec.base = random_payoff_game(rng);
    spec.teacher1 = kinds[trial % 3][0];
    spec.teacher2 = kinds[trial % 3][1];
    spec.p = 0.1 + 0.8 * rng.uniform();
    const Profile prof = construct_equilibrium(spec, 1e-10);
    if (nash_gap(spec, prof).max_gap() > 1e-8) continue;
    ++certified;
    for (auto which : {BaseGameChoice::Joint, BaseGameChoice::Teacher1, BaseGameChoice::Teacher2})
      REQUIRE(theorem1_bound_check(spec, prof, which, 1e-8).ok);
  }
  REQUIRE(certified >= 55);  // the construction should almost always certify
}

TEST_CASE("regret-regret equilibria reach the minimax regret value", "[game][property]") {
  RngStream rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    DualGameSpec spec;
    spec.base = random_payoff_game(rng);
    spec.teacher1 = TeacherObjective::regret();
    spec.teacher2 = TeacherObjective::regret();
    spec.p = 0.1 + 0.8 * rng.uniform();
    const Profile prof = construct_equilibrium(spec, 1e-10);
    REQUIRE(nash_gap(spec, prof).max_gap() <= 1e-8);
    const auto mm = minimax_regret_solve(spec.base, 1e-9);
    REQUIRE(near(worst_case_regret(spec.base, prof.student).value, mm.worst_case_regret,
                 1e-6 + 2e-8));
  }
}

TEST_CASE("counterexample regret gap over the optimum is exact", "[game][property]") {
  RngStream rng(55);
  for (int trial = 0; trial < 20; ++trial) {
    const double B = 0.5 + 2.0 * rng.uniform();
    const double p = 0.1 + 0.8 * rng.uniform();
    const double eps = (0.1 + 0.8 * rng.uniform()) * B * (1.0 - p) / 2.0;
    const int n = 2 + rng.uniform_int(4);
    const PayoffGame g = build_table1_game(B, p, eps, n);
    const double wcr = worst_case_regret(g, table1_equilibrium_profile(g).student).value;
    REQUIRE(near(wcr - B / 2.0, B * (1.0 - p) / 2.0 - eps, 1e-12));
  }
}

TEST_CASE("solver exploitability respects the requested tolerance", "[game][property]") {
  RngStream rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    const PayoffGame g = random_payoff_game(rng);
    const auto mm = minimax_regret_solve(g, 1e-6);
    REQUIRE(mm.certificate_gap <= 1e-6);
    REQUIRE(worst_case_regret(g, mm.student).value <= mm.worst_case_regret + 1e-12);
  }
}

TEST_CASE("payoff game text round trip", "[game]") {
  const PayoffGame g = table1();
  const PayoffGame back = parse_payoff_game(format_payoff_game(g));
  REQUIRE(back.num_policies == g.num_policies);
  REQUIRE(back.num_params == g.num_params);
  REQUIRE(back.values == g.values);
  REQUIRE(back.lower_bound == g.lower_bound);
  REQUIRE(back.upper_bound == g.upper_bound);
}

TEST_CASE("payoff game parser rejects malformed input", "[game]") {
  REQUIRE_THROWS_AS(parse_payoff_game("2 2 0"), std::invalid_argument);           // short header
  REQUIRE_THROWS_AS(parse_payoff_game("2 2 0 1\n1 0 0"), std::invalid_argument);  // missing entry
  REQUIRE_THROWS_AS(parse_payoff_game("1 1 0 1\n2"), std::invalid_argument);      // out of bounds
  REQUIRE_THROWS_AS(parse_payoff_game("0 2 0 1\n"), std::invalid_argument);       // bad dims
}
