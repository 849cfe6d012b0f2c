#pragma once

// Executable surface: run configuration with flags > file > defaults
// precedence, the train/eval/game/report subcommands, and the artifact
// formats they exchange.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dcd/game.hpp"
#include "dcd/teachers.hpp"

namespace dcd {

class FileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  DcdConfig dcd;
  std::vector<std::string> suites = {"rooms", "spiral", "perfectmaze", "corridor"};
  int suite_size = 8;
  int suite_levels = 8;
  int attempts = 1;
  std::string suite_manifest;
  std::string output_dir = "dcd-out";
  long long checkpoint_interval = 0;  // 0: follow eval-interval
  std::string checkpoint;             // eval subcommand input

  void validate() const {
    dcd.validate();
    if (suite_size <= 0) throw ConfigError("suite-size must be positive");
    if (suite_levels <= 0) throw ConfigError("suite-levels must be positive");
    if (attempts <= 0) throw ConfigError("attempts must be positive");
    if (checkpoint_interval < 0) throw ConfigError("checkpoint-interval must be >= 0");
    if (output_dir.empty()) throw ConfigError("outdir must not be empty");
  }
};

// --- flag parsing ------------------------------------------------------------------

struct ParseOutcome {
  RunConfig config;
  bool help_requested = false;
  std::string help_text;
};

// Flags override config-file entries, which override defaults. Unknown flags
// or file keys are errors.
inline ParseOutcome parse_run_config(const std::vector<std::string>& args) {
  ParseOutcome out;
  RunConfig& cfg = out.config;

  CLI::App app{"dual curriculum design laboratory"};
  app.set_config("--config", "", "config file with key=value lines");
  app.allow_config_extras(false);

  const std::map<std::string, Algorithm> alg_map{
      {"dr", Algorithm::DR},           {"plr", Algorithm::PLR},
      {"robust-plr", Algorithm::RobustPLR}, {"paired", Algorithm::PAIRED},
      {"repaired", Algorithm::REPAIRED},    {"minimax", Algorithm::Minimax}};
  const std::map<std::string, Scoring> scoring_map{
      {"positive-value-loss", Scoring::PositiveValueLoss},
      {"max-mc", Scoring::MaxMC},
      {"true-regret", Scoring::TrueRegret}};
  const std::map<std::string, Prioritization> prio_map{
      {"rank", Prioritization::Rank}, {"proportional", Prioritization::Proportional}};
  const std::map<std::string, MaxMcVariant> variant_map{{"per-step", MaxMcVariant::PerStep},
                                                        {"s0", MaxMcVariant::S0}};
  const std::map<std::string, bool> eval_mode_map{{"greedy", true}, {"stochastic", false}};

  app.add_option("--algorithm", cfg.dcd.algorithm, "training loop")
      ->transform(CLI::CheckedTransformer(alg_map, CLI::ignore_case));
  app.add_option("--replay-rate", cfg.dcd.replay.replay_rate, "replay decision probability p")
      ->check(CLI::Range(0.0, 1.0));
  app.add_option("--buffer-size", cfg.dcd.buffer_size, "level buffer capacity K")
      ->check(CLI::PositiveNumber);
  app.add_option("--temperature", cfg.dcd.replay.temperature, "prioritization temperature beta")
      ->check(CLI::PositiveNumber);
  app.add_option("--staleness", cfg.dcd.replay.staleness_coef, "staleness coefficient rho")
      ->check(CLI::Range(0.0, 1.0));
  app.add_option("--scoring", cfg.dcd.replay.scoring, "level scoring function")
      ->transform(CLI::CheckedTransformer(scoring_map, CLI::ignore_case));
  app.add_option("--prioritization", cfg.dcd.replay.prioritization, "replay prioritization")
      ->transform(CLI::CheckedTransformer(prio_map, CLI::ignore_case));
  app.add_option("--max-mc-variant", cfg.dcd.replay.max_mc_variant, "MaxMC estimator variant")
      ->transform(CLI::CheckedTransformer(variant_map, CLI::ignore_case));
  double gamma = cfg.dcd.gae.gamma;
  app.add_option("--gamma", gamma, "discount factor")->check(CLI::Range(1e-9, 1.0));
  app.add_option("--gae-lambda", cfg.dcd.gae.lambda, "GAE lambda")->check(CLI::Range(0.0, 1.0));
  app.add_option("--budget", cfg.dcd.budget, "episode budget")->check(CLI::PositiveNumber);
  app.add_option("--seed", cfg.dcd.seed, "root random seed");
  app.add_option("--eval-interval", cfg.dcd.eval_interval, "episodes between evaluations")
      ->check(CLI::PositiveNumber);
  app.add_option("--grid-width", cfg.dcd.grid_width)->check(CLI::PositiveNumber);
  app.add_option("--grid-height", cfg.dcd.grid_height)->check(CLI::PositiveNumber);
  app.add_option("--block-budget", cfg.dcd.block_budget)->check(CLI::NonNegativeNumber);
  app.add_option("--t-max", cfg.dcd.env.t_max, "episode step budget")->check(CLI::PositiveNumber);
  app.add_option("--student-lr", cfg.dcd.student_lr)->check(CLI::PositiveNumber);
  app.add_option("--value-lr", cfg.dcd.value_lr)->check(CLI::PositiveNumber);
  app.add_option("--generator-lr", cfg.dcd.generator_lr)->check(CLI::PositiveNumber);
  app.add_option("--generator-entropy", cfg.dcd.generator_entropy_coef)
      ->check(CLI::NonNegativeNumber);
  app.add_option("--eval-mode", cfg.dcd.eval_greedy, "greedy or stochastic evaluation")
      ->transform(CLI::CheckedTransformer(eval_mode_map, CLI::ignore_case));
  app.add_option("--suites", cfg.suites, "held-out suite names")->delimiter(',');
  app.add_option("--suite-size", cfg.suite_size)->check(CLI::PositiveNumber);
  app.add_option("--suite-levels", cfg.suite_levels)->check(CLI::PositiveNumber);
  app.add_option("--attempts", cfg.attempts, "evaluation attempts per level")
      ->check(CLI::PositiveNumber);
  app.add_option("--suite-manifest", cfg.suite_manifest, "suite manifest file");
  app.add_option("--outdir", cfg.output_dir, "artifact output directory");
  app.add_option("--checkpoint-interval", cfg.checkpoint_interval)->check(CLI::NonNegativeNumber);
  app.add_option("--checkpoint", cfg.checkpoint, "checkpoint tables file (eval)");

  std::vector<const char*> argv;
  argv.push_back("dcd");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out.help_requested = true;
    out.help_text = app.help();
    return out;
  } catch (const CLI::ParseError& e) {
    throw ConfigError(e.what());
  }

  cfg.dcd.gae.gamma = gamma;
  cfg.dcd.env.gamma = gamma;
  cfg.validate();
  return out;
}

inline std::map<std::string, std::string> flat_config_map(const RunConfig& cfg) {
  std::map<std::string, std::string> m;
  m["algorithm"] = algorithm_name(cfg.dcd.algorithm);
  m["replay-rate"] = format_double(cfg.dcd.replay.replay_rate);
  m["buffer-size"] = std::to_string(cfg.dcd.buffer_size);
  m["temperature"] = format_double(cfg.dcd.replay.temperature);
  m["staleness"] = format_double(cfg.dcd.replay.staleness_coef);
  m["scoring"] = cfg.dcd.replay.scoring == Scoring::PositiveValueLoss ? "positive-value-loss"
                 : cfg.dcd.replay.scoring == Scoring::MaxMC           ? "max-mc"
                                                                      : "true-regret";
  m["prioritization"] =
      cfg.dcd.replay.prioritization == Prioritization::Rank ? "rank" : "proportional";
  m["max-mc-variant"] = cfg.dcd.replay.max_mc_variant == MaxMcVariant::PerStep ? "per-step" : "s0";
  m["gamma"] = format_double(cfg.dcd.gae.gamma);
  m["gae-lambda"] = format_double(cfg.dcd.gae.lambda);
  m["budget"] = std::to_string(cfg.dcd.budget);
  m["seed"] = std::to_string(cfg.dcd.seed);
  m["eval-interval"] = std::to_string(cfg.dcd.eval_interval);
  m["grid-width"] = std::to_string(cfg.dcd.grid_width);
  m["grid-height"] = std::to_string(cfg.dcd.grid_height);
  m["block-budget"] = std::to_string(cfg.dcd.block_budget);
  m["t-max"] = std::to_string(cfg.dcd.env.t_max);
  m["student-lr"] = format_double(cfg.dcd.student_lr);
  m["value-lr"] = format_double(cfg.dcd.value_lr);
  m["generator-lr"] = format_double(cfg.dcd.generator_lr);
  m["generator-entropy"] = format_double(cfg.dcd.generator_entropy_coef);
  m["eval-mode"] = cfg.dcd.eval_greedy ? "greedy" : "stochastic";
  std::string joined;
  for (const auto& s : cfg.suites) joined += (joined.empty() ? "" : ",") + s;
  m["suites"] = joined;
  m["suite-size"] = std::to_string(cfg.suite_size);
  m["suite-levels"] = std::to_string(cfg.suite_levels);
  m["attempts"] = std::to_string(cfg.attempts);
  return m;
}

// --- suites -------------------------------------------------------------------------

inline std::vector<EvalSuite> build_suites_from_names(const RunConfig& cfg) {
  std::vector<EvalSuite> suites;
  for (const auto& name : cfg.suites) {
    const auto kind = suite_kind_from_name(name);
    if (!kind) throw ConfigError("unknown suite name: " + name);
    suites.push_back(
        build_test_suite(*kind, cfg.suite_size, cfg.dcd.seed, cfg.suite_levels, cfg.attempts));
  }
  return suites;
}

// Manifest lines: either "procedural <name> <kind> <size> <seed> <count>" or
// "levels <name>" followed by encoded level blocks and a terminating "end".
inline std::vector<EvalSuite> parse_suite_manifest(std::istream& in, int attempts) {
  std::vector<EvalSuite> suites;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "procedural") {
      std::string name, kind_name;
      int size = 0, count = 0;
      std::uint64_t seed = 0;
      if (!(ls >> name >> kind_name >> size >> seed >> count))
        throw ConfigError("suite manifest: bad procedural line: " + line);
      const auto kind = suite_kind_from_name(kind_name);
      if (!kind) throw ConfigError("suite manifest: unknown kind: " + kind_name);
      EvalSuite suite = build_test_suite(*kind, size, seed, count, attempts);
      suite.name = name;
      suites.push_back(std::move(suite));
    } else if (tag == "levels") {
      std::string name;
      if (!(ls >> name)) throw ConfigError("suite manifest: levels line needs a name");
      EvalSuite suite;
      suite.name = name;
      suite.attempts_per_level = attempts;
      while (true) {
        const auto pos = in.tellg();
        if (!std::getline(in, line)) throw ConfigError("suite manifest: missing end marker");
        if (line == "end") break;
        in.seekg(pos);
        suite.levels.push_back(decode_level(in));
      }
      if (suite.levels.empty()) throw ConfigError("suite manifest: empty levels block");
      suites.push_back(std::move(suite));
    } else {
      throw ConfigError("suite manifest: unknown directive: " + tag);
    }
  }
  if (suites.empty()) throw ConfigError("suite manifest: no suites");
  return suites;
}

inline std::vector<EvalSuite> build_suites(const RunConfig& cfg) {
  if (cfg.suite_manifest.empty()) return build_suites_from_names(cfg);
  std::ifstream in(cfg.suite_manifest);
  if (!in) throw FileError("cannot open suite manifest: " + cfg.suite_manifest);
  return parse_suite_manifest(in, cfg.attempts);
}

// --- report json ----------------------------------------------------------------------

inline nlohmann::json report_to_json(const RunReport& report) {
  nlohmann::json j;
  j["schema_version"] = report.schema_version;
  j["config"] = report.config_echo;
  j["counters"] = {{"episodes", report.episodes},
                   {"student_updates", report.student_updates},
                   {"antagonist_updates", report.antagonist_updates},
                   {"generator_updates", report.generator_updates},
                   {"replay_episodes", report.replay_episodes},
                   {"generate_episodes", report.generate_episodes}};
  j["final_solved_rates"] = report.final_solved_rates;
  j["wall_clock_seconds"] = report.wall_clock_seconds;
  return j;
}

inline RunReport report_from_json(const nlohmann::json& j) {
  RunReport r;
  r.schema_version = j.at("schema_version").get<int>();
  if (r.schema_version != 1) throw ConfigError("unsupported report schema_version");
  for (const auto& [k, v] : j.at("config").items()) r.config_echo[k] = v.get<std::string>();
  const auto& c = j.at("counters");
  r.episodes = c.at("episodes").get<long long>();
  r.student_updates = c.at("student_updates").get<long long>();
  r.antagonist_updates = c.at("antagonist_updates").get<long long>();
  r.generator_updates = c.at("generator_updates").get<long long>();
  r.replay_episodes = c.at("replay_episodes").get<long long>();
  r.generate_episodes = c.at("generate_episodes").get<long long>();
  for (const auto& [k, v] : j.at("final_solved_rates").items())
    r.final_solved_rates[k] = v.get<double>();
  r.wall_clock_seconds = j.at("wall_clock_seconds").get<double>();
  return r;
}

// --- file helpers ----------------------------------------------------------------------

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FileError("cannot write " + path.string());
  out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// --- train / eval ------------------------------------------------------------------------

struct TrainArtifacts {
  RunOutcome outcome;
  std::filesystem::path report_path;
  std::filesystem::path metrics_path;
  std::filesystem::path checkpoint_path;
};

inline TrainArtifacts run_train(const RunConfig& cfg) {
  cfg.validate();
  const auto suites = build_suites(cfg);
  const std::filesystem::path outdir(cfg.output_dir);
  const long long ckpt_every =
      cfg.checkpoint_interval > 0 ? cfg.checkpoint_interval : cfg.dcd.eval_interval;

  CheckpointHook hook = [&](const CheckpointData& data) {
    if (data.episode % ckpt_every != 0 && data.episode != cfg.dcd.budget) return;
    const auto dir = outdir / "checkpoints" / ("ep" + std::to_string(data.episode));
    write_file(dir / "tables.txt", format_tables(data.policy, data.value));
    if (data.buffer) write_file(dir / "buffer.txt", format_buffer(*data.buffer, data.episode));
  };

  TrainArtifacts art;
  art.outcome = run_dcd(cfg.dcd, suites, hook);
  for (const auto& [k, v] : flat_config_map(cfg)) art.outcome.report.config_echo[k] = v;

  art.report_path = outdir / "report.json";
  art.metrics_path = outdir / "metrics.csv";
  art.checkpoint_path = outdir / "checkpoints" / "final" / "tables.txt";
  write_file(art.report_path, report_to_json(art.outcome.report).dump(2) + "\n");
  write_file(art.metrics_path, format_metrics_csv(art.outcome.report.rows));
  write_file(art.checkpoint_path, format_tables(art.outcome.policy, art.outcome.value));
  if (!art.outcome.buffer_snapshot.empty())
    write_file(outdir / "checkpoints" / "final" / "buffer.txt", art.outcome.buffer_snapshot);
  return art;
}

inline constexpr const char* kEvalCsvHeader =
    "suite,level,solved_rate,block_count,shortest_path,solved_path,action_lzw";

inline std::string run_eval_csv(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.checkpoint.empty()) throw FileError("eval requires --checkpoint");
  if (!std::filesystem::exists(cfg.checkpoint))
    throw FileError("missing checkpoint: " + cfg.checkpoint);

  PolicyTable policy;
  ValueTable value;
  {
    std::ifstream in(cfg.checkpoint);
    if (!in) throw FileError("cannot read checkpoint: " + cfg.checkpoint);
    parse_tables(in, policy, value);
  }

  const auto suites = build_suites(cfg);
  RngRoot root(cfg.dcd.seed);
  std::ostringstream os;
  os << kEvalCsvHeader << '\n';
  for (std::size_t i = 0; i < suites.size(); ++i) {
    RngStream rate_rng = root.stream("eval-cli", i);
    const SolveOptions opts{cfg.dcd.env, cfg.dcd.eval_greedy};
    const SolvedRateReport rate = solved_rate(policy, suites[i], opts, rate_rng);
    RngStream traj_rng = root.stream("eval-cli-traj", i);
    for (std::size_t k = 0; k < suites[i].levels.size(); ++k) {
      const MazeLevel& level = suites[i].levels[k];
      const Trajectory traj = eval_trajectory(policy, level, opts, traj_rng);
      const ComplexityRecord rec = complexity_record(level, traj);
      os << suites[i].name << ',' << k << ',' << format_double(rate.per_level[k]) << ','
         << rec.block_count << ',' << rec.shortest_path << ','
         << (rec.solved_path ? std::to_string(*rec.solved_path) : std::string()) << ','
         << rec.action_lzw << '\n';
    }
  }
  return os.str();
}

// --- game verification battery --------------------------------------------------------------

struct GameCheckRow {
  std::string name;
  double measured = 0.0;
  double bound = 0.0;
  bool pass = false;
};

struct GameCheckOptions {
  double b = 1.0;
  double p = 0.5;
  double eps = 0.1;
  int n = 2;
  int sweep_games = 500;
  int corollary_games = 20;
  std::uint64_t seed = 7;
  double certify_eps = 1e-8;
  std::string game_file;
};

struct SweepResult {
  long long games = 0;
  long long profiles_certified = 0;
  long long bound_checks = 0;
  long long failures = 0;
  double worst_margin = -1.0;  // max of measured - (bound + slack); negative is passing
};

// Random-game verification of the approximation bounds: every profile that
// certifies as a 1e-8 equilibrium of the dual game must satisfy all three
// base-game bounds.
inline SweepResult theorem1_sweep(int num_games, std::uint64_t seed, double certify_eps = 1e-8) {
  SweepResult result;
  RngRoot root(seed);
  const TeacherObjective kinds[4][2] = {
      {TeacherObjective::regret(), TeacherObjective::uniform()},
      {TeacherObjective::regret(), TeacherObjective::regret()},
      {TeacherObjective::uniform(), TeacherObjective::regret()},
      {TeacherObjective::uniform(), TeacherObjective::uniform()}};

  for (int g = 0; g < num_games; ++g) {
    RngStream rng = root.stream("sweep-game", static_cast<std::uint64_t>(g));
    const PayoffGame game = random_payoff_game(rng);
    result.games += 1;
    for (int pi = 1; pi <= 9; ++pi) {
      DualGameSpec spec;
      spec.base = game;
      spec.teacher1 = kinds[g % 4][0];
      spec.teacher2 = kinds[g % 4][1];
      spec.p = pi / 10.0;

      std::vector<Profile> candidates;
      for (int start = 0; start < 2; ++start)
        candidates.push_back(alternating_best_response(spec, rng).profile);
      try {
        candidates.push_back(construct_equilibrium(spec, 1e-10));
      } catch (const SolverFailure&) {
        // no constructed candidate for this spec
      }

      for (const Profile& profile : candidates) {
        if (nash_gap(spec, profile).max_gap() > certify_eps) continue;
        result.profiles_certified += 1;
        for (BaseGameChoice which :
             {BaseGameChoice::Joint, BaseGameChoice::Teacher1, BaseGameChoice::Teacher2}) {
          const BoundCheck check = theorem1_bound_check(spec, profile, which, certify_eps);
          result.bound_checks += 1;
          result.worst_margin = std::max(
              result.worst_margin, check.measured - (check.bound + 2.0 * certify_eps + 1e-9));
          if (!check.ok) result.failures += 1;
        }
      }
    }
  }
  return result;
}

struct Corollary2Result {
  int games = 0;
  int failures = 0;
  double max_error = 0.0;
  double allowed = 0.0;
};

// With both teachers maximizing regret, the student at any certified
// equilibrium must sit within solver tolerance of the minimax regret value.
inline Corollary2Result corollary2_check(int num_games, std::uint64_t seed,
                                         double certify_eps = 1e-8) {
  Corollary2Result result;
  result.allowed = 1e-6 + 2.0 * certify_eps;
  RngRoot root(seed);
  for (int g = 0; g < num_games; ++g) {
    RngStream rng = root.stream("corollary2-game", static_cast<std::uint64_t>(g));
    const PayoffGame game = random_payoff_game(rng);
    DualGameSpec spec;
    spec.base = game;
    spec.teacher1 = TeacherObjective::regret();
    spec.teacher2 = TeacherObjective::regret();
    spec.p = 0.1 + 0.8 * rng.uniform();
    result.games += 1;
    try {
      const Profile profile = construct_equilibrium(spec, 1e-10);
      if (nash_gap(spec, profile).max_gap() > certify_eps) {
        result.failures += 1;
        continue;
      }
      const MinimaxRegretResult mm = minimax_regret_solve(game, 1e-9);
      const double error =
          std::abs(worst_case_regret(game, profile.student).value - mm.worst_case_regret);
      result.max_error = std::max(result.max_error, error);
      if (error > result.allowed) result.failures += 1;
    } catch (const SolverFailure&) {
      result.failures += 1;
    }
  }
  return result;
}

inline std::vector<GameCheckRow> run_game_checks(const GameCheckOptions& opt) {
  std::vector<GameCheckRow> rows;
  auto add = [&](const std::string& name, double measured, double bound, bool pass) {
    rows.push_back({name, measured, bound, pass});
  };

  // Counterexample battery at the requested parameters.
  const PayoffGame game = build_table1_game(opt.b, opt.p, opt.eps, opt.n);
  DualGameSpec spec{game, TeacherObjective::regret(), TeacherObjective::uniform(), opt.p};
  const Profile profile = table1_equilibrium_profile(game);
  const NashGaps gaps = nash_gap(spec, profile);
  add("table1/nash-gap-max", gaps.max_gap(), 1e-9, gaps.max_gap() <= 1e-9);

  const double wcr = worst_case_regret(game, profile.student).value;
  const double expected_wcr = opt.b - (opt.b * opt.p / 2.0 + opt.eps);
  add("table1/wcr-error", std::abs(wcr - expected_wcr), 1e-9,
      std::abs(wcr - expected_wcr) <= 1e-9);

  const MinimaxRegretResult mm = minimax_regret_solve(game, 1e-7);
  add("table1/minimax-value-error", std::abs(mm.worst_case_regret - opt.b / 2.0), 1e-6,
      std::abs(mm.worst_case_regret - opt.b / 2.0) <= 1e-6);

  const double gap_over_optimal = wcr - opt.b / 2.0;
  const double expected_gap = opt.b * (1.0 - opt.p) / 2.0 - opt.eps;
  add("table1/regret-gap-error", std::abs(gap_over_optimal - expected_gap), 1e-12,
      std::abs(gap_over_optimal - expected_gap) <= 1e-12);

  for (auto [which, name] : {std::pair{BaseGameChoice::Joint, "table1/theorem1-joint"},
                             std::pair{BaseGameChoice::Teacher1, "table1/theorem1-teacher1"},
                             std::pair{BaseGameChoice::Teacher2, "table1/theorem1-teacher2"}}) {
    const BoundCheck check = theorem1_bound_check(spec, profile, which, 1e-9);
    add(name, check.measured, check.bound, check.ok);
  }

  // Random-game sweeps.
  const SweepResult sweep = theorem1_sweep(opt.sweep_games, opt.seed, opt.certify_eps);
  add("theorem1-sweep/certified", static_cast<double>(sweep.profiles_certified), 1.0,
      sweep.profiles_certified >= 1);
  add("theorem1-sweep/failures", static_cast<double>(sweep.failures), 0.0, sweep.failures == 0);

  const Corollary2Result cor = corollary2_check(opt.corollary_games, opt.seed + 1, opt.certify_eps);
  add("corollary2/max-wcr-error", cor.max_error, cor.allowed, cor.failures == 0);

  // Optional user-provided game.
  if (!opt.game_file.empty()) {
    std::ifstream in(opt.game_file);
    if (!in) throw FileError("cannot open game file: " + opt.game_file);
    const PayoffGame user_game = parse_payoff_game(in);
    const MinimaxRegretResult user_mm = minimax_regret_solve(user_game, 1e-7);
    add("file-game/minimax-regret", user_mm.worst_case_regret,
        user_game.bound_range(), user_mm.worst_case_regret <= user_game.bound_range());
    add("file-game/certificate-gap", user_mm.certificate_gap, 1e-7,
        user_mm.certificate_gap <= 1e-7);
  }
  return rows;
}

// --- report aggregation ------------------------------------------------------------------------

struct AggregateRow {
  std::string metric;
  double mean = 0.0;
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  double iqr = 0.0;
};

inline double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double h = (sorted.size() - 1) * q;
  const std::size_t lo = static_cast<std::size_t>(h);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - lo) * (sorted[hi] - sorted[lo]);
}

// One row per metric with mean, median, and interquartile range across runs.
inline std::vector<AggregateRow> aggregate_reports(const std::vector<RunReport>& reports) {
  if (reports.empty()) throw ConfigError("aggregate_reports: no reports");
  std::map<std::string, std::vector<double>> series;
  for (const auto& r : reports) {
    double sum = 0.0;
    for (const auto& [suite, rate] : r.final_solved_rates) {
      series["solved_rate/" + suite].push_back(rate);
      sum += rate;
    }
    if (!r.final_solved_rates.empty())
      series["solved_rate/mean"].push_back(sum / r.final_solved_rates.size());
    series["episodes"].push_back(static_cast<double>(r.episodes));
    series["student_updates"].push_back(static_cast<double>(r.student_updates));
    series["generator_updates"].push_back(static_cast<double>(r.generator_updates));
    series["replay_episodes"].push_back(static_cast<double>(r.replay_episodes));
    series["generate_episodes"].push_back(static_cast<double>(r.generate_episodes));
  }
  std::vector<AggregateRow> rows;
  for (auto& [metric, values] : series) {
    std::sort(values.begin(), values.end());
    AggregateRow row;
    row.metric = metric;
    double sum = 0.0;
    for (double v : values) sum += v;
    row.mean = sum / values.size();
    row.median = quantile_sorted(values, 0.5);
    row.q25 = quantile_sorted(values, 0.25);
    row.q75 = quantile_sorted(values, 0.75);
    row.iqr = row.q75 - row.q25;
    rows.push_back(row);
  }
  return rows;
}

inline std::vector<AggregateRow> run_report_aggregation(const std::vector<std::string>& paths) {
  std::vector<RunReport> reports;
  for (const auto& p : paths) {
    const auto text = read_file(p);
    reports.push_back(report_from_json(nlohmann::json::parse(text)));
  }
  return aggregate_reports(reports);
}

}  // namespace dcd
