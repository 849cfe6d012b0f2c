// Command-line entry point: train, eval, game, and report subcommands.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "dcd/harness.hpp"

namespace {

void print_usage() {
  std::cout <<
      "usage: dcd <subcommand> [options]\n"
      "\n"
      "subcommands:\n"
      "  train    run a training loop; writes report.json, metrics.csv, checkpoints\n"
      "  eval     evaluate a checkpoint on held-out suites; writes per-level CSV\n"
      "  game     run the finite-game verification battery; nonzero exit on failure\n"
      "  report   aggregate several report.json files (mean, median, IQR)\n"
      "\n"
      "run `dcd train --help` for the shared option list.\n";
}

int cmd_train(const std::vector<std::string>& args) {
  const dcd::ParseOutcome parsed = dcd::parse_run_config(args);
  if (parsed.help_requested) {
    std::cout << parsed.help_text;
    return 0;
  }
  const dcd::TrainArtifacts art = dcd::run_train(parsed.config);
  std::cout << "episodes " << art.outcome.report.episodes << ", student updates "
            << art.outcome.report.student_updates << "\n";
  for (const auto& [suite, rate] : art.outcome.report.final_solved_rates)
    std::cout << "  solved_rate/" << suite << " = " << dcd::format_double(rate) << "\n";
  std::cout << "report:  " << art.report_path.string() << "\n"
            << "metrics: " << art.metrics_path.string() << "\n";
  return 0;
}

int cmd_eval(const std::vector<std::string>& args) {
  const dcd::ParseOutcome parsed = dcd::parse_run_config(args);
  if (parsed.help_requested) {
    std::cout << parsed.help_text;
    return 0;
  }
  const std::string csv = dcd::run_eval_csv(parsed.config);
  const std::filesystem::path out =
      std::filesystem::path(parsed.config.output_dir) / "eval.csv";
  dcd::write_file(out, csv);
  std::cout << csv;
  std::cout << "written: " << out.string() << "\n";
  return 0;
}

int cmd_game(const std::vector<std::string>& args) {
  dcd::GameCheckOptions opt;
  CLI::App app{"finite-game verification battery"};
  app.add_option("--b", opt.b, "payoff scale B")->check(CLI::PositiveNumber);
  app.add_option("--p", opt.p, "mixing probability")->check(CLI::Range(1e-9, 1.0 - 1e-9));
  app.add_option("--eps", opt.eps, "counterexample epsilon")->check(CLI::PositiveNumber);
  app.add_option("--n", opt.n, "extra parameter count")->check(CLI::Range(2, 1 << 20));
  app.add_option("--games", opt.sweep_games, "random games in the bound sweep")
      ->check(CLI::PositiveNumber);
  app.add_option("--corollary-games", opt.corollary_games)->check(CLI::PositiveNumber);
  app.add_option("--seed", opt.seed);
  app.add_option("--game-file", opt.game_file, "payoff matrix file to analyze");
  std::vector<const char*> argv{"dcd-game"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  const auto rows = dcd::run_game_checks(opt);
  int failures = 0;
  std::printf("%-28s %14s %14s  %s\n", "check", "measured", "bound", "result");
  for (const auto& row : rows) {
    std::printf("%-28s %14.6g %14.6g  %s\n", row.name.c_str(), row.measured, row.bound,
                row.pass ? "pass" : "FAIL");
    if (!row.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}

int cmd_report(const std::vector<std::string>& args) {
  if (args.empty() || args[0] == "--help" || args[0] == "-h") {
    std::cout << "usage: dcd report <report.json> [more report.json ...]\n";
    return args.empty() ? 2 : 0;
  }
  const auto rows = dcd::run_report_aggregation(args);
  std::printf("%-28s %12s %12s %12s %12s %12s\n", "metric", "mean", "median", "q25", "q75", "iqr");
  for (const auto& row : rows)
    std::printf("%-28s %12.6g %12.6g %12.6g %12.6g %12.6g\n", row.metric.c_str(), row.mean,
                row.median, row.q25, row.q75, row.iqr);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    print_usage();
    return 2;
  }
  const std::string sub = argv[1];
  const std::vector<std::string> rest(argv + 2, argv + argc);
  try {
    if (sub == "train") return cmd_train(rest);
    if (sub == "eval") return cmd_eval(rest);
    if (sub == "game") return cmd_game(rest);
    if (sub == "report") return cmd_report(rest);
    if (sub == "--help" || sub == "-h" || sub == "help") {
      print_usage();
      return 0;
    }
    std::cerr << "error: unknown subcommand '" << sub << "'\n";
    print_usage();
    return 2;
  } catch (const dcd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const dcd::FileError& e) {
    std::cerr << "file error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
