// Command-line driver: scenario generation, single sessions, tournaments,
// metrics and empirical game-theoretic analysis.
//
// Exit codes: 0 success, 1 runtime or data error, 2 usage error.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "micro/agents.hpp"
#include "micro/egt.hpp"
#include "micro/protocol.hpp"
#include "micro/scenario_io.hpp"
#include "micro/tournament.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitData = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GlobalFlags {
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  bool strict = false;
  std::string out;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw micro::ParseError(path + ": cannot open");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot write");
  out << text;
  if (!out) throw std::runtime_error(path + ": write failed");
}

std::vector<micro::StrategySpec> parse_agents(const std::vector<std::string>& names) {
  std::vector<micro::StrategySpec> specs;
  try {
    for (const auto& name : names) specs.push_back(micro::parse_strategy(name));
  } catch (const micro::UnknownStrategy& e) {
    throw UsageError(e.what());
  }
  return specs;
}

// --- gen-scenario -----------------------------------------------------------

struct GenFlags {
  std::size_t issues = 3;
  std::vector<std::size_t> values{4};
  std::size_t seats = 3;
  double reservation = 0.0;
  std::string name;
};

int cmd_gen_scenario(const GlobalFlags& global, const GenFlags& flags) {
  if (global.out.empty()) throw UsageError("gen-scenario: -o/--out is required");
  if (flags.values.size() != 1 && flags.values.size() != flags.issues)
    throw UsageError("gen-scenario: --values takes one count or one per issue");

  micro::GeneratorConfig config;
  config.seed = global.seed;
  config.issue_count = flags.issues;
  config.values_per_issue = flags.values;
  config.seats = flags.seats;
  config.reservation = flags.reservation;
  config.name = flags.name;
  const micro::Scenario scenario = micro::generate_scenario(config);
  write_file(global.out, micro::serialize_scenario(scenario));

  const std::uint64_t count = scenario.space.outcome_count();
  std::cout << "wrote " << global.out << ": " << scenario.name << ", K=" << count << " outcomes, "
            << scenario.profiles.size() << " profiles\n";
  for (std::size_t i = 0; i < scenario.profiles.size(); ++i) {
    double lo = 1.0, hi = 0.0;
    for (std::uint64_t k = 0; k < count; ++k) {
      const double u = micro::utility(scenario.profiles[i], scenario.space.outcome_at(k));
      lo = std::min(lo, u);
      hi = std::max(hi, u);
    }
    std::cout << "  profile " << i << ": max utility " << micro::csv::fixed(hi, 6) << ", min utility "
              << micro::csv::fixed(lo, 6) << "\n";
  }
  return 0;
}

// --- run --------------------------------------------------------------------

struct RunFlags {
  std::string scenario;
  std::vector<std::string> agents;
  std::uint64_t deadline = micro::kDefaultDeadlineRounds;
  std::string transcript;
};

int cmd_run(const GlobalFlags& global, const RunFlags& flags) {
  const auto specs = parse_agents(flags.agents);
  const micro::Scenario scenario = micro::load_scenario_file(flags.scenario);
  const std::size_t k = specs.size();
  if (k < 2) throw UsageError("run: at least two agents are required");
  if (k > scenario.profiles.size())
    throw UsageError("run: " + std::to_string(k) + " agents but the scenario has only " +
                     std::to_string(scenario.profiles.size()) + " profiles");

  std::vector<micro::Profile> profiles(scenario.profiles.begin(), scenario.profiles.begin() + k);
  std::vector<std::unique_ptr<micro::Strategy>> owned;
  std::vector<micro::Strategy*> strategies;
  for (const auto& spec : specs) {
    owned.push_back(micro::make_strategy(spec));
    strategies.push_back(owned.back().get());
  }
  const auto run = micro::run_session(scenario.space, profiles, strategies, flags.deadline, global.seed);
  if (!flags.transcript.empty()) write_file(flags.transcript, run.transcript.to_json_lines());

  const auto& result = run.result;
  std::cout << "scenario: " << scenario.name << " (K=" << scenario.space.outcome_count() << ")\n";
  std::cout << "ended_by: " << micro::to_string(result.ended_by) << "\n";
  std::cout << "rounds_used: " << result.rounds_used << "\n";
  if (result.agreement) std::cout << "agreement: " << scenario.space.describe(*result.agreement) << "\n";
  if (result.incident) std::cout << "incident: " << *result.incident << "\n";
  for (std::size_t seat = 0; seat < k; ++seat)
    std::cout << "seat " << seat << " " << specs[seat].name << ": utility "
              << micro::csv::fixed(result.utilities[seat], 6) << "\n";
  return 0;
}

// --- tournament -------------------------------------------------------------

struct TournamentFlags {
  std::string scenarios;
  std::vector<std::string> agents{"micro-min", "conceder:e=0.5", "conceder:e=2", "hardliner"};
  std::size_t seats = 3;
  std::uint64_t deadline = micro::kDefaultDeadlineRounds;
  std::size_t repetitions = 1;
  std::string metrics;
};

std::vector<micro::Scenario> load_scenarios(const std::string& path, bool strict) {
  std::vector<std::string> files;
  if (fs::is_directory(path)) {
    for (const auto& entry : fs::directory_iterator(path))
      if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw std::runtime_error(path + ": no .json scenario files");
  } else if (fs::exists(path)) {
    files.push_back(path);
  } else {
    throw std::runtime_error(path + ": no such file or directory");
  }
  std::vector<micro::Scenario> scenarios;
  for (const auto& file : files) {
    try {
      scenarios.push_back(micro::load_scenario_file(file));
    } catch (const std::exception& e) {
      if (strict) throw;
      std::cerr << "warning: skipping " << e.what() << "\n";
    }
  }
  return scenarios;
}

int cmd_tournament(const GlobalFlags& global, const TournamentFlags& flags) {
  if (global.out.empty()) throw UsageError("tournament: -o/--out is required for the results CSV");
  parse_agents(flags.agents);
  micro::TournamentConfig config;
  config.strategies = flags.agents;
  config.scenarios = load_scenarios(flags.scenarios, global.strict);
  config.seats = flags.seats;
  config.deadline_rounds = flags.deadline;
  config.master_seed = global.seed;
  config.repetitions = flags.repetitions;
  config.workers = global.workers;

  const auto result = micro::run_tournament(config);
  for (const auto& warning : result.warnings) {
    if (global.strict) throw std::runtime_error(warning);
    std::cerr << "warning: " << warning << "\n";
  }
  write_file(global.out, micro::write_results_csv(result.rows));
  std::cout << result.sessions << " sessions, " << result.rows.size() << " rows -> " << global.out << "\n\n";
  const auto metrics = micro::compute_metrics(result.rows);
  std::cout << micro::metrics_report(metrics);
  if (!flags.metrics.empty()) write_file(flags.metrics, micro::metrics_csv(metrics));
  return 0;
}

// --- analyze / egt ----------------------------------------------------------

int cmd_analyze(const GlobalFlags& global, const std::string& input) {
  const auto rows = micro::read_results_csv(read_file(input));
  const auto metrics = micro::compute_metrics(rows);
  std::cout << micro::metrics_report(metrics);
  if (!global.out.empty()) write_file(global.out, micro::metrics_csv(metrics));
  return 0;
}

struct EgtFlags {
  std::string input;
  std::string dot;
  bool all_improving = false;
};

int cmd_egt(const EgtFlags& flags) {
  const std::string text = read_file(flags.input);
  const auto header = micro::csv::parse(text).header;
  const bool payoff_input = std::find(header.begin(), header.end(), "opponent_a") != header.end();
  const micro::PayoffTable table =
      payoff_input ? micro::read_payoff_csv(text) : micro::build_payoff_table(micro::read_results_csv(text));
  table.require_complete();
  std::cout << micro::egt_report(table);
  if (!flags.dot.empty()) write_file(flags.dot, micro::emit_best_response_graph(table, flags.all_improving));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multilateral MiCRO negotiation simulator and analysis toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags global;
  app.add_option("--seed", global.seed, "Master seed for all randomness")->capture_default_str();
  app.add_option("--workers", global.workers, "Worker threads for tournaments")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_flag("--strict", global.strict, "Treat warnings as errors");
  app.add_option("-o,--out", global.out, "Output path");

  GenFlags gen;
  auto* gen_cmd = app.add_subcommand("gen-scenario", "Generate a random linear-additive scenario");
  gen_cmd->add_option("--issues", gen.issues, "Number of issues")->check(CLI::PositiveNumber)->capture_default_str();
  gen_cmd->add_option("--values", gen.values, "Values per issue (one count, or one per issue)")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("--seats", gen.seats, "Number of profiles")->check(CLI::Range(2, 1000))->capture_default_str();
  gen_cmd->add_option("--reservation", gen.reservation, "Reservation value of every profile")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  gen_cmd->add_option("--name", gen.name, "Scenario name");

  RunFlags run;
  auto* run_cmd = app.add_subcommand("run", "Run one negotiation session");
  run_cmd->add_option("-s,--scenario", run.scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("-a,--agents", run.agents, "Comma-separated agents, one per seat")
      ->required()
      ->delimiter(',');
  run_cmd->add_option("--deadline", run.deadline, "Deadline in rounds")->check(CLI::PositiveNumber)->capture_default_str();
  run_cmd->add_option("--transcript", run.transcript, "Write a JSON-lines transcript here");

  TournamentFlags tour;
  auto* tour_cmd = app.add_subcommand("tournament", "Play every agent multiset on every scenario");
  tour_cmd->add_option("-s,--scenarios", tour.scenarios, "Scenario directory or file")->required();
  tour_cmd->add_option("-a,--agents", tour.agents, "Comma-separated agent names")->delimiter(',')->capture_default_str();
  tour_cmd->add_option("--seats", tour.seats, "Seats per session")->check(CLI::Range(2, 16))->capture_default_str();
  tour_cmd->add_option("--deadline", tour.deadline, "Deadline in rounds")->check(CLI::PositiveNumber)->capture_default_str();
  tour_cmd->add_option("--reps", tour.repetitions, "Repetitions per session")->check(CLI::PositiveNumber)->capture_default_str();
  tour_cmd->add_option("--metrics", tour.metrics, "Write the metrics CSV here");

  std::string analyze_input;
  auto* analyze_cmd = app.add_subcommand("analyze", "Metrics report from a results CSV");
  analyze_cmd->add_option("-i,--input", analyze_input, "Results CSV")->required()->check(CLI::ExistingFile);

  EgtFlags egt;
  auto* egt_cmd = app.add_subcommand("egt", "Best responses and pure Nash equilibria");
  egt_cmd->add_option("-i,--input", egt.input, "Results CSV or payoff CSV")->required()->check(CLI::ExistingFile);
  egt_cmd->add_option("--dot", egt.dot, "Write the best-response graph (Graphviz DOT)");
  egt_cmd->add_flag("--all-improving", egt.all_improving, "Draw every improving deviation, not only best responses");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*gen_cmd) return cmd_gen_scenario(global, gen);
    if (*run_cmd) return cmd_run(global, run);
    if (*tour_cmd) return cmd_tournament(global, tour);
    if (*analyze_cmd) return cmd_analyze(global, analyze_input);
    if (*egt_cmd) return cmd_egt(egt);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
