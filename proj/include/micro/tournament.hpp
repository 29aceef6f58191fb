#pragma once

// Round-robin tournaments over strategy multisets and profile assignments,
// and the per-strategy performance metrics computed from their results.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "micro/agents.hpp"
#include "micro/csv.hpp"
#include "micro/domain.hpp"
#include "micro/protocol.hpp"
#include "micro/rng.hpp"

namespace micro {

using StrategyCombo = std::vector<std::string>;

/// All size-k multisets over `strategies` (deduplicated, sorted by name), each
/// in sorted order, listed lexicographically. There are C(n+k-1, k) of them.
inline std::vector<StrategyCombo> enumerate_triplets(std::vector<std::string> strategies, std::size_t k) {
  std::sort(strategies.begin(), strategies.end());
  strategies.erase(std::unique(strategies.begin(), strategies.end()), strategies.end());
  std::vector<StrategyCombo> combos;
  if (strategies.empty() || k == 0) return combos;
  std::vector<std::size_t> index(k, 0);
  const std::size_t n = strategies.size();
  while (true) {
    StrategyCombo combo;
    for (auto i : index) combo.push_back(strategies[i]);
    combos.push_back(std::move(combo));
    std::size_t pos = k;
    while (pos > 0 && index[pos - 1] == n - 1) --pos;
    if (pos == 0) break;
    const std::size_t next = index[pos - 1] + 1;
    for (std::size_t j = pos - 1; j < k; ++j) index[j] = next;
  }
  return combos;
}

/// All k! seat-to-profile bijections in lexicographic order.
inline std::vector<std::vector<std::size_t>> enumerate_assignments(std::size_t k) {
  std::vector<std::size_t> perm(k);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::vector<std::vector<std::size_t>> perms;
  do {
    perms.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return perms;
}

inline std::string join_combo(const StrategyCombo& combo) {
  std::string text;
  for (const auto& name : combo) text += (text.empty() ? "" : "+") + name;
  return text;
}

struct TournamentConfig {
  std::vector<std::string> strategies;
  std::vector<Scenario> scenarios;
  std::size_t seats = 3;
  std::uint64_t deadline_rounds = kDefaultDeadlineRounds;
  std::uint64_t master_seed = 0;
  std::size_t repetitions = 1;
  std::size_t workers = 1;
};

struct ResultRow {
  std::string scenario;
  std::string triplet;  // sorted strategy names joined by '+'
  std::size_t assignment = 0;
  std::size_t repetition = 0;
  std::size_t seat = 0;
  std::string strategy;
  double utility = 0.0;
  bool agreement = false;
  std::uint64_t rounds_used = 0;
  std::uint64_t seed = 0;

  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

struct TournamentResult {
  std::vector<ResultRow> rows;
  std::size_t sessions = 0;
  std::vector<std::string> warnings;
};

inline std::uint64_t session_seed(std::uint64_t master_seed, const std::string& scenario,
                                  const std::string& triplet, std::size_t assignment,
                                  std::size_t repetition) {
  const std::string key = scenario + "|" + triplet + "|" + std::to_string(assignment) + "|" +
                          std::to_string(repetition);
  return derive_seed(master_seed, fnv1a(key));
}

/// Plays every (scenario, multiset, assignment, repetition) once. Seat s of a
/// session plays the s-th strategy of the sorted multiset with profile
/// perm[s] of the scenario's first k profiles. Row order is fixed by the
/// enumeration and does not depend on the worker count.
inline TournamentResult run_tournament(const TournamentConfig& config) {
  if (config.seats < 2) throw StructuralError("tournament: seats_per_session must be at least 2");
  if (config.strategies.empty()) throw StructuralError("tournament: no strategies");
  if (config.deadline_rounds < 1) throw StructuralError("tournament: deadline must be at least 1 round");
  std::map<std::string, StrategySpec> specs;
  for (const auto& name : config.strategies) specs.emplace(name, parse_strategy(name));

  const std::size_t k = config.seats;
  const auto combos = enumerate_triplets(config.strategies, k);
  const auto perms = enumerate_assignments(k);

  struct Job {
    const Scenario* scenario;
    const StrategyCombo* combo;
    std::size_t assignment;
    std::size_t repetition;
  };
  TournamentResult result;
  std::vector<Job> jobs;
  for (const auto& scenario : config.scenarios) {
    if (scenario.profiles.size() < k) {
      result.warnings.push_back("scenario '" + scenario.name + "' has " +
                                std::to_string(scenario.profiles.size()) + " profiles, need " +
                                std::to_string(k) + "; skipped");
      continue;
    }
    for (const auto& combo : combos)
      for (std::size_t a = 0; a < perms.size(); ++a)
        for (std::size_t r = 0; r < config.repetitions; ++r) jobs.push_back({&scenario, &combo, a, r});
  }
  result.sessions = jobs.size();
  result.rows.resize(jobs.size() * k);

  auto run_job = [&](std::size_t index) {
    const Job& job = jobs[index];
    const std::string triplet = join_combo(*job.combo);
    const std::uint64_t seed =
        session_seed(config.master_seed, job.scenario->name, triplet, job.assignment, job.repetition);
    std::vector<Profile> profiles;
    for (std::size_t seat = 0; seat < k; ++seat)
      profiles.push_back(job.scenario->profiles[perms[job.assignment][seat]]);
    std::vector<std::unique_ptr<Strategy>> owned;
    std::vector<Strategy*> strategies;
    for (const auto& name : *job.combo) {
      owned.push_back(make_strategy(specs.at(name)));
      strategies.push_back(owned.back().get());
    }
    const SessionRun run =
        run_session(job.scenario->space, profiles, strategies, config.deadline_rounds, seed);
    for (std::size_t seat = 0; seat < k; ++seat) {
      result.rows[index * k + seat] = ResultRow{job.scenario->name,
                                                triplet,
                                                job.assignment,
                                                job.repetition,
                                                seat,
                                                (*job.combo)[seat],
                                                run.result.utilities[seat],
                                                run.result.agreement.has_value(),
                                                run.result.rounds_used,
                                                seed};
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(config.workers, jobs.size()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) run_job(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = next++; i < jobs.size(); i = next++) run_job(i);
        } catch (...) {
          errors[w] = std::current_exception();
          next = jobs.size();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Results CSV

inline const std::vector<std::string>& results_header() {
  static const std::vector<std::string> header{"scenario", "triplet",   "assignment",  "repetition",
                                               "seat",     "strategy",  "utility",     "agreement",
                                               "rounds_used", "seed"};
  return header;
}

inline std::string write_results_csv(const std::vector<ResultRow>& rows) {
  std::string out = csv::join(results_header()) + "\n";
  for (const auto& r : rows) {
    out += csv::join({r.scenario, r.triplet, std::to_string(r.assignment), std::to_string(r.repetition),
                      std::to_string(r.seat), r.strategy, csv::fixed(r.utility, 6),
                      r.agreement ? "1" : "0", std::to_string(r.rounds_used), std::to_string(r.seed)});
    out += '\n';
  }
  return out;
}

inline std::vector<ResultRow> read_results_csv(std::string_view text) {
  const csv::Table table = csv::parse(text);
  std::vector<std::size_t> col;
  for (const auto& name : results_header()) col.push_back(table.column(name));
  std::vector<ResultRow> rows;
  std::size_t line = 1;
  for (const auto& f : table.rows) {
    ++line;
    try {
      ResultRow r;
      r.scenario = f[col[0]];
      r.triplet = f[col[1]];
      r.assignment = std::stoull(f[col[2]]);
      r.repetition = std::stoull(f[col[3]]);
      r.seat = std::stoull(f[col[4]]);
      r.strategy = f[col[5]];
      r.utility = std::stod(f[col[6]]);
      if (f[col[7]] != "0" && f[col[7]] != "1") throw std::invalid_argument("agreement must be 0 or 1");
      r.agreement = f[col[7]] == "1";
      r.rounds_used = std::stoull(f[col[8]]);
      r.seed = std::stoull(f[col[9]]);
      rows.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw ParseError("results CSV row " + std::to_string(line) + ": " + e.what());
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Metrics

struct AgentMetrics {
  std::size_t samples = 0;
  double mean_utility = 0.0;
  double standard_error = 0.0;
  std::optional<double> utility_on_agreement;
  double agreement_rate = 0.0;
};

/// Per-strategy statistics over seat rows. The standard error uses the
/// sample deviation (n - 1); with a single row it is reported as 0.
inline std::map<std::string, AgentMetrics> compute_metrics(const std::vector<ResultRow>& rows) {
  std::map<std::string, std::vector<const ResultRow*>> by_strategy;
  for (const auto& r : rows) by_strategy[r.strategy].push_back(&r);

  std::map<std::string, AgentMetrics> metrics;
  for (const auto& [name, group] : by_strategy) {
    AgentMetrics m;
    m.samples = group.size();
    const double n = static_cast<double>(group.size());
    double sum = 0.0, agreed_sum = 0.0;
    std::size_t agreed = 0;
    for (const auto* r : group) {
      sum += r->utility;
      if (r->agreement) agreed_sum += r->utility, ++agreed;
    }
    m.mean_utility = sum / n;
    if (group.size() > 1) {
      double squares = 0.0;
      for (const auto* r : group) squares += (r->utility - m.mean_utility) * (r->utility - m.mean_utility);
      m.standard_error = std::sqrt(squares / (n - 1.0)) / std::sqrt(n);
    }
    if (agreed > 0) m.utility_on_agreement = agreed_sum / static_cast<double>(agreed);
    m.agreement_rate = static_cast<double>(agreed) / n;
    metrics.emplace(name, m);
  }
  return metrics;
}

/// Strategies ordered by descending mean utility, then by name.
inline std::vector<std::pair<std::string, AgentMetrics>> ranked(const std::map<std::string, AgentMetrics>& metrics) {
  std::vector<std::pair<std::string, AgentMetrics>> out(metrics.begin(), metrics.end());
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.second.mean_utility > b.second.mean_utility;
  });
  return out;
}

/// "81.40 ± 0.35": mean and standard error scaled by 100.
inline std::string format_mean_stderr(const AgentMetrics& m) {
  return csv::fixed(m.mean_utility * 100.0, 2) + " ± " + csv::fixed(m.standard_error * 100.0, 2);
}

inline std::string metrics_report(const std::map<std::string, AgentMetrics>& metrics) {
  const auto order = ranked(metrics);
  std::size_t width = 5;
  for (const auto& [name, _] : order) width = std::max(width, name.size());
  auto pad = [](std::string s, std::size_t w) {
    // "±" is two bytes but one column
    std::size_t columns = s.size();
    if (s.find("±") != std::string::npos) --columns;
    if (columns < w) s.append(w - columns, ' ');
    return s;
  };
  std::string out = pad("Agent", width) + "  " + pad("Mean Utility ± Std. Err.", 26) + "  " +
                    pad("Utility on Agreement", 20) + "  Agreement Rate\n";
  for (const auto& [name, m] : order) {
    out += pad(name, width) + "  " + pad(format_mean_stderr(m), 26) + "  " +
           pad(m.utility_on_agreement ? csv::fixed(*m.utility_on_agreement * 100.0, 2) : "-", 20) + "  " +
           csv::fixed(m.agreement_rate * 100.0, 2) + "%\n";
  }
  return out;
}

inline std::string metrics_csv(const std::map<std::string, AgentMetrics>& metrics) {
  std::string out = "strategy,mean_x100,stderr_x100,util_on_agreement_x100,agreement_rate_pct\n";
  for (const auto& [name, m] : ranked(metrics)) {
    out += csv::join({name, csv::fixed(m.mean_utility * 100.0, 2), csv::fixed(m.standard_error * 100.0, 2),
                      m.utility_on_agreement ? csv::fixed(*m.utility_on_agreement * 100.0, 2) : "",
                      csv::fixed(m.agreement_rate * 100.0, 2)});
    out += '\n';
  }
  return out;
}

}  // namespace micro
