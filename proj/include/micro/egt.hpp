#pragma once

// Empirical game-theoretic analysis of symmetric three-seat strategy games.
//
// A strategy's payoff depends only on the multiset of its two opponents'
// strategies. From such a table we derive best responses, pure Nash
// equilibria and the best-response graph over all strategy multisets.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "micro/csv.hpp"
#include "micro/error.hpp"
#include "micro/tournament.hpp"

namespace micro {

/// Unordered opponent pair, stored with first <= second.
struct OpponentPair {
  std::string first;
  std::string second;

  OpponentPair() = default;
  OpponentPair(std::string a, std::string b) : first(std::move(a)), second(std::move(b)) {
    if (second < first) std::swap(first, second);
  }

  std::string label() const { return "(" + first + ", " + second + ")"; }

  friend auto operator<=>(const OpponentPair&, const OpponentPair&) = default;
};

/// Sorted multiset of three strategy names.
struct ProfileNode {
  std::array<std::string, 3> members;

  ProfileNode() = default;
  ProfileNode(std::string a, std::string b, std::string c) : members{std::move(a), std::move(b), std::move(c)} {
    std::sort(members.begin(), members.end());
  }

  std::string label() const { return members[0] + "+" + members[1] + "+" + members[2]; }

  /// The two members left after removing one copy of `member`.
  OpponentPair without(const std::string& member) const {
    auto it = std::find(members.begin(), members.end(), member);
    if (it == members.end()) throw StructuralError("'" + member + "' is not in " + label());
    std::vector<std::string> rest;
    for (auto m = members.begin(); m != members.end(); ++m)
      if (m != it) rest.push_back(*m);
    return OpponentPair(rest[0], rest[1]);
  }

  friend auto operator<=>(const ProfileNode&, const ProfileNode&) = default;
};

class PayoffTable {
 public:
  PayoffTable() = default;

  void set(const std::string& strategy, const OpponentPair& pair, double utility) {
    if (!std::isfinite(utility)) throw ValidationError("payoff for " + strategy + " vs " + pair.label() + " is not finite");
    strategies_.insert(strategy);
    strategies_.insert(pair.first);
    strategies_.insert(pair.second);
    payoff_[{strategy, pair}] = utility;
  }

  std::optional<double> find(const std::string& strategy, const OpponentPair& pair) const {
    auto it = payoff_.find({strategy, pair});
    if (it == payoff_.end()) return std::nullopt;
    return it->second;
  }

  double at(const std::string& strategy, const OpponentPair& pair) const {
    auto value = find(strategy, pair);
    if (!value) throw CompletenessError("no payoff for " + strategy + " vs " + pair.label());
    return *value;
  }

  /// Strategy names in sorted order.
  std::vector<std::string> strategies() const { return {strategies_.begin(), strategies_.end()}; }

  /// Every unordered opponent pair over the strategies, sorted.
  std::vector<OpponentPair> pairs() const {
    const auto names = strategies();
    std::vector<OpponentPair> out;
    for (std::size_t i = 0; i < names.size(); ++i)
      for (std::size_t j = i; j < names.size(); ++j) out.emplace_back(names[i], names[j]);
    return out;
  }

  /// Cells lacking a payoff, formatted "strategy vs (a, b)".
  std::vector<std::string> missing_cells() const {
    std::vector<std::string> gaps;
    for (const auto& pair : pairs())
      for (const auto& s : strategies_)
        if (!payoff_.count({s, pair})) gaps.push_back(s + " vs " + pair.label());
    return gaps;
  }

  void require_complete() const {
    const auto gaps = missing_cells();
    if (gaps.empty()) return;
    std::string message = "payoff table incomplete; missing " + std::to_string(gaps.size()) + " cell(s): ";
    for (std::size_t i = 0; i < gaps.size(); ++i) message += (i ? "; " : "") + gaps[i];
    throw CompletenessError(message);
  }

  /// Every payoff multiplied by `factor`.
  PayoffTable scaled(double factor) const {
    PayoffTable out = *this;
    for (auto& [_, value] : out.payoff_) value *= factor;
    return out;
  }

 private:
  std::set<std::string> strategies_;
  std::map<std::pair<std::string, OpponentPair>, double> payoff_;
};

/// Mean seat utility of each strategy against each opponent pair, pooled
/// over all scenarios, assignments and repetitions of three-seat sessions.
inline PayoffTable build_payoff_table(const std::vector<ResultRow>& rows) {
  using SessionKey = std::tuple<std::string, std::string, std::size_t, std::size_t>;
  std::map<SessionKey, std::vector<const ResultRow*>> sessions;
  for (const auto& r : rows) sessions[{r.scenario, r.triplet, r.assignment, r.repetition}].push_back(&r);

  std::map<std::pair<std::string, OpponentPair>, std::pair<double, std::size_t>> sums;
  for (const auto& [key, seats] : sessions) {
    if (seats.size() != 3)
      throw StructuralError("payoff table: session " + std::get<0>(key) + "/" + std::get<1>(key) +
                            " has " + std::to_string(seats.size()) + " seats; three-seat sessions only");
    for (std::size_t i = 0; i < 3; ++i) {
      OpponentPair pair(seats[(i + 1) % 3]->strategy, seats[(i + 2) % 3]->strategy);
      auto& [sum, count] = sums[{seats[i]->strategy, pair}];
      sum += seats[i]->utility;
      ++count;
    }
  }
  PayoffTable table;
  for (const auto& [cell, acc] : sums) table.set(cell.first, cell.second, acc.first / static_cast<double>(acc.second));
  table.require_complete();
  return table;
}

/// Reads "opponent_a,opponent_b,strategy,utility" rows.
inline PayoffTable read_payoff_csv(std::string_view text) {
  const csv::Table csv_table = csv::parse(text);
  const std::size_t a = csv_table.column("opponent_a");
  const std::size_t b = csv_table.column("opponent_b");
  const std::size_t s = csv_table.column("strategy");
  const std::size_t u = csv_table.column("utility");
  PayoffTable table;
  std::size_t line = 1;
  for (const auto& f : csv_table.rows) {
    ++line;
    std::size_t used = 0;
    double value;
    try {
      value = std::stod(f[u], &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != f[u].size())
      throw ParseError("payoff CSV line " + std::to_string(line) + ": bad utility '" + f[u] + "'");
    const OpponentPair pair(f[a], f[b]);
    if (table.find(f[s], pair))
      throw ValidationError("payoff CSV line " + std::to_string(line) + ": duplicate cell " + f[s] + " vs " +
                            pair.label());
    table.set(f[s], pair, value);
  }
  return table;
}

inline std::string write_payoff_csv(const PayoffTable& table) {
  std::string out = "opponent_a,opponent_b,strategy,utility\n";
  for (const auto& pair : table.pairs())
    for (const auto& s : table.strategies())
      if (auto v = table.find(s, pair)) out += csv::join({pair.first, pair.second, s, csv::fixed(*v, 6)}) + "\n";
  return out;
}

struct BestResponse {
  std::string strategy;
  double utility = 0.0;
  /// Another strategy reaches the same utility; `strategy` is the first by name.
  bool tie = false;
};

inline BestResponse best_response(const PayoffTable& table, const OpponentPair& pair) {
  std::optional<BestResponse> best;
  for (const auto& s : table.strategies()) {
    const double u = table.at(s, pair);
    if (!best || u > best->utility) {
      best = BestResponse{s, u, false};
    } else if (u == best->utility) {
      best->tie = true;
    }
  }
  if (!best) throw CompletenessError("best_response: empty payoff table");
  return *best;
}

/// How often each strategy is the best response, over all opponent pairs.
inline std::map<std::string, std::size_t> best_response_frequency(const PayoffTable& table) {
  std::map<std::string, std::size_t> counts;
  for (const auto& s : table.strategies()) counts[s] = 0;
  for (const auto& pair : table.pairs()) ++counts[best_response(table, pair).strategy];
  return counts;
}

/// Every multiset of three strategies, sorted.
inline std::vector<ProfileNode> all_profile_nodes(const PayoffTable& table) {
  std::vector<ProfileNode> nodes;
  for (const auto& combo : enumerate_triplets(table.strategies(), 3))
    nodes.emplace_back(combo[0], combo[1], combo[2]);
  return nodes;
}

/// Nodes where no member strictly gains by switching to any other strategy.
inline std::vector<ProfileNode> find_pure_nash(const PayoffTable& table) {
  table.require_complete();
  const auto names = table.strategies();
  std::vector<ProfileNode> equilibria;
  for (const auto& node : all_profile_nodes(table)) {
    bool stable = true;
    for (const auto& member : node.members) {
      const OpponentPair rest = node.without(member);
      const double current = table.at(member, rest);
      for (const auto& alternative : names)
        if (table.at(alternative, rest) > current) stable = false;
    }
    if (stable) equilibria.push_back(node);
  }
  return equilibria;
}

struct DeviationEdge {
  ProfileNode from;
  ProfileNode to;
  std::string deviator;     // strategy being abandoned
  std::string replacement;  // strategy adopted
  double gain = 0.0;
};

struct BestResponseGraph {
  std::vector<std::string> strategies;
  std::vector<ProfileNode> nodes;
  std::vector<DeviationEdge> edges;  // sorted by (from, deviator, to)
  std::vector<ProfileNode> equilibria;

  std::size_t out_degree(const ProfileNode& node) const {
    return static_cast<std::size_t>(
        std::count_if(edges.begin(), edges.end(), [&](const DeviationEdge& e) { return e.from == node; }));
  }
};

/// One edge per (node, member strategy) whose best response strictly
/// improves on it. With `all_improving`, one edge per strictly improving
/// alternative instead.
inline BestResponseGraph build_best_response_graph(const PayoffTable& table, bool all_improving = false) {
  table.require_complete();
  BestResponseGraph graph;
  graph.strategies = table.strategies();
  graph.nodes = all_profile_nodes(table);
  for (const auto& node : graph.nodes) {
    std::set<std::string> members(node.members.begin(), node.members.end());
    for (const auto& member : members) {
      const OpponentPair rest = node.without(member);
      const double current = table.at(member, rest);
      auto add_edge = [&](const std::string& replacement, double u) {
        graph.edges.push_back({node, ProfileNode(rest.first, rest.second, replacement), member, replacement, u - current});
      };
      if (all_improving) {
        for (const auto& alternative : graph.strategies) {
          const double u = table.at(alternative, rest);
          if (u > current) add_edge(alternative, u);
        }
      } else {
        const BestResponse br = best_response(table, rest);
        if (br.utility > current) add_edge(br.strategy, br.utility);
      }
    }
  }
  std::stable_sort(graph.edges.begin(), graph.edges.end(), [](const DeviationEdge& a, const DeviationEdge& b) {
    return std::tie(a.from, a.deviator, a.to) < std::tie(b.from, b.deviator, b.to);
  });
  for (const auto& node : graph.nodes)
    if (graph.out_degree(node) == 0) graph.equilibria.push_back(node);
  return graph;
}

/// Graphviz rendering: equilibria filled green, edges colored by the
/// strategy that deviates and labeled with its utility gain.
inline std::string emit_best_response_graph(const BestResponseGraph& graph) {
  static constexpr std::array<const char*, 10> kPalette{"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                                        "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  auto color_of = [&](const std::string& strategy) {
    auto it = std::find(graph.strategies.begin(), graph.strategies.end(), strategy);
    return kPalette[static_cast<std::size_t>(it - graph.strategies.begin()) % kPalette.size()];
  };
  auto quoted = [](const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
      if (c == '"' || c == '\\') out += '\\';
      out += c;
    }
    return out + "\"";
  };
  std::set<ProfileNode> equilibria(graph.equilibria.begin(), graph.equilibria.end());

  std::string out = "digraph best_response {\n  rankdir=LR;\n  node [shape=box, style=rounded];\n";
  for (const auto& node : graph.nodes) {
    out += "  " + quoted(node.label());
    if (equilibria.count(node)) out += " [style=\"rounded,filled\", fillcolor=green]";
    out += ";\n";
  }
  for (const auto& e : graph.edges) {
    out += "  " + quoted(e.from.label()) + " -> " + quoted(e.to.label()) + " [color=\"" + color_of(e.deviator) +
           "\", label=" + quoted(e.deviator + " -> " + e.replacement + " +" + csv::fixed(e.gain, 4)) + "];\n";
  }
  out += "}\n";
  return out;
}

inline std::string emit_best_response_graph(const PayoffTable& table, bool all_improving = false) {
  return emit_best_response_graph(build_best_response_graph(table, all_improving));
}

/// Payoff table by opponent pair, best responses, frequencies and equilibria.
inline std::string egt_report(const PayoffTable& table) {
  table.require_complete();
  std::string out = "Payoff table (utility of the row strategy against the opponent pair)\n";
  for (const auto& pair : table.pairs()) {
    out += pair.label() + "\n";
    auto names = table.strategies();
    std::stable_sort(names.begin(), names.end(),
                     [&](const auto& a, const auto& b) { return table.at(a, pair) > table.at(b, pair); });
    for (const auto& s : names) out += "    " + s + "  " + csv::fixed(table.at(s, pair), 4) + "\n";
  }
  out += "\nBest responses\n";
  for (const auto& pair : table.pairs()) {
    const auto br = best_response(table, pair);
    out += "    " + pair.label() + " -> " + br.strategy + " " + csv::fixed(br.utility, 4) + (br.tie ? " (tie)" : "") + "\n";
  }
  out += "\nBest response frequency\n";
  auto freq = best_response_frequency(table);
  std::vector<std::pair<std::string, std::size_t>> ordered(freq.begin(), freq.end());
  std::stable_sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  for (const auto& [s, n] : ordered) out += "    " + s + ": " + std::to_string(n) + "\n";
  out += "\nPure Nash equilibria\n";
  for (const auto& node : find_pure_nash(table)) {
    const double self = table.at(node.members[0], node.without(node.members[0]));
    out += "    {" + node.members[0] + ", " + node.members[1] + ", " + node.members[2] + "}";
    if (node.members[0] == node.members[2]) out += "  self-play payoff " + csv::fixed(self, 4);
    out += "\n";
  }
  return out;
}

}  // namespace micro
