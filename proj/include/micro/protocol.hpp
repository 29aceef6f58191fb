#pragma once

// Stacked Alternating Offers Protocol for k >= 2 seats with a round deadline.
//
// Seats act in order 0..k-1, repeating; a round is one full cycle. On its turn
// a seat proposes an outcome (replacing the standing offer), accepts the
// standing offer, or ends the negotiation. An offer is agreed once every
// non-proposer seat has accepted it with no intervening proposal.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include <json.hpp>

#include "micro/domain.hpp"
#include "micro/rng.hpp"

namespace micro {

inline constexpr std::uint64_t kDefaultDeadlineRounds = 1000;

struct Propose {
  Outcome outcome;
  friend bool operator==(const Propose&, const Propose&) = default;
};
struct Accept {
  friend bool operator==(const Accept&, const Accept&) = default;
};
struct End {
  friend bool operator==(const End&, const End&) = default;
};
using Action = std::variant<Propose, Accept, End>;

inline const char* action_name(const Action& action) {
  switch (action.index()) {
    case 0: return "propose";
    case 1: return "accept";
    default: return "end";
  }
}

struct StandingOffer {
  Outcome outcome;
  std::size_t proposer = 0;
};

struct HistoryEntry {
  std::uint64_t round = 0;
  std::size_t seat = 0;
  Action action;
};

struct NegotiationState {
  std::uint64_t round = 0;
  std::size_t turn = 0;
  std::optional<StandingOffer> standing_offer;
  std::set<std::size_t> acceptors;
  std::vector<HistoryEntry> history;
  /// Distinct outcomes each seat has proposed or accepted.
  std::vector<std::set<Outcome>> ledgers;
  /// Distinct outcomes each seat has proposed.
  std::vector<std::set<Outcome>> proposals;

  static NegotiationState initial(std::size_t seats) {
    if (seats < 2) throw StructuralError("negotiation needs at least 2 seats");
    NegotiationState state;
    state.ledgers.resize(seats);
    state.proposals.resize(seats);
    return state;
  }

  std::size_t seats() const { return ledgers.size(); }

  std::vector<std::size_t> ledger_sizes() const {
    std::vector<std::size_t> sizes;
    for (const auto& ledger : ledgers) sizes.push_back(ledger.size());
    return sizes;
  }

  std::vector<std::size_t> proposal_counts() const {
    std::vector<std::size_t> counts;
    for (const auto& p : proposals) counts.push_back(p.size());
    return counts;
  }
};

enum class EndReason { Agreement, Deadline, End };

inline const char* to_string(EndReason reason) {
  switch (reason) {
    case EndReason::Agreement: return "agreement";
    case EndReason::Deadline: return "deadline";
    default: return "end";
  }
}

struct SessionResult {
  std::optional<Outcome> agreement;
  std::vector<double> utilities;
  std::uint64_t rounds_used = 0;
  EndReason ended_by = EndReason::Deadline;
  /// Seat that ended the session, when ended_by == End.
  std::optional<std::size_t> ended_by_seat;
  /// Set when a seat broke protocol (illegal action or a thrown error).
  std::optional<std::string> incident;

  friend bool operator==(const SessionResult&, const SessionResult&) = default;
};

struct StepResult {
  NegotiationState state;
  std::optional<SessionResult> terminal;
};

namespace detail {

inline SessionResult no_agreement(std::span<const Profile> profiles, std::uint64_t rounds,
                                  EndReason reason) {
  SessionResult result;
  result.ended_by = reason;
  result.rounds_used = rounds;
  for (const auto& p : profiles) result.utilities.push_back(p.reservation);
  return result;
}

}  // namespace detail

/// Applies the acting seat's action. Illegal actions (Accept without a
/// standing offer, Accept of one's own offer, a Propose outside the space)
/// are recorded as End by that seat with an incident message.
inline StepResult step(const OutcomeSpace& space, std::span<const Profile> profiles,
                       NegotiationState state, Action action) {
  const std::size_t k = state.seats();
  if (profiles.size() != k) throw StructuralError("step: profile count differs from seat count");
  const std::size_t seat = state.turn;
  const std::uint64_t round = state.round;

  std::optional<std::string> incident;
  if (auto* propose = std::get_if<Propose>(&action); propose && !space.contains(propose->outcome)) {
    incident = "seat " + std::to_string(seat) + " proposed an outcome outside the space";
  } else if (std::holds_alternative<Accept>(action)) {
    if (!state.standing_offer)
      incident = "seat " + std::to_string(seat) + " accepted with no standing offer";
    else if (state.standing_offer->proposer == seat)
      incident = "seat " + std::to_string(seat) + " accepted its own offer";
  }
  if (incident) action = End{};

  state.history.push_back({round, seat, action});

  auto finish = [&](SessionResult result) {
    result.incident = incident;
    return StepResult{std::move(state), std::move(result)};
  };

  if (std::holds_alternative<End>(action)) {
    SessionResult result = detail::no_agreement(profiles, round + 1, EndReason::End);
    result.ended_by_seat = seat;
    return finish(std::move(result));
  }

  if (auto* propose = std::get_if<Propose>(&action)) {
    state.standing_offer = StandingOffer{propose->outcome, seat};
    state.acceptors.clear();
    state.ledgers[seat].insert(propose->outcome);
    state.proposals[seat].insert(propose->outcome);
  } else {
    state.acceptors.insert(seat);
    state.ledgers[seat].insert(state.standing_offer->outcome);
    if (state.acceptors.size() == k - 1) {
      SessionResult result;
      result.ended_by = EndReason::Agreement;
      result.agreement = state.standing_offer->outcome;
      result.rounds_used = round + 1;
      for (const auto& p : profiles) result.utilities.push_back(utility(p, *result.agreement));
      return finish(std::move(result));
    }
  }

  state.turn = (seat + 1) % k;
  if (state.turn == 0) ++state.round;
  return StepResult{std::move(state), std::nullopt};
}

// ---------------------------------------------------------------------------
// Strategies

/// What a seat may observe when deciding.
struct NegotiationView {
  const OutcomeSpace& space;
  const Profile& profile;
  std::size_t seat;
  std::size_t seats;
  std::uint64_t round;
  std::uint64_t deadline;
  const std::optional<StandingOffer>& standing_offer;
  std::span<const HistoryEntry> history;
  std::span<const std::size_t> ledger_sizes;
  std::span<const std::size_t> proposal_counts;
};

class Strategy {
 public:
  virtual ~Strategy() = default;

  /// Called once before the first decision of a session.
  virtual void start(const OutcomeSpace& /*space*/, const Profile& /*profile*/, std::size_t /*seat*/,
                     std::size_t /*seats*/, std::uint64_t /*deadline*/) {}

  virtual Action decide(const NegotiationView& view, Rng& rng) = 0;
};

// ---------------------------------------------------------------------------
// Sessions and transcripts

struct TranscriptRecord {
  std::uint64_t round = 0;
  std::size_t seat = 0;
  Action action;
  std::vector<std::size_t> ledger_sizes;
  std::optional<std::string> incident;
};

struct Transcript {
  std::vector<TranscriptRecord> records;

  /// One JSON object per line: round, seat, action, outcome (proposals only),
  /// ledger_sizes after the action, and incident when a seat broke protocol.
  std::string to_json_lines() const {
    std::string out;
    for (const auto& r : records) {
      nlohmann::ordered_json line;
      line["round"] = r.round;
      line["seat"] = r.seat;
      line["action"] = action_name(r.action);
      if (auto* p = std::get_if<Propose>(&r.action)) line["outcome"] = p->outcome.values;
      line["ledger_sizes"] = r.ledger_sizes;
      if (r.incident) line["incident"] = *r.incident;
      out += line.dump();
      out += '\n';
    }
    return out;
  }

  static Transcript from_json_lines(std::string_view text) {
    Transcript transcript;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
      ++number;
      if (line.empty()) continue;
      try {
        auto j = nlohmann::json::parse(line);
        TranscriptRecord r;
        r.round = j.at("round").get<std::uint64_t>();
        r.seat = j.at("seat").get<std::size_t>();
        const auto kind = j.at("action").get<std::string>();
        if (kind == "propose")
          r.action = Propose{Outcome{j.at("outcome").get<std::vector<std::uint32_t>>()}};
        else if (kind == "accept")
          r.action = Accept{};
        else if (kind == "end")
          r.action = End{};
        else
          throw ParseError("unknown action '" + kind + "'");
        r.ledger_sizes = j.at("ledger_sizes").get<std::vector<std::size_t>>();
        if (j.contains("incident")) r.incident = j["incident"].get<std::string>();
        transcript.records.push_back(std::move(r));
      } catch (const nlohmann::json::exception& e) {
        throw ParseError("transcript line " + std::to_string(number) + ": " + e.what());
      } catch (const ParseError& e) {
        throw ParseError("transcript line " + std::to_string(number) + ": " + e.what());
      }
    }
    return transcript;
  }
};

struct SessionRun {
  SessionResult result;
  Transcript transcript;
};

/// Called after every applied action with the updated state.
using StepObserver = std::function<void(const NegotiationState&)>;

/// Drives one session to agreement, End, or the deadline. Seat i uses
/// profiles[i] and strategies[i]; its RNG stream is seat_stream(seed, i).
/// A strategy that throws is treated as ending the session at that turn.
inline SessionRun run_session(const OutcomeSpace& space, std::span<const Profile> profiles,
                              std::span<Strategy* const> strategies, std::uint64_t deadline_rounds,
                              std::uint64_t seed, const StepObserver& observer = {}) {
  const std::size_t k = strategies.size();
  if (profiles.size() != k) throw StructuralError("run_session: need exactly one profile per strategy");
  if (deadline_rounds < 1) throw StructuralError("run_session: deadline_rounds must be at least 1");

  std::vector<Rng> streams;
  for (std::size_t seat = 0; seat < k; ++seat) {
    streams.push_back(seat_stream(seed, seat));
    strategies[seat]->start(space, profiles[seat], seat, k, deadline_rounds);
  }

  SessionRun run;
  NegotiationState state = NegotiationState::initial(k);
  while (state.round < deadline_rounds) {
    const std::size_t seat = state.turn;
    const auto ledger_sizes = state.ledger_sizes();
    const auto proposal_counts = state.proposal_counts();
    const NegotiationView view{space,           profiles[seat], seat,          k,
                               state.round,     deadline_rounds, state.standing_offer,
                               state.history,   ledger_sizes,    proposal_counts};
    Action action;
    std::optional<std::string> thrown;
    try {
      action = strategies[seat]->decide(view, streams[seat]);
    } catch (const std::exception& e) {
      thrown = "seat " + std::to_string(seat) + " failed: " + e.what();
      action = End{};
    }

    const std::uint64_t round = state.round;
    StepResult next = step(space, profiles, std::move(state), std::move(action));
    state = std::move(next.state);
    if (thrown && next.terminal) next.terminal->incident = thrown;

    run.transcript.records.push_back({round, seat, state.history.back().action, state.ledger_sizes(),
                                      next.terminal ? next.terminal->incident : std::nullopt});
    if (observer) observer(state);
    if (next.terminal) {
      run.result = std::move(*next.terminal);
      return run;
    }
  }
  run.result = detail::no_agreement(profiles, deadline_rounds, EndReason::Deadline);
  return run;
}

/// Feeds recorded actions back through step() and returns the outcome.
inline SessionResult replay_transcript(const OutcomeSpace& space, std::span<const Profile> profiles,
                                       const Transcript& transcript, std::uint64_t deadline_rounds) {
  NegotiationState state = NegotiationState::initial(profiles.size());
  for (const auto& record : transcript.records) {
    if (state.round >= deadline_rounds) throw ParseError("transcript runs past the deadline");
    if (record.seat != state.turn || record.round != state.round)
      throw ParseError("transcript record out of turn order");
    StepResult next = step(space, profiles, std::move(state), record.action);
    state = std::move(next.state);
    if (next.terminal) {
      if (record.incident) next.terminal->incident = record.incident;
      return *next.terminal;
    }
  }
  if (state.round < deadline_rounds) throw ParseError("transcript ends before the session does");
  return detail::no_agreement(profiles, deadline_rounds, EndReason::Deadline);
}

}  // namespace micro
