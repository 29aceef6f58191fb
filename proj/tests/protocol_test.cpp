#include "micro/protocol.hpp"

#include <gtest/gtest.h>

#include "micro/agents.hpp"
#include "test_support.hpp"

namespace micro {
namespace {

Scenario three_seat_scenario() { return testing::random_scenario(5, 3, 2, 3); }

struct Driver {
  const Scenario& scenario;
  NegotiationState state;
  std::optional<SessionResult> terminal;

  explicit Driver(const Scenario& s) : scenario(s), state(NegotiationState::initial(s.profiles.size())) {}

  void act(Action action) {
    ASSERT_FALSE(terminal) << "session already over";
    StepResult next = step(scenario.space, scenario.profiles, std::move(state), std::move(action));
    state = std::move(next.state);
    terminal = std::move(next.terminal);
  }
};

const Outcome kOmega{{0, 0}};
const Outcome kOmegaPrime{{1, 2}};

TEST(Step, UnanimousAcceptanceIsAgreement) {
  const Scenario s = three_seat_scenario();
  Driver d(s);
  d.act(Propose{kOmega});
  d.act(Accept{});
  EXPECT_FALSE(d.terminal);
  d.act(Accept{});
  ASSERT_TRUE(d.terminal);
  EXPECT_EQ(d.terminal->ended_by, EndReason::Agreement);
  EXPECT_EQ(d.terminal->agreement, kOmega);
  EXPECT_EQ(d.terminal->rounds_used, 1u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(d.terminal->utilities[i], utility(s.profiles[i], kOmega));
}

TEST(Step, CounterOfferClearsAcceptors) {
  const Scenario s = three_seat_scenario();
  Driver d(s);
  d.act(Propose{kOmega});
  d.act(Accept{});
  d.act(Propose{kOmegaPrime});
  ASSERT_FALSE(d.terminal);
  ASSERT_TRUE(d.state.standing_offer);
  EXPECT_EQ(d.state.standing_offer->outcome, kOmegaPrime);
  EXPECT_EQ(d.state.standing_offer->proposer, 2u);
  EXPECT_TRUE(d.state.acceptors.empty());
  EXPECT_TRUE(d.state.ledgers[1].count(kOmega));
  EXPECT_TRUE(d.state.proposals[1].empty());
  EXPECT_EQ(d.state.ledger_sizes(), (std::vector<std::size_t>{1, 1, 1}));
  EXPECT_EQ(d.state.round, 1u);
  EXPECT_EQ(d.state.turn, 0u);
}

TEST(Step, BilateralSingleAcceptIsAgreement) {
  const Scenario s = testing::random_scenario(9, 2, 2, 3);
  Driver d(s);
  d.act(Propose{kOmega});
  d.act(Accept{});
  ASSERT_TRUE(d.terminal);
  EXPECT_EQ(d.terminal->ended_by, EndReason::Agreement);
}

TEST(Step, ReacceptingDoesNotGrowLedger) {
  const Scenario s = three_seat_scenario();
  Driver d(s);
  d.act(Propose{kOmega});
  d.act(Accept{});
  d.act(Propose{kOmegaPrime});
  d.act(Propose{kOmega});
  d.act(Accept{});
  EXPECT_EQ(d.state.ledgers[1].size(), 1u);
}

TEST(Step, AcceptWithoutStandingOfferEndsTheSession) {
  const Scenario s = three_seat_scenario();
  Driver d(s);
  d.act(Accept{});
  ASSERT_TRUE(d.terminal);
  EXPECT_EQ(d.terminal->ended_by, EndReason::End);
  EXPECT_EQ(d.terminal->ended_by_seat, 0u);
  ASSERT_TRUE(d.terminal->incident);
  EXPECT_NE(d.terminal->incident->find("seat 0"), std::string::npos);
  EXPECT_TRUE(std::holds_alternative<End>(d.state.history.back().action));
  for (std::size_t i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(d.terminal->utilities[i], s.profiles[i].reservation);
}

TEST(Step, ProposalOutsideSpaceIsViolation) {
  const Scenario s = three_seat_scenario();
  Driver d(s);
  d.act(Propose{Outcome{{0, 9}}});
  ASSERT_TRUE(d.terminal);
  EXPECT_TRUE(d.terminal->incident);
}

TEST(Step, EndIsAlwaysLegal) {
  const Scenario s = three_seat_scenario();
  Driver d(s);
  d.act(Propose{kOmega});
  d.act(End{});
  ASSERT_TRUE(d.terminal);
  EXPECT_EQ(d.terminal->ended_by, EndReason::End);
  EXPECT_FALSE(d.terminal->incident);
  EXPECT_FALSE(d.terminal->agreement);
}

TEST(RunSession, IdenticalProfilesAgreeInRoundOne) {
  Scenario base = testing::random_scenario(21, 3, 3, 4);
  Scenario s("same", base.space, {base.profiles[0], base.profiles[0], base.profiles[0]});
  const auto run = testing::play(s, {"micro-min", "micro-min", "micro-min"}, 1000, 1);
  EXPECT_EQ(run.result.ended_by, EndReason::Agreement);
  EXPECT_EQ(run.result.rounds_used, 1u);
  EXPECT_EQ(run.result.agreement, sorted_outcomes(s.profiles[0], s.space).front());
  ASSERT_EQ(run.transcript.records.size(), 3u);
}

TEST(RunSession, HardlinersHitTheDeadline) {
  const Scenario s = testing::random_scenario(3, 3, 3, 4, 0.25);
  EXPECT_THROW(testing::play(s, {"hardliner", "hardliner", "hardliner"}, 0, 1), StructuralError);
  const auto run = testing::play(s, {"hardliner", "hardliner", "hardliner"}, 1, 1);
  EXPECT_EQ(run.result.ended_by, EndReason::Deadline);
  EXPECT_EQ(run.result.rounds_used, 1u);
  EXPECT_EQ(run.transcript.records.size(), 3u);
  for (double u : run.result.utilities) EXPECT_DOUBLE_EQ(u, 0.25);
}

TEST(RunSession, SameSeedSameTranscript) {
  const Scenario s = testing::random_scenario(4, 3, 3, 5);
  const std::vector<std::string> names{"micro-min", "random:p=0.8", "conceder:e=2"};
  const auto a = testing::play(s, names, 200, 77);
  const auto b = testing::play(s, names, 200, 77);
  EXPECT_EQ(a.transcript.to_json_lines(), b.transcript.to_json_lines());
  EXPECT_EQ(a.result, b.result);
}

class Thrower : public Strategy {
 public:
  Action decide(const NegotiationView&, Rng&) override { throw std::runtime_error("boom"); }
};

class AcceptsNothingStanding : public Strategy {
 public:
  Action decide(const NegotiationView&, Rng&) override { return Accept{}; }
};

TEST(RunSession, FailingStrategyIsScoredAtReservation) {
  const Scenario s = testing::random_scenario(8, 3, 2, 3, 0.4);
  testing::Lineup lineup({"micro-min"});
  lineup.add(std::make_unique<Thrower>());
  lineup.add(make_strategy("micro-min"));
  const auto run = run_session(s.space, s.profiles, lineup.seats, 100, 1);
  EXPECT_EQ(run.result.ended_by, EndReason::End);
  EXPECT_EQ(run.result.ended_by_seat, 1u);
  ASSERT_TRUE(run.result.incident);
  EXPECT_NE(run.result.incident->find("boom"), std::string::npos);
  for (double u : run.result.utilities) EXPECT_DOUBLE_EQ(u, 0.4);
  ASSERT_TRUE(run.transcript.records.back().incident);

  testing::Lineup illegal;
  illegal.add(std::make_unique<AcceptsNothingStanding>());
  illegal.add(make_strategy("micro-min"));
  illegal.add(make_strategy("micro-min"));
  const auto run2 = run_session(s.space, s.profiles, illegal.seats, 100, 1);
  EXPECT_EQ(run2.result.ended_by_seat, 0u);
  EXPECT_TRUE(run2.result.incident);
}

TEST(Transcript, JsonLinesFormat) {
  const Scenario s = three_seat_scenario();
  Transcript t;
  t.records.push_back({0, 0, Propose{kOmega}, {1, 0, 0}, std::nullopt});
  t.records.push_back({0, 1, Accept{}, {1, 1, 0}, std::nullopt});
  t.records.push_back({0, 2, End{}, {1, 1, 0}, std::string("seat 2 accepted its own offer")});
  EXPECT_EQ(t.to_json_lines(),
            "{\"round\":0,\"seat\":0,\"action\":\"propose\",\"outcome\":[0,0],\"ledger_sizes\":[1,0,0]}\n"
            "{\"round\":0,\"seat\":1,\"action\":\"accept\",\"ledger_sizes\":[1,1,0]}\n"
            "{\"round\":0,\"seat\":2,\"action\":\"end\",\"ledger_sizes\":[1,1,0],"
            "\"incident\":\"seat 2 accepted its own offer\"}\n");
  EXPECT_EQ(Transcript::from_json_lines(t.to_json_lines()).to_json_lines(), t.to_json_lines());
  EXPECT_THROW(Transcript::from_json_lines("{\"round\":0}\n"), ParseError);
}

// Invariants over randomized sessions with mixed strategies.
TEST(RunSession, ProtocolInvariantsHoldOnRandomSessions) {
  const std::vector<std::string> pool{"micro-min", "micro-max", "micro-mean", "micro-min-nofix",
                                      "conceder:e=0.5", "conceder:e=3", "hardliner", "random:p=0.7"};
  Rng pick(2024);
  for (std::uint64_t trial = 0; trial < 300; ++trial) {
    const std::size_t k = 2 + trial % 3;
    const Scenario s = testing::random_scenario(trial, k, 1 + trial % 3, 2 + trial % 4, 0.1 * (trial % 4));
    std::vector<std::string> names;
    for (std::size_t i = 0; i < k; ++i) names.push_back(pool[uniform_index(pick, pool.size())]);
    const std::uint64_t deadline = 5 + trial % 40;

    std::vector<std::size_t> previous(k, 0);
    bool monotone = true;
    const auto run = testing::play(s, names, deadline, trial, [&](const NegotiationState& state) {
      const auto sizes = state.ledger_sizes();
      for (std::size_t i = 0; i < k; ++i) {
        if (sizes[i] < previous[i] || sizes[i] > previous[i] + 1) monotone = false;
      }
      previous = sizes;
    });
    EXPECT_TRUE(monotone) << "trial " << trial;
    EXPECT_LE(run.transcript.records.size(), k * deadline);

    if (run.result.ended_by == EndReason::Agreement) {
      const auto& recs = run.transcript.records;
      ASSERT_GE(recs.size(), k);
      std::set<std::size_t> acceptors;
      for (std::size_t i = recs.size() - (k - 1); i < recs.size(); ++i) {
        EXPECT_TRUE(std::holds_alternative<Accept>(recs[i].action));
        acceptors.insert(recs[i].seat);
      }
      const auto& proposal = recs[recs.size() - k];
      ASSERT_TRUE(std::holds_alternative<Propose>(proposal.action));
      EXPECT_EQ(std::get<Propose>(proposal.action).outcome, *run.result.agreement);
      EXPECT_EQ(acceptors.size(), k - 1);
      EXPECT_FALSE(acceptors.count(proposal.seat));
    }

    const auto replayed = Transcript::from_json_lines(run.transcript.to_json_lines());
    EXPECT_EQ(replay_transcript(s.space, std::span(s.profiles).first(k), replayed, deadline), run.result)
        << "trial " << trial;
  }
}

}  // namespace
}  // namespace micro
