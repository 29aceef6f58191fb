#include "micro/domain.hpp"

#include <algorithm>
#include <set>
#include <tuple>

#include <gtest/gtest.h>

#include "test_support.hpp"

namespace micro {
namespace {

OutcomeSpace make_space(std::vector<std::size_t> sizes) {
  std::vector<Issue> issues;
  for (std::size_t j = 0; j < sizes.size(); ++j) {
    Issue issue{"i" + std::to_string(j), {}};
    for (std::size_t v = 0; v < sizes[j]; ++v) issue.values.push_back("v" + std::to_string(v));
    issues.push_back(issue);
  }
  return OutcomeSpace(issues);
}

TEST(Utility, WeightedSum) {
  Profile p{{0.6, 0.4}, {{1.0, 0.0}, {0.2, 0.5}}, 0.0};
  EXPECT_DOUBLE_EQ(utility(p, Outcome{{0, 1}}), 0.8);
}

TEST(Utility, AllTopValuesGiveOne) {
  Profile p{{0.25, 0.25, 0.5}, {{1.0, 0.3}, {0.1, 1.0}, {1.0}}, 0.0};
  EXPECT_DOUBLE_EQ(utility(p, Outcome{{0, 1, 0}}), 1.0);
}

TEST(Utility, SingleIssueIsItsEvaluation) {
  Profile p{{1.0}, {{0.3, 0.7, 1.0}}, 0.0};
  for (std::uint32_t v = 0; v < 3; ++v) EXPECT_DOUBLE_EQ(utility(p, Outcome{{v}}), p.evaluations[0][v]);
}

TEST(Utility, DimensionMismatchIsStructuralError) {
  Profile p{{0.5, 0.5}, {{1.0}, {1.0}}, 0.0};
  EXPECT_THROW(utility(p, Outcome{{0}}), StructuralError);
  EXPECT_THROW(utility(p, Outcome{{0, 3}}), StructuralError);
}

TEST(Enumerate, TwoBinaryIssuesInLexicographicOrder) {
  const auto outcomes = enumerate_outcomes(make_space({2, 2}));
  const std::vector<Outcome> expected{{{0, 0}}, {{0, 1}}, {{1, 0}}, {{1, 1}}};
  EXPECT_EQ(outcomes, expected);
}

TEST(Enumerate, SingleIssue) { EXPECT_EQ(enumerate_outcomes(make_space({3})).size(), 3u); }

TEST(Enumerate, MatchesNestedLoopOracle) {
  const auto space = make_space({2, 3, 2});
  std::set<Outcome> oracle;
  for (std::uint32_t a = 0; a < 2; ++a)
    for (std::uint32_t b = 0; b < 3; ++b)
      for (std::uint32_t c = 0; c < 2; ++c) oracle.insert(Outcome{{a, b, c}});
  const auto outcomes = enumerate_outcomes(space);
  EXPECT_EQ(outcomes.size(), 12u);
  EXPECT_EQ(std::set<Outcome>(outcomes.begin(), outcomes.end()), oracle);
  EXPECT_TRUE(std::is_sorted(outcomes.begin(), outcomes.end()));
  for (std::size_t k = 0; k < outcomes.size(); ++k) EXPECT_EQ(space.ordinal(outcomes[k]), k);
}

TEST(Enumerate, CapacityErrorNamesCountAndCap) {
  const auto space = make_space({10, 10, 10});
  try {
    enumerate_outcomes(space, 999);
    FAIL() << "expected CapacityError";
  } catch (const CapacityError& e) {
    EXPECT_NE(std::string(e.what()).find("K=1000"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("999"), std::string::npos);
  }
  EXPECT_EQ(enumerate_outcomes(space, 1000).size(), 1000u);
}

TEST(SortedOutcomes, UniqueBestComesFirst) {
  Profile p{{0.5, 0.5}, {{0.2, 1.0, 0.4}, {1.0, 0.1}}, 0.0};
  const auto sorted = sorted_outcomes(p, make_space({3, 2}));
  EXPECT_EQ(sorted.front(), (Outcome{{1, 0}}));
}

TEST(SortedOutcomes, TiesKeepLexicographicOrder) {
  Profile p{{0.5, 0.5}, {{1.0, 1.0}, {1.0, 1.0, 1.0}}, 0.0};
  const auto space = make_space({2, 3});
  EXPECT_EQ(sorted_outcomes(p, space), enumerate_outcomes(space));
}

TEST(SortedOutcomes, MatchesBruteForceSort) {
  // 3x3 spaces
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Scenario s = testing::random_scenario(seed, 2, 2, 3);
    const Profile& p = s.profiles[0];
    std::vector<std::tuple<double, std::uint32_t, std::uint32_t>> oracle;
    for (std::uint32_t a = 0; a < 3; ++a)
      for (std::uint32_t b = 0; b < 3; ++b) {
        const double u = p.weights[0] * p.evaluations[0][a] + p.weights[1] * p.evaluations[1][b];
        oracle.emplace_back(-u, a, b);
      }
    std::sort(oracle.begin(), oracle.end());
    const auto sorted = sorted_outcomes(p, s.space);
    ASSERT_EQ(sorted.size(), oracle.size());
    for (std::size_t k = 0; k < sorted.size(); ++k)
      EXPECT_EQ(sorted[k], (Outcome{{std::get<1>(oracle[k]), std::get<2>(oracle[k])}})) << "seed " << seed;
  }
}

TEST(SortedOutcomes, PermutationMonotoneDeterministicAndBounded) {
  for (std::uint64_t seed = 100; seed < 130; ++seed) {
    const Scenario s = testing::random_scenario(seed, 2, 3, 4);
    const auto all = enumerate_outcomes(s.space);
    for (const auto& p : s.profiles) {
      const auto sorted = sorted_outcomes(p, s.space);
      EXPECT_EQ(sorted, sorted_outcomes(p, s.space));
      EXPECT_EQ(std::set<Outcome>(sorted.begin(), sorted.end()), std::set<Outcome>(all.begin(), all.end()));
      for (std::size_t k = 0; k < sorted.size(); ++k) {
        const double u = utility(p, sorted[k]);
        EXPECT_GE(u, 0.0);
        EXPECT_LE(u, 1.0);
        if (k + 1 < sorted.size()) {
          EXPECT_GE(u, utility(p, sorted[k + 1]));
        }
      }
    }
  }
}

TEST(ProfileValidation, RejectsBadWeightsAndEvaluations) {
  const auto space = make_space({2, 2});
  EXPECT_NO_THROW((Profile{{0.5, 0.5}, {{1, 0}, {0, 1}}, 0.2}.validate(space)));
  EXPECT_THROW((Profile{{0.5, 0.6}, {{1, 0}, {0, 1}}, 0}.validate(space)), ValidationError);
  EXPECT_THROW((Profile{{0.5, 0.5}, {{1.2, 0}, {0, 1}}, 0}.validate(space)), ValidationError);
  EXPECT_THROW((Profile{{0.5, 0.5}, {{1}, {0, 1}}, 0}.validate(space)), ValidationError);
  EXPECT_THROW((Profile{{0.5, 0.5}, {{1, 0}, {0, 1}}, 1.5}.validate(space)), ValidationError);
  EXPECT_THROW((Profile{{1.0}, {{1, 0}}, 0}.validate(space)), ValidationError);
  // within tolerance
  EXPECT_NO_THROW((Profile{{0.5 + 4e-10, 0.5}, {{1, 0}, {0, 1}}, 0}.validate(space)));
}

TEST(OutcomeSpaceValidation, RejectsDuplicatesAndEmptyIssues) {
  EXPECT_THROW(OutcomeSpace(std::vector<Issue>{}), ValidationError);
  EXPECT_THROW(OutcomeSpace({{"a", {"x"}}, {"a", {"y"}}}), ValidationError);
  EXPECT_THROW(OutcomeSpace(std::vector<Issue>{Issue{"a", {}}}), ValidationError);
  EXPECT_THROW(OutcomeSpace({{"a", {"x", "x"}}}), ValidationError);
}

TEST(OutcomeSpace, OrdinalRoundTrip) {
  const auto space = make_space({3, 1, 4, 2});
  for (std::uint64_t k = 0; k < space.outcome_count(); ++k) EXPECT_EQ(space.ordinal(space.outcome_at(k)), k);
}

}  // namespace
}  // namespace micro
