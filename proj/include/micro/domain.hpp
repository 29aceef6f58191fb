#pragma once

// Outcome spaces, linear-additive preference profiles and scenarios.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "micro/error.hpp"

namespace micro {

inline constexpr std::uint64_t kDefaultOutcomeCap = 10'000'000;
inline constexpr double kWeightTolerance = 1e-9;

struct Issue {
  std::string name;
  std::vector<std::string> values;

  std::size_t size() const { return values.size(); }

  /// Index of `label`, or size() when absent.
  std::size_t index_of(const std::string& label) const {
    auto it = std::find(values.begin(), values.end(), label);
    return static_cast<std::size_t>(it - values.begin());
  }
};

/// One value index per issue.
struct Outcome {
  std::vector<std::uint32_t> values;

  std::size_t size() const { return values.size(); }
  std::uint32_t operator[](std::size_t issue) const { return values[issue]; }

  friend auto operator<=>(const Outcome&, const Outcome&) = default;
  friend bool operator==(const Outcome&, const Outcome&) = default;
};

class OutcomeSpace {
 public:
  OutcomeSpace() = default;

  explicit OutcomeSpace(std::vector<Issue> issues) : issues_(std::move(issues)) {
    if (issues_.empty()) throw ValidationError("outcome space: at least one issue required");
    std::unordered_set<std::string> names;
    for (const auto& issue : issues_) {
      if (!names.insert(issue.name).second)
        throw ValidationError("outcome space: duplicate issue name '" + issue.name + "'");
      if (issue.values.empty())
        throw ValidationError("issue '" + issue.name + "': values must be non-empty");
      std::unordered_set<std::string> labels(issue.values.begin(), issue.values.end());
      if (labels.size() != issue.values.size())
        throw ValidationError("issue '" + issue.name + "': duplicate value label");
    }
  }

  const std::vector<Issue>& issues() const { return issues_; }
  std::size_t issue_count() const { return issues_.size(); }
  const Issue& issue(std::size_t j) const { return issues_.at(j); }

  /// Index of the issue called `name`, or issue_count() when absent.
  std::size_t issue_index(const std::string& name) const {
    for (std::size_t j = 0; j < issues_.size(); ++j)
      if (issues_[j].name == name) return j;
    return issues_.size();
  }

  /// Product of issue sizes, saturating at uint64 max.
  std::uint64_t outcome_count() const {
    std::uint64_t count = 1;
    for (const auto& issue : issues_) {
      const std::uint64_t n = issue.size();
      if (count > std::numeric_limits<std::uint64_t>::max() / n)
        return std::numeric_limits<std::uint64_t>::max();
      count *= n;
    }
    return count;
  }

  bool contains(const Outcome& outcome) const {
    if (outcome.size() != issues_.size()) return false;
    for (std::size_t j = 0; j < issues_.size(); ++j)
      if (outcome[j] >= issues_[j].size()) return false;
    return true;
  }

  /// Position of `outcome` in lexicographic order (last issue varies fastest).
  std::uint64_t ordinal(const Outcome& outcome) const {
    if (!contains(outcome)) throw StructuralError("outcome does not belong to this space");
    std::uint64_t index = 0;
    for (std::size_t j = 0; j < issues_.size(); ++j) index = index * issues_[j].size() + outcome[j];
    return index;
  }

  Outcome outcome_at(std::uint64_t ordinal) const {
    Outcome outcome;
    outcome.values.resize(issues_.size());
    for (std::size_t j = issues_.size(); j-- > 0;) {
      const std::uint64_t n = issues_[j].size();
      outcome.values[j] = static_cast<std::uint32_t>(ordinal % n);
      ordinal /= n;
    }
    return outcome;
  }

  /// Human-readable "issue=value" list.
  std::string describe(const Outcome& outcome) const {
    std::string text;
    for (std::size_t j = 0; j < issues_.size(); ++j) {
      if (j) text += ", ";
      text += issues_[j].name + "=" + issues_[j].values.at(outcome[j]);
    }
    return text;
  }

  friend bool operator==(const OutcomeSpace& a, const OutcomeSpace& b) {
    if (a.issues_.size() != b.issues_.size()) return false;
    for (std::size_t j = 0; j < a.issues_.size(); ++j)
      if (a.issues_[j].name != b.issues_[j].name || a.issues_[j].values != b.issues_[j].values)
        return false;
    return true;
  }

 private:
  std::vector<Issue> issues_;
};

/// Linear-additive utility: weights per issue, evaluation per issue value,
/// and the utility received when no agreement is reached.
struct Profile {
  std::vector<double> weights;
  std::vector<std::vector<double>> evaluations;  // [issue][value index]
  double reservation = 0.0;

  /// Throws ValidationError naming the offending field.
  void validate(const OutcomeSpace& space) const {
    if (weights.size() != space.issue_count())
      throw ValidationError("weights: expected " + std::to_string(space.issue_count()) +
                            " entries, got " + std::to_string(weights.size()));
    if (evaluations.size() != space.issue_count())
      throw ValidationError("evaluations: expected " + std::to_string(space.issue_count()) +
                            " issues, got " + std::to_string(evaluations.size()));
    double sum = 0.0;
    for (std::size_t j = 0; j < weights.size(); ++j) {
      const auto& name = space.issue(j).name;
      if (!std::isfinite(weights[j]) || weights[j] < 0.0)
        throw ValidationError("weights." + name + ": must be a non-negative number");
      sum += weights[j];
      if (evaluations[j].size() != space.issue(j).size())
        throw ValidationError("evaluations." + name + ": must cover every value of the issue");
      for (std::size_t v = 0; v < evaluations[j].size(); ++v) {
        const double e = evaluations[j][v];
        if (!(e >= 0.0 && e <= 1.0))
          throw ValidationError("evaluations." + name + "." + space.issue(j).values[v] +
                                ": must lie in [0,1]");
      }
    }
    if (std::abs(sum - 1.0) > kWeightTolerance)
      throw ValidationError("weights: weights sum ≠ 1 (sum is " + std::to_string(sum) + ")");
    if (!(reservation >= 0.0 && reservation <= 1.0))
      throw ValidationError("reservation: must lie in [0,1]");
  }

  friend bool operator==(const Profile&, const Profile&) = default;
};

struct Scenario {
  std::string name;
  OutcomeSpace space;
  std::vector<Profile> profiles;

  Scenario() = default;
  Scenario(std::string name_, OutcomeSpace space_, std::vector<Profile> profiles_)
      : name(std::move(name_)), space(std::move(space_)), profiles(std::move(profiles_)) {
    validate();
  }

  void validate() const {
    if (profiles.size() < 2) throw ValidationError("profiles: at least 2 required");
    for (std::size_t i = 0; i < profiles.size(); ++i) {
      try {
        profiles[i].validate(space);
      } catch (const ValidationError& e) {
        throw ValidationError("profiles[" + std::to_string(i) + "]." + e.what());
      }
    }
  }

  friend bool operator==(const Scenario& a, const Scenario& b) {
    return a.name == b.name && a.space == b.space && a.profiles == b.profiles;
  }
};

/// Weighted sum of per-issue evaluations.
inline double utility(const Profile& profile, const Outcome& outcome) {
  if (outcome.size() != profile.weights.size() || outcome.size() != profile.evaluations.size())
    throw StructuralError("utility: outcome has " + std::to_string(outcome.size()) +
                          " issues, profile has " + std::to_string(profile.weights.size()));
  double total = 0.0;
  for (std::size_t j = 0; j < outcome.size(); ++j) {
    const auto& table = profile.evaluations[j];
    if (outcome[j] >= table.size()) throw StructuralError("utility: value index out of range");
    total += profile.weights[j] * table[outcome[j]];
  }
  // weights may sum to 1 + 1e-9
  return std::min(total, 1.0);
}

inline void check_capacity(const OutcomeSpace& space, std::uint64_t cap) {
  const std::uint64_t count = space.outcome_count();
  if (count > cap)
    throw CapacityError("outcome space has K=" + std::to_string(count) +
                        " outcomes, exceeding the cap of " + std::to_string(cap));
}

/// All outcomes in lexicographic index order.
inline std::vector<Outcome> enumerate_outcomes(const OutcomeSpace& space,
                                               std::uint64_t cap = kDefaultOutcomeCap) {
  check_capacity(space, cap);
  const std::uint64_t count = space.outcome_count();
  std::vector<Outcome> outcomes;
  outcomes.reserve(count);
  for (std::uint64_t k = 0; k < count; ++k) outcomes.push_back(space.outcome_at(k));
  return outcomes;
}

/// Ordinals sorted by descending utility; equal utilities keep lexicographic order.
inline std::vector<std::uint64_t> sorted_ordinals(const Profile& profile, const OutcomeSpace& space,
                                                  std::uint64_t cap = kDefaultOutcomeCap) {
  check_capacity(space, cap);
  const std::uint64_t count = space.outcome_count();
  std::vector<double> utilities(count);
  for (std::uint64_t k = 0; k < count; ++k) utilities[k] = utility(profile, space.outcome_at(k));
  std::vector<std::uint64_t> order(count);
  std::iota(order.begin(), order.end(), std::uint64_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::uint64_t a, std::uint64_t b) {
    return utilities[a] > utilities[b];
  });
  return order;
}

inline std::vector<Outcome> sorted_outcomes(const Profile& profile, const OutcomeSpace& space,
                                            std::uint64_t cap = kDefaultOutcomeCap) {
  std::vector<Outcome> outcomes;
  for (std::uint64_t k : sorted_ordinals(profile, space, cap)) outcomes.push_back(space.outcome_at(k));
  return outcomes;
}

}  // namespace micro
