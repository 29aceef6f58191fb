#pragma once

// Negotiation strategies: the multilateral MiCRO family and a few baseline
// opponents, plus the name registry used by the CLI and tournaments.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "micro/domain.hpp"
#include "micro/protocol.hpp"
#include "micro/rng.hpp"

namespace micro {

/// Exact non-negative fraction; enough for averaging concession counts.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational() = default;
  Rational(std::int64_t n, std::int64_t d = 1) : num(n), den(d) {
    if (den == 0) throw StructuralError("rational with zero denominator");
    if (den < 0) num = -num, den = -den;
    const std::int64_t g = std::gcd(num, den);
    if (g > 1) num /= g, den /= g;
  }

  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }

  friend bool operator==(const Rational& a, const Rational& b) { return a.num == b.num && a.den == b.den; }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    return a.num * b.den <=> b.num * a.den;
  }
};

enum class MicroVariant { Min, Max, Mean };

struct MicroConfig {
  MicroVariant variant = MicroVariant::Min;
  /// Count accepted outcomes as concessions alongside proposals. Without it,
  /// three Min agents can cycle forever: one keeps accepting while the other
  /// two keep repeating, and nobody's count moves.
  bool count_acceptances = true;
};

/// Collapses the opponents' concession counts into the single number MiCRO
/// compares its own count against.
inline Rational aggregate_opponent_count(MicroVariant variant, std::span<const std::size_t> counts) {
  if (counts.empty()) throw StructuralError("aggregate_opponent_count: no opponents");
  switch (variant) {
    case MicroVariant::Min:
      return Rational(static_cast<std::int64_t>(*std::min_element(counts.begin(), counts.end())));
    case MicroVariant::Max:
      return Rational(static_cast<std::int64_t>(*std::max_element(counts.begin(), counts.end())));
    case MicroVariant::Mean: {
      std::int64_t sum = 0;
      for (auto c : counts) sum += static_cast<std::int64_t>(c);
      return Rational(sum, static_cast<std::int64_t>(counts.size()));
    }
  }
  throw StructuralError("aggregate_opponent_count: bad variant");
}

/// A MiCRO agent's position in its own preference order.
struct MicroState {
  std::vector<Outcome> sorted;             // best first
  std::vector<double> sorted_utilities;
  std::size_t proposed = 0;                // m: sorted[0..m) have been proposed
  std::size_t own_count = 0;
  Rational opponent_count;
  double reservation = 0.0;

  std::size_t outcome_count() const { return sorted.size(); }

  /// True when the next unproposed outcome may be offered now.
  bool proposes_new() const {
    return proposed < sorted.size() && Rational(static_cast<std::int64_t>(own_count)) <= opponent_count &&
           sorted_utilities[proposed] >= reservation;
  }
};

/// Lowest-utility outcome the agent is currently willing to propose.
inline const Outcome& micro_threshold(const MicroState& state) {
  if (state.sorted.empty()) throw StructuralError("micro_threshold: empty outcome list");
  if (state.proposes_new()) return state.sorted[state.proposed];
  return state.sorted[state.proposed == 0 ? 0 : state.proposed - 1];
}

inline double micro_threshold_utility(const MicroState& state) {
  if (state.sorted.empty()) throw StructuralError("micro_threshold: empty outcome list");
  if (state.proposes_new()) return state.sorted_utilities[state.proposed];
  return state.sorted_utilities[state.proposed == 0 ? 0 : state.proposed - 1];
}

inline bool micro_accepts(double u_offer, double u_low, double rv) { return u_offer >= std::max(u_low, rv); }

class MicroAgent : public Strategy {
 public:
  explicit MicroAgent(MicroConfig config = {}) : config_(config) {}

  void start(const OutcomeSpace& space, const Profile& profile, std::size_t, std::size_t,
             std::uint64_t) override {
    state_ = MicroState{};
    for (std::uint64_t k : sorted_ordinals(profile, space)) {
      state_.sorted.push_back(space.outcome_at(k));
      state_.sorted_utilities.push_back(utility(profile, state_.sorted.back()));
    }
    state_.reservation = profile.reservation;
  }

  Action decide(const NegotiationView& view, Rng& rng) override {
    if (state_.sorted.empty()) start(view.space, view.profile, view.seat, view.seats, view.deadline);
    refresh_counts(view);

    if (view.standing_offer && view.standing_offer->proposer != view.seat) {
      const double offered = utility(view.profile, view.standing_offer->outcome);
      if (micro_accepts(offered, micro_threshold_utility(state_), state_.reservation)) return Accept{};
    }
    if (state_.proposes_new()) return Propose{state_.sorted[state_.proposed++]};
    if (state_.proposed == 0) return End{};
    return Propose{state_.sorted[uniform_index(rng, state_.proposed)]};
  }

  const MicroState& state() const { return state_; }
  const MicroConfig& config() const { return config_; }

 private:
  void refresh_counts(const NegotiationView& view) {
    const auto& counts = config_.count_acceptances ? view.ledger_sizes : view.proposal_counts;
    std::vector<std::size_t> opponents;
    for (std::size_t seat = 0; seat < counts.size(); ++seat)
      if (seat != view.seat) opponents.push_back(counts[seat]);
    state_.opponent_count = aggregate_opponent_count(config_.variant, opponents);
    state_.own_count = config_.count_acceptances ? view.ledger_sizes[view.seat] : state_.proposed;
  }

  MicroConfig config_;
  MicroState state_;
};

/// Aspiration falls from 1 to the reservation value over the deadline:
/// target(t) = rv + (1 - rv)(1 - t^(1/e)), t = round / deadline.
inline double conceder_target(double exponent, double reservation, double t) {
  return reservation + (1.0 - reservation) * (1.0 - std::pow(t, 1.0 / exponent));
}

class TimeConceder : public Strategy {
 public:
  explicit TimeConceder(double exponent) : exponent_(exponent) {
    if (!(exponent > 0.0)) throw StructuralError("conceder: exponent must be positive");
  }

  void start(const OutcomeSpace& space, const Profile& profile, std::size_t, std::size_t,
             std::uint64_t) override {
    sorted_ = sorted_ordinals(profile, space);
    next_ = 0;
    last_.reset();
  }

  Action decide(const NegotiationView& view, Rng&) override {
    if (sorted_.empty()) start(view.space, view.profile, view.seat, view.seats, view.deadline);
    const double t = static_cast<double>(view.round) / static_cast<double>(view.deadline);
    const double target = conceder_target(exponent_, view.profile.reservation, t);
    if (view.standing_offer && view.standing_offer->proposer != view.seat &&
        utility(view.profile, view.standing_offer->outcome) >= target)
      return Accept{};
    if (next_ < sorted_.size()) {
      Outcome candidate = view.space.outcome_at(sorted_[next_]);
      if (utility(view.profile, candidate) >= target || !last_) {
        ++next_;
        last_ = candidate;
        return Propose{std::move(candidate)};
      }
    }
    if (!last_) last_ = view.space.outcome_at(sorted_.front());
    return Propose{*last_};
  }

 private:
  double exponent_;
  std::vector<std::uint64_t> sorted_;
  std::size_t next_ = 0;
  std::optional<Outcome> last_;
};

/// Always demands its best outcome.
class Hardliner : public Strategy {
 public:
  void start(const OutcomeSpace& space, const Profile& profile, std::size_t, std::size_t,
             std::uint64_t) override {
    best_ = space.outcome_at(sorted_ordinals(profile, space).front());
    best_utility_ = utility(profile, *best_);
  }

  Action decide(const NegotiationView& view, Rng&) override {
    if (!best_) start(view.space, view.profile, view.seat, view.seats, view.deadline);
    if (view.standing_offer && view.standing_offer->proposer != view.seat &&
        utility(view.profile, view.standing_offer->outcome) >= best_utility_)
      return Accept{};
    return Propose{*best_};
  }

 private:
  std::optional<Outcome> best_;
  double best_utility_ = 1.0;
};

/// Accepts anything at or above a fixed threshold, else proposes at random.
class RandomAgent : public Strategy {
 public:
  explicit RandomAgent(double accept_threshold) : threshold_(accept_threshold) {
    if (!(accept_threshold >= 0.0 && accept_threshold <= 1.0))
      throw StructuralError("random: threshold must lie in [0,1]");
  }

  Action decide(const NegotiationView& view, Rng& rng) override {
    if (view.standing_offer && view.standing_offer->proposer != view.seat &&
        utility(view.profile, view.standing_offer->outcome) >= threshold_)
      return Accept{};
    return Propose{view.space.outcome_at(uniform_index(rng, view.space.outcome_count()))};
  }

 private:
  double threshold_;
};

// ---------------------------------------------------------------------------
// Registry

struct StrategySpec {
  enum class Kind { Micro, Conceder, Hardliner, Random };
  Kind kind = Kind::Micro;
  MicroConfig micro;
  double parameter = 0.0;  // conceder exponent or random threshold
  std::string name;
};

inline std::vector<std::string> registry_names() {
  return {"micro-min", "micro-max", "micro-mean", "micro-min-nofix",
          "conceder:e=<real>", "hardliner", "random:p=<real>"};
}

class UnknownStrategy : public std::invalid_argument {
 public:
  explicit UnknownStrategy(const std::string& name)
      : std::invalid_argument("unknown agent '" + name + "'; known agents: " + known()) {}

 private:
  static std::string known() {
    std::string list;
    for (const auto& n : registry_names()) list += (list.empty() ? "" : ", ") + n;
    return list;
  }
};

namespace detail {

inline std::optional<double> parse_real(const std::string& text) {
  if (text.empty()) return std::nullopt;
  std::size_t used = 0;
  double value;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    return std::nullopt;
  }
  if (used != text.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

}  // namespace detail

inline StrategySpec parse_strategy(const std::string& name) {
  StrategySpec spec;
  spec.name = name;
  using Kind = StrategySpec::Kind;
  if (name == "micro-min") return spec;
  if (name == "micro-max") return spec.micro.variant = MicroVariant::Max, spec;
  if (name == "micro-mean") return spec.micro.variant = MicroVariant::Mean, spec;
  if (name == "micro-min-nofix") return spec.micro.count_acceptances = false, spec;
  if (name == "hardliner") return spec.kind = Kind::Hardliner, spec;
  if (name.rfind("conceder:e=", 0) == 0) {
    auto e = detail::parse_real(name.substr(11));
    if (!e || *e <= 0.0) throw UnknownStrategy(name);
    spec.kind = Kind::Conceder;
    spec.parameter = *e;
    return spec;
  }
  if (name.rfind("random:p=", 0) == 0) {
    auto p = detail::parse_real(name.substr(9));
    if (!p || *p < 0.0 || *p > 1.0) throw UnknownStrategy(name);
    spec.kind = Kind::Random;
    spec.parameter = *p;
    return spec;
  }
  throw UnknownStrategy(name);
}

inline std::unique_ptr<Strategy> make_strategy(const StrategySpec& spec) {
  switch (spec.kind) {
    case StrategySpec::Kind::Micro: return std::make_unique<MicroAgent>(spec.micro);
    case StrategySpec::Kind::Conceder: return std::make_unique<TimeConceder>(spec.parameter);
    case StrategySpec::Kind::Hardliner: return std::make_unique<Hardliner>();
    case StrategySpec::Kind::Random: return std::make_unique<RandomAgent>(spec.parameter);
  }
  return nullptr;
}

inline std::unique_ptr<Strategy> make_strategy(const std::string& name) {
  return make_strategy(parse_strategy(name));
}

}  // namespace micro
