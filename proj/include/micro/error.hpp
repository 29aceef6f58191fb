#pragma once

#include <stdexcept>
#include <string>

namespace micro {

/// Shapes that do not line up: outcome length vs issue count, empty inputs.
class StructuralError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The outcome space is larger than the configured enumeration cap.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input was syntactically broken. `what()` carries the location.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input parsed but violates an invariant; `what()` names the field.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Payoff data does not cover every (strategy, opponent pair) cell.
class CompletenessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace micro
