#pragma once

#include <stdexcept>

namespace twostage {

// Input lies outside the geometry, region, or state alphabet an operation accepts.
struct DomainError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Rates or settings that are negative, non-finite, or otherwise unusable.
struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A caller broke an operation's precondition (e.g. asking for non-drift moves at a drift step).
struct ContractError : std::logic_error {
  using std::logic_error::logic_error;
};

// No lambda bracketing the survival threshold was found below the configured maximum.
struct BracketError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A request would exceed a size limit (state space, site count).
struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace twostage
