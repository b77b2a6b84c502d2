#pragma once

#include <stdexcept>

namespace bpsim {

// Bad input: malformed files, inconsistent parameters, unknown ids.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A run invariant broke mid-simulation. Always a bug, never a data problem.
struct SimError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The LP solver could not certify its own answer.
struct LpError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace bpsim
