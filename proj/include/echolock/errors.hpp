#pragma once

#include <stdexcept>
#include <string>

namespace echolock {

// Invalid user input: bad parameters, malformed scenarios, illegal sequences.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The integrator lost its invariants (trace blow-up, non-finite state).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace echolock
