#pragma once

#include <stdexcept>
#include <string>

namespace qrelay {

// Scenario text could not be parsed; message carries file/line/field.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A declared invariant does not hold (bad config values, wrong topology
// for an operation, unsupported combination).
struct InvariantError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Privacy amplification asked to produce a non-positive output length.
struct KeyExhaustedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A chain leg failed to deliver a usable key.
struct ChainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace qrelay
