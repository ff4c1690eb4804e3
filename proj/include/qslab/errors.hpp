#pragma once

#include <stdexcept>
#include <string>

namespace qslab {

// Bad arguments or malformed input files. Maps to CLI exit status 1.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A metric axiom failed on user-supplied data.
class ValidationError : public InputError {
 public:
  using InputError::InputError;
};

// The computation itself could not complete (unreachable pair, calibration
// against atoms, no separating level). Maps to CLI exit status 2.
class ComputationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qslab
