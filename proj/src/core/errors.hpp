#pragma once

#include <stdexcept>
#include <string>

namespace odb {

// Unknown names and malformed selector strings (presets, policies,
// family specs) — argument-level problems.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Rejected input: a documented precondition does not hold (bad ranges,
// shape mismatches, inadmissible parameter combinations).
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unreadable, unwritable, or malformed files.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller bug: an internal contract was violated (e.g. querying indices
// before initialization finished).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace odb
