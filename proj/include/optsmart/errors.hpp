#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace optsmart {

/// Bad caller input (unknown object id, malformed workload parameters).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// API called in the wrong state (mid-block prune, unclaimed vertex relaxed).
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Malformed text record. Carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// An AU exceeded the miner's retry budget.
class LivelockError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Brute-force checker asked to search a history that is too large.
class SizeError : public std::length_error {
 public:
  using std::length_error::length_error;
};

}  // namespace optsmart
