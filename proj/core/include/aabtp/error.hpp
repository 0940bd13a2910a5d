#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace aabtp {

// Violated precondition on a caller-supplied argument.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed input file. row() is the 1-based line number (header = 1), 0 if unknown.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t row)
      : std::runtime_error(row > 0 ? "line " + std::to_string(row) + ": " + what : what),
        row_(row) {}

  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

// A factorization failed even after jitter escalation.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace aabtp
