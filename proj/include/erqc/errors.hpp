#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace erqc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller broke an operation's precondition (missing truth, unlabeled pair, ...).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

// The human side of the loop went away (interactive session closed, transcript exhausted).
class AbortError : public Error {
 public:
  using Error::Error;
};

}  // namespace erqc
