#pragma once

#include <stdexcept>
#include <string>

namespace phyot {

enum class ErrorCode {
  InvalidInput,
  NumericalSingularity,
  DegenerateTemplate,
  Parse,
  DuplicateFrame,
  Ordering,
  Io,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

/// Error raised by text parsers; carries the 1-based line that failed.
class ParseError : public Error {
public:
  ParseError(ErrorCode code, int line, const std::string& what)
      : Error(code, "line " + std::to_string(line) + ": " + what), line_(line) {}

  int line() const noexcept { return line_; }

private:
  int line_;
};

}  // namespace phyot
