#pragma once

#include <stdexcept>
#include <string>

namespace eqc {

// Error raised while parsing a model file. line/col are 1-based; 0 means
// the location is not known (programmatic construction).
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string message, int line, int col)
      : std::runtime_error(format(message, line, col)),
        line_(line),
        col_(col) {}

  int line() const { return line_; }
  int col() const { return col_; }

 private:
  static std::string format(const std::string& message, int line, int col) {
    if (line <= 0) return message;
    return std::to_string(line) + ":" + std::to_string(col) + ": " + message;
  }
  int line_ = 0;
  int col_ = 0;
};

// Error raised while evaluating an expression (unbound name, division by
// zero, log of a nonpositive value).
class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Semantic error on a model-level operation: invalid construction,
// unknown intervention target, clamp value outside the declared domain,
// failed structural-solvability precondition, and the like.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace eqc
