#pragma once

#include <string>

#include "eqc/model.hpp"

namespace eqc {

// Parse the line-oriented model format:
//   model <name>
//   param <name> = <real>
//   var <name> in [lo, hi] init <real>        (bounds may be -inf / inf)
//   group <name> = (<var>, <var>, ...)
//   ddt <var> = <expression>
// '#' starts a comment. Declarations may appear in any order; every
// reference is checked after the whole file is read. Errors carry
// 1-based line/column positions.
Model parse_model(const std::string& text);

// Parse a single expression in the model grammar (identifiers stay
// unresolved). Used by tests and by serialized-expression loading.
ExprPtr parse_expression(const std::string& text);

Model load_model_file(const std::string& path);

}  // namespace eqc
