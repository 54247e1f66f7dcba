#pragma once

#include <stdexcept>
#include <string>

#include "rfl/ast.hpp"

namespace rfl {

struct ParseError : std::runtime_error {
  Span span;
  std::string kind;  // SyntaxError, DuplicateName, UnknownConstructor,
                     // NonUniformArity, OverlappingPatterns, NonExhaustive
  ParseError(std::string k, Span sp, const std::string& msg)
      : std::runtime_error(msg), span(sp), kind(std::move(k)) {}
};

// Parses the concrete syntax into a desugared Program. Multi-equation
// definitions become a single case tree; guards become boolean cases;
// partial constructor applications are eta-wrapped.
Program parseProgram(const std::string& text);

// The built-in proof-combinator prelude: step combinators for each
// comparison operator (binary form plus a ternary form taking an explicit
// proof), `?` (application), `**`/QED (cast to the unit proposition),
// `trivial`, and the assumed extensionality operator `=*`.
const Program& loadPrelude();
const std::string& preludeSource();

}  // namespace rfl
