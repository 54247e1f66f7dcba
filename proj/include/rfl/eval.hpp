#pragma once

#include <map>
#include <optional>
#include <string>

#include "rfl/ast.hpp"

namespace rfl {

// Reference small-step call-by-value semantics. Serves as the oracle for
// translation-correctness property tests and derived example values.

struct DefTable {
  std::map<Name, Expr> defs;

  void add(const Name& n, Expr body) { defs[n] = std::move(body); }
  const Expr* lookup(const Name& n) const {
    auto it = defs.find(n);
    return it == defs.end() ? nullptr : &it->second;
  }
};

// Builds the definition table of a program: reflects, lets with bodies,
// measures (user-defined and generated checkers/selectors).
DefTable definitionTable(const Program& prelude, const Program& prog);

struct EvalResult {
  enum class Kind { Value, OutOfFuel, Stuck };
  Kind kind;
  Expr value;           // Value
  long long stepsUsed = 0;  // OutOfFuel
  std::string redex;    // Stuck: description of the stuck subterm

  bool isValue() const { return kind == Kind::Value; }
};

struct StuckError {
  std::string what;
};

// One contextual step; std::nullopt iff e is a value. Throws StuckError when
// no rule applies.
std::optional<Expr> step(const Expr& e, const DefTable& defs);

constexpr long long kDefaultFuel = 100000;

EvalResult eval(const Expr& e, long long fuel, const DefTable& defs);

// Saturated builtin application. For `=` both arguments must be non-function
// values; comparing lambdas throws (only the logic reasons about function
// equality).
Expr delta(Builtin op, const Expr& lhs, const Expr& rhs);
Expr deltaUnary(Builtin op, const Expr& arg);

}  // namespace rfl
