#pragma once

#include <memory>
#include <string>
#include <vector>

#include "rfl/ast.hpp"
#include "rfl/logic.hpp"
#include "rfl/smt.hpp"
#include "rfl/translate.hpp"

// Bidirectional refinement checking: reflection strengthening (exact types),
// measure-refined constructors, selfification, termination checking, and
// subtyping discharged through VC validity.

namespace rfl {

struct Diagnostic {
  enum class Level { Fail, Unknown, Error, Info };
  Level level = Level::Error;
  std::string file;
  Span span;
  std::string rule;  // Sub-Base, NonDecreasingCall, ShapeMismatch, ...
  std::string message;
  std::string renderedVC;
  std::string countermodel;
};

struct Obligation {
  std::string declName;
  int index = 0;  // per declaration
  Span span;
  std::string rule;     // Sub-Base, NonDecreasingCall, MetricNonNegative
  std::string metric;   // rendered metric for termination obligations
  VC vc;
  Verdict verdict;
  bool internal = false;  // prelude obligations
};

struct CheckOptions {
  int lambdaPool = 8;
  int instanceBudget = 64;
  long long branchBudget = 10000;
  int bbDepth = 32;
  std::string externalSolver;  // empty = builtin decision procedure
  bool verbose = false;
};

struct CheckResult {
  std::vector<Obligation> obligations;
  std::vector<Diagnostic> diagnostics;
  bool accepted = false;
  DataWorld world;
  std::shared_ptr<LogicEnv> logic;

  bool allValid() const;
};

CheckResult checkProgram(const Program& prog, const CheckOptions& opts = {},
                         const std::string& file = "");

// --- pieces exposed for unit tests -----------------------------------------

struct CheckError {
  std::string kind;
  Span span;
  std::string msg;
};

// Reflection of a term into a type: conjoins v = e on the result base type,
// descending under lambdas for function types.
RefType exactType(const RefType& t, const Expr& e);

// Constructor output refinements from the measures of the data type
// (user measures first, then selectors and checkers).
std::map<Name, RefType> refineConstructors(const DataDecl& d,
                                           const std::vector<MeasureDef>& ms);

}  // namespace rfl
