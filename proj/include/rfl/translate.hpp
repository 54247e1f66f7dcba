#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "rfl/ast.hpp"
#include "rfl/logic.hpp"

// Embedding of types into sorts and of refinement expressions into the
// quantifier-free logic: lambdas/applications go through per-sort-pair
// lam/app symbols, data cases become checker-guarded if-chains with
// selector-substituted branches, and verification conditions are
// strengthened with ground alpha/beta-equivalence instances.

namespace rfl {

struct TranslateError {
  std::string kind;  // PoolExhausted, NonTerminatingSubterm, SortMismatch, Untranslatable
  Span span;
  std::string msg;
};

// Shared program facts needed by translation and checking.
struct DataWorld {
  struct CtorInfo {
    Name dataType;
    std::vector<Name> tyvars;
    std::vector<RefType> fields;   // declared field types
    RefType refinedType;           // full constructor type with measure-refined output
    Name checker;                  // generated isD measure
    std::vector<Name> selectors;   // generated per-field selD_i measures
    size_t index = 0;              // position within the data declaration
  };
  struct MeasureInfo {
    RefType type;  // domain -> result
    Name dataType;
    bool generated = false;
    Expr body;
  };

  std::map<Name, DataDecl> datas;
  std::map<Name, CtorInfo> ctors;
  std::map<Name, MeasureInfo> measures;
  // Measures grouped per data type, in declaration order (user first, then
  // generated checkers/selectors).
  std::map<Name, std::vector<Name>> measuresOf;

  bool isCtor(const Name& n) const { return ctors.count(n) != 0; }
  bool isMeasure(const Name& n) const { return measures.count(n) != 0; }
};

struct TransEnv {
  const DataWorld* world = nullptr;
  std::shared_ptr<LogicEnv> logic;
  // Every in-scope binder with its refinement type (params, ANF lets,
  // reflected/let/prop definitions at their generalized types).
  std::map<Name, RefType> vars;
  // Names that may not appear inside refinements (failed termination).
  std::set<Name> nonTerminating;
  // Pred-level aliases used when instantiating ground instances.
  std::map<Name, Pred> aliases;
};

Sort embedSort(const BaseType& b);
Sort embedSort(const RefType& t);

struct TransResult {
  Pred pred;
  Sort sort;
};

// Translates a refinement-level expression. Lambda binder types are inferred
// by erasure unification; unconstrained positions default to Univ.
TransResult translateExpr(TransEnv& env, const Expr& e);

// Conjunction of the translated refinements of terminating base-typed
// binders (functions and non-terminating binders contribute true).
Pred embedEnv(TransEnv& env, const std::vector<std::pair<Name, RefType>>& gamma);

VC makeVC(TransEnv& env, const std::vector<std::pair<Name, RefType>>& gamma,
          const Name& valueBinder, const BaseType& base, const Expr& lhsRefinement,
          const Expr& rhsRefinement, Span span, std::string provenance);

std::vector<Pred> alphaInstances(const VC& vc);
std::vector<Pred> betaInstances(const VC& vc, int budget, bool* budgetExceeded);

struct StrengthenOptions {
  int instanceBudget = 64;
};

// instances := alpha ∪ beta instances plus ground constructor/measure/coercion
// facts; deduplicated; notes records budget overflows.
void strengthen(VC& vc, TransEnv& env, const StrengthenOptions& opts,
                std::vector<std::string>* notes);

}  // namespace rfl
