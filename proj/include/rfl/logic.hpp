#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "rfl/ast.hpp"

// The target logic: quantifier-free equality + uninterpreted functions +
// linear integer arithmetic, with lambdas/applications defunctionalized
// through per-sort-pair lam/app symbols.

namespace rfl {

struct Sort {
  enum class Kind { Int, Bool, Univ, Fun };
  Kind kind = Kind::Univ;
  std::shared_ptr<const Sort> arg, res;  // Fun: uninterpreted function-value sort

  static Sort mkInt() { return Sort{Kind::Int, nullptr, nullptr}; }
  static Sort mkBool() { return Sort{Kind::Bool, nullptr, nullptr}; }
  static Sort mkUniv() { return Sort{Kind::Univ, nullptr, nullptr}; }
  static Sort mkFun(Sort a, Sort r) {
    return Sort{Kind::Fun, std::make_shared<const Sort>(std::move(a)),
                std::make_shared<const Sort>(std::move(r))};
  }

  bool operator==(const Sort& o) const;
  bool operator<(const Sort& o) const { return str() < o.str(); }
  bool isFun() const { return kind == Kind::Fun; }

  std::string str() const;  // Int | Bool | Univ | Fun<a,b>
};

enum class PredOp { Eq, Ne, Lt, Le, Gt, Ge, And, Or, Add, Sub };

const char* predOpName(PredOp op);

struct PredNode;
using Pred = std::shared_ptr<const PredNode>;

struct PredNode {
  enum class Kind { Int, Bool, Var, App, Bin, Not, Ite };
  Kind kind;

  long long intVal = 0;
  bool boolVal = false;

  std::string var;  // Var
  Sort sort;        // Var: its sort; App: result sort; others derived
  int pool = 0;     // Var: lambda-pool index (>0 iff a pool binder)

  std::string sym;         // App symbol name
  std::vector<Pred> args;  // App arguments

  PredOp op = PredOp::Eq;  // Bin
  Pred a, b, c;            // Bin l/r, Not a, Ite c=a t=b e=c
};

Pred pInt(long long v);
Pred pBool(bool v);
Pred pVar(std::string name, Sort s, int pool = 0);
Pred pApp(std::string sym, std::vector<Pred> args, Sort resultSort);
Pred pBin(PredOp op, Pred l, Pred r);
Pred pNot(Pred p);
Pred pIte(Pred c, Pred t, Pred e);
Pred pAndAll(const std::vector<Pred>& ps);  // true for empty

Sort sortOf(const Pred& p);
bool predEq(const Pred& a, const Pred& b);
std::string printPred(const Pred& p);  // deterministic S-expression

// Replaces every occurrence of variable `var` by `to` (pool binders are free
// names in the logic; no capture is possible).
Pred substPredVar(const Pred& p, const std::string& var, const Pred& to);

// Largest lambda-pool index bound by a lam of argument sort s inside p;
// 0 when none.
int maxlam(const Sort& s, const Pred& p);

// Lambda-binder pool variable for a sort.
std::string poolVarName(const Sort& s, int index);
Pred poolVar(const Sort& s, int index);

std::string appSymbol(const Sort& arg, const Sort& res);
std::string lamSymbol(const Sort& arg, const Sort& res);
bool isLamSymbol(const std::string& sym, Sort* argSort = nullptr);
bool isAppSymbol(const std::string& sym);

// ---------------------------------------------------------------------------

struct SymbolSig {
  std::vector<Sort> args;
  Sort res;
};

// Declared logic symbols: constructor images, measure/checker/selector
// symbols, monomorphized app/lam pairs, coercions, plus the global
// lambda-binder pool.
struct LogicEnv {
  std::map<std::string, SymbolSig> symbols;
  int lambdaPool = 8;

  void declare(const std::string& name, SymbolSig sig) {
    symbols.emplace(name, std::move(sig));
  }
  bool declared(const std::string& name) const { return symbols.count(name) != 0; }

  // Declares app/lam for the pair and the binder pool for the argument sort.
  void ensureAppLam(const Sort& arg, const Sort& res);
  void ensurePool(const Sort& s);
};

struct VC {
  Pred hypothesis;
  Pred goal;
  std::vector<Pred> instances;
  std::shared_ptr<LogicEnv> env;
  Span span;
  std::string provenance;  // e.g. "fib.rfl pf_fib2 #2 [Sub-Base]"
};

// Stable rendering: `decls:` sorted symbol list, then hyp/inst/goal
// S-expressions.
std::string renderVC(const VC& vc);

// Collects every variable (with sort) and symbol occurring in the given preds.
void collectVars(const Pred& p, std::map<std::string, Sort>& out);
void collectSymbols(const Pred& p, std::map<std::string, size_t>& arity);
void collectSubterms(const Pred& p, std::vector<Pred>& out);

}  // namespace rfl
