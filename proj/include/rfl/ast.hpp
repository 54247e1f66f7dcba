#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

// Core term and type representation: a small strict functional language
// whose function definitions can be reflected into refinement types.
// All nodes are immutable; every operation builds new terms.

namespace rfl {

struct Span {
  uint32_t lo = 0;
  uint32_t hi = 0;
  bool valid() const { return hi > lo; }
};

// A name is a source identifier plus a freshness counter. Counter 0 means
// "as written in source"; fresh names produced during checking get positive
// counters so diagnostics stay reproducible run to run.
struct Name {
  std::string base;
  int unique = 0;

  Name() = default;
  Name(std::string b, int u = 0) : base(std::move(b)), unique(u) {}

  bool operator==(const Name& o) const { return unique == o.unique && base == o.base; }
  bool operator!=(const Name& o) const { return !(*this == o); }
  bool operator<(const Name& o) const {
    if (base != o.base) return base < o.base;
    return unique < o.unique;
  }
  std::string str() const {
    if (unique == 0) return base;
    return base + "#" + std::to_string(unique);
  }
};

class NameSupply {
 public:
  Name fresh(std::string base) { return Name(std::move(base), next_++); }
  Name freshLike(const Name& n) { return Name(n.base, next_++); }

 private:
  int next_ = 1;
};

enum class Builtin { Eq, Ne, Lt, Le, Gt, Ge, And, Or, Not, Add, Sub };

const char* builtinName(Builtin op);
bool builtinIsUnary(Builtin op);

// ---------------------------------------------------------------------------
// Base types

struct BaseType {
  enum class Kind { Int, Bool, Unit, Var, Data };
  Kind kind = Kind::Int;
  Name name;                     // Var / Data
  std::vector<BaseType> params;  // Data

  static BaseType mkInt() { return BaseType{Kind::Int, {}, {}}; }
  static BaseType mkBool() { return BaseType{Kind::Bool, {}, {}}; }
  static BaseType mkUnit() { return BaseType{Kind::Unit, {}, {}}; }
  static BaseType mkVar(Name a) { return BaseType{Kind::Var, std::move(a), {}}; }
  static BaseType mkData(Name d, std::vector<BaseType> ps) {
    return BaseType{Kind::Data, std::move(d), std::move(ps)};
  }

  bool operator==(const BaseType& o) const;
};

// ---------------------------------------------------------------------------
// Expressions

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

struct CaseAlt {
  Name ctor;                  // constructor name; "True"/"False" for boolean case
  std::vector<Name> binders;  // field binders
  Expr rhs;
};

struct ExprNode {
  enum class Kind { IntLit, BoolLit, UnitLit, Var, Const, Lam, App, Ctor, Case, Fix };
  Kind kind;
  Span span;

  long long intVal = 0;       // IntLit
  bool boolVal = false;       // BoolLit
  Name name;                  // Var / Lam binder / Ctor name / Case scrutinee-binder
  Builtin op = Builtin::Eq;   // Const
  Expr a, b;                  // Lam body (a) / App f (a), arg (b) / Case scrutinee (a) / Fix inner (a)
  std::vector<Expr> args;     // Ctor arguments
  std::vector<CaseAlt> alts;  // Case alternatives
};

Expr mkIntLit(long long v, Span sp = {});
Expr mkBoolLit(bool v, Span sp = {});
Expr mkUnitLit(Span sp = {});
Expr mkVar(Name x, Span sp = {});
Expr mkConst(Builtin op, Span sp = {});
Expr mkLam(Name x, Expr body, Span sp = {});
Expr mkApp(Expr f, Expr arg, Span sp = {});
Expr mkCtor(Name d, std::vector<Expr> args, Span sp = {});
Expr mkCase(Name scrutBinder, Expr scrut, std::vector<CaseAlt> alts, Span sp = {});
Expr mkFix(Expr inner, Span sp = {});

// Convenience builders used all over the checker.
Expr mkBin(Builtin op, Expr l, Expr r);
Expr mkNot(Expr e);
Expr mkAnd(Expr l, Expr r);  // folds true-literals away
Expr mkTrue();

bool isValue(const Expr& e);

// ---------------------------------------------------------------------------
// Refinement types

struct RefTypeNode;
using RefType = std::shared_ptr<const RefTypeNode>;

enum class TermLabel { Terminating, Unlabeled };

struct RefTypeNode {
  bool isFun = false;

  // Base: { binder : base^label | refinement }
  Name binder;
  BaseType base;
  TermLabel label = TermLabel::Terminating;
  Expr refinement;

  // Fun: param : domain -> codomain
  Name param;
  RefType domain;
  RefType codomain;
};

RefType mkBase(Name binder, BaseType b, Expr refinement,
               TermLabel label = TermLabel::Terminating);
RefType mkFun(Name param, RefType domain, RefType codomain);
RefType trivialBase(BaseType b);

// ---------------------------------------------------------------------------
// Declarations and programs

struct CtorDecl {
  Name name;
  std::vector<RefType> fields;
  Span span;
};

struct DataDecl {
  Name name;
  std::vector<Name> tyvars;
  std::vector<CtorDecl> ctors;
  Span span;
};

struct MeasureDef {
  Name name;
  RefType type;  // dataType -> result
  Expr body;     // single-argument lambda whose body is one case over the argument
  Span span;
  bool generated = false;  // checker/selector measures synthesized from a data decl
};

using TermMetric = std::vector<Expr>;

struct ReflectDecl {
  Name name;
  RefType type;
  Expr body;
  std::optional<TermMetric> metric;
  Span span;
};

struct LetDecl {
  Name name;
  RefType type;
  std::optional<Expr> body;  // empty body = assumed (prelude's function extensionality)
  std::optional<TermMetric> metric;
  Span span;
};

struct PropDecl {
  Name name;
  RefType type;
  Expr body;
  std::optional<TermMetric> metric;
  Span span;
};

struct Program {
  std::vector<DataDecl> datas;
  std::vector<MeasureDef> measures;
  std::vector<ReflectDecl> reflects;
  std::vector<LetDecl> lets;
  std::vector<PropDecl> props;

  enum class DeclKind { Data, Measure, Reflect, Let, Prop };
  std::vector<std::pair<DeclKind, size_t>> order;  // declaration order

  void pushData(DataDecl d);
  void pushMeasure(MeasureDef m);
  void pushReflect(ReflectDecl r);
  void pushLet(LetDecl l);
  void pushProp(PropDecl p);
  bool empty() const { return order.empty(); }
};

// Checker (is<Ctor>) and per-field selector (sel<Ctor>_i) measures derived
// from a data declaration.
std::vector<MeasureDef> generatedMeasures(const DataDecl& d);

// ---------------------------------------------------------------------------
// Term algebra

std::set<Name> freeVars(const Expr& e);
bool occursFree(const Expr& e, const Name& x);

// Capture-avoiding substitution e[x := v]; binders are renamed deterministically
// when v's free variables would be captured.
Expr substitute(const Expr& e, const Name& x, const Expr& v);

bool alphaEq(const Expr& e1, const Expr& e2);

// A-normalization: names every application, operator application and
// constructor application with an immediately-applied lambda so call sites
// become environment binders. Lambda bodies and case branches are normalized
// recursively; the result is beta-equivalent to the input.
Expr anfNormalize(const Expr& e, NameSupply& supply);

// Type helpers shared by checker and translation.
std::set<Name> freeTyVars(const RefType& t);
RefType substTypeExpr(const RefType& t, const Name& x, const Expr& e);
RefType renameBinder(const RefType& t, const Name& to);  // base-binder rename

// ---------------------------------------------------------------------------
// Printing (concrete syntax; parse of the output is alpha-equal to the input)

std::string printExpr(const Expr& e);
std::string printBaseType(const BaseType& b);
std::string printType(const RefType& t);
std::string printProgram(const Program& p);

}  // namespace rfl
