#include <doctest.h>

#include <random>

#include "rfl/ast.hpp"
#include "rfl/eval.hpp"
#include "rfl/parser.hpp"

using namespace rfl;

namespace {

Expr lam(const char* x, Expr b) { return mkLam(Name(x), std::move(b)); }
Expr var(const char* x) { return mkVar(Name(x)); }

// De Bruijn conversion, the independent oracle for alpha equivalence and
// capture-avoiding substitution.
struct DB {
  enum class K { Idx, Free, Int, Bool, Unit, Const, Lam, App, Ctor, Case, Fix };
  K k = K::Free;
  int idx = 0;
  Name free;
  long long i = 0;
  bool b = false;
  Builtin op = Builtin::Eq;
  Name ctor;
  std::vector<DB> kids;
  std::vector<std::pair<Name, size_t>> altInfo;  // ctor name + binder count

  bool operator==(const DB& o) const {
    if (k != o.k || idx != o.idx || !(free == o.free) || i != o.i || b != o.b ||
        op != o.op || !(ctor == o.ctor) || kids.size() != o.kids.size() ||
        altInfo.size() != o.altInfo.size())
      return false;
    for (size_t j = 0; j < kids.size(); ++j)
      if (!(kids[j] == o.kids[j])) return false;
    for (size_t j = 0; j < altInfo.size(); ++j)
      if (!(altInfo[j].first == o.altInfo[j].first) ||
          altInfo[j].second != o.altInfo[j].second)
        return false;
    return true;
  }
};

DB toDB(const Expr& e, std::vector<Name>& env) {
  DB d;
  switch (e->kind) {
    case ExprNode::Kind::IntLit: d.k = DB::K::Int; d.i = e->intVal; return d;
    case ExprNode::Kind::BoolLit: d.k = DB::K::Bool; d.b = e->boolVal; return d;
    case ExprNode::Kind::UnitLit: d.k = DB::K::Unit; return d;
    case ExprNode::Kind::Const: d.k = DB::K::Const; d.op = e->op; return d;
    case ExprNode::Kind::Var: {
      for (size_t j = env.size(); j-- > 0;) {
        if (env[j] == e->name) {
          d.k = DB::K::Idx;
          d.idx = (int)(env.size() - 1 - j);
          return d;
        }
      }
      d.k = DB::K::Free;
      d.free = e->name;
      return d;
    }
    case ExprNode::Kind::Lam: {
      d.k = DB::K::Lam;
      env.push_back(e->name);
      d.kids.push_back(toDB(e->a, env));
      env.pop_back();
      return d;
    }
    case ExprNode::Kind::App:
      d.k = DB::K::App;
      d.kids.push_back(toDB(e->a, env));
      d.kids.push_back(toDB(e->b, env));
      return d;
    case ExprNode::Kind::Fix:
      d.k = DB::K::Fix;
      d.kids.push_back(toDB(e->a, env));
      return d;
    case ExprNode::Kind::Ctor: {
      d.k = DB::K::Ctor;
      d.ctor = e->name;
      for (const auto& a : e->args) d.kids.push_back(toDB(a, env));
      return d;
    }
    case ExprNode::Kind::Case: {
      d.k = DB::K::Case;
      d.kids.push_back(toDB(e->a, env));
      for (const auto& alt : e->alts) {
        d.altInfo.emplace_back(alt.ctor, alt.binders.size());
        env.push_back(e->name);
        for (const auto& b : alt.binders) env.push_back(b);
        d.kids.push_back(toDB(alt.rhs, env));
        env.resize(env.size() - alt.binders.size() - 1);
      }
      return d;
    }
  }
  return d;
}

DB toDB(const Expr& e) {
  std::vector<Name> env;
  return toDB(e, env);
}

// Random closed lambda terms over Int for property tests.
Expr randomTerm(std::mt19937& rng, std::vector<Name>& scope, int depth) {
  auto pick = [&](int n) { return (int)(rng() % (uint64_t)n); };
  if (depth == 0) {
    if (!scope.empty() && pick(2) == 0) return mkVar(scope[pick((int)scope.size())]);
    return mkIntLit(pick(10));
  }
  switch (pick(4)) {
    case 0: {
      Name x("x", pick(3) + 1);  // deliberately clashing names
      scope.push_back(x);
      Expr body = randomTerm(rng, scope, depth - 1);
      scope.pop_back();
      return mkLam(x, body);
    }
    case 1:
      return mkApp(randomTerm(rng, scope, depth - 1),
                   randomTerm(rng, scope, depth - 1));
    case 2:
      return mkBin(Builtin::Add, randomTerm(rng, scope, depth - 1),
                   randomTerm(rng, scope, depth - 1));
    default:
      if (!scope.empty()) return mkVar(scope[pick((int)scope.size())]);
      return mkIntLit(pick(10));
  }
}

}  // namespace

TEST_CASE("free variables treat binders correctly") {
  CHECK(freeVars(lam("x", var("x"))).empty());

  auto fx = freeVars(mkApp(var("f"), var("x")));
  CHECK(fx.size() == 2);
  CHECK(fx.count(Name("f")) == 1);
  CHECK(fx.count(Name("x")) == 1);

  // case y-binder scoping: Case(y, z, [(Cons,[h,t], h)]) has only z free.
  std::vector<CaseAlt> alts;
  alts.push_back({Name("Cons"), {Name("h"), Name("t")}, var("h")});
  Expr c = mkCase(Name("y"), var("z"), std::move(alts));
  auto fv = freeVars(c);
  CHECK(fv.size() == 1);
  CHECK(fv.count(Name("z")) == 1);
}

TEST_CASE("substitution basics") {
  CHECK(alphaEq(substitute(var("x"), Name("x"), mkIntLit(3)), mkIntLit(3)));
  // shadowing
  Expr idx = lam("x", var("x"));
  CHECK(alphaEq(substitute(idx, Name("x"), mkIntLit(3)), idx));
  // capture: (\y. x)[x := y] must rename the binder
  Expr e = lam("y", var("x"));
  Expr r = substitute(e, Name("x"), var("y"));
  CHECK(r->kind == ExprNode::Kind::Lam);
  CHECK(!(r->name == Name("y")));
  CHECK(r->a->kind == ExprNode::Kind::Var);
  CHECK(r->a->name == Name("y"));
  // oracle: De Bruijn form of the result equals De Bruijn of \z. y
  CHECK(toDB(r) == toDB(lam("z", var("y"))));
}

TEST_CASE("alpha equivalence with the De Bruijn oracle") {
  CHECK(alphaEq(lam("x", var("x")), lam("y", var("y"))));
  CHECK(!alphaEq(lam("x", var("x")), lam("x", mkIntLit(0))));
  Expr a = lam("x", lam("y", mkBin(Builtin::Add, var("x"), var("y"))));
  Expr b = lam("a", lam("b", mkBin(Builtin::Add, var("a"), var("b"))));
  CHECK(alphaEq(a, b));
  CHECK(toDB(a) == toDB(b));
  // and a negative nested case
  Expr c = lam("a", lam("b", mkBin(Builtin::Add, var("b"), var("a"))));
  CHECK(!alphaEq(a, c));
}

TEST_CASE("alpha equivalence agrees with De Bruijn on random terms") {
  std::mt19937 rng(7);
  std::vector<Name> scope;
  for (int i = 0; i < 300; ++i) {
    Expr a = randomTerm(rng, scope, 4);
    Expr b = randomTerm(rng, scope, 4);
    CHECK(alphaEq(a, b) == (toDB(a) == toDB(b)));
    CHECK(alphaEq(a, a));
  }
}

TEST_CASE("alpha equivalence is an equivalence relation on random terms") {
  std::mt19937 rng(11);
  std::vector<Name> scope;
  std::vector<Expr> terms;
  for (int i = 0; i < 40; ++i) terms.push_back(randomTerm(rng, scope, 3));
  for (const auto& a : terms)
    for (const auto& b : terms) {
      CHECK(alphaEq(a, b) == alphaEq(b, a));
      if (!alphaEq(a, b)) continue;
      for (const auto& c : terms)
        if (alphaEq(b, c)) CHECK(alphaEq(a, c));
    }
}

TEST_CASE("substitute then free_vars subset property") {
  std::mt19937 rng(13);
  std::vector<Name> scope;
  for (int i = 0; i < 200; ++i) {
    scope = {Name("u"), Name("w")};
    Expr e = randomTerm(rng, scope, 4);
    scope.clear();
    Expr v = randomTerm(rng, scope, 3);
    Name x("u");
    Expr r = substitute(e, x, v);
    auto fvR = freeVars(r);
    auto fvE = freeVars(e);
    auto fvV = freeVars(v);
    fvE.erase(x);
    for (const auto& n : fvR) {
      bool inE = fvE.count(n) != 0;
      bool inV = occursFree(e, x) && fvV.count(n) != 0;
      CHECK((inE || inV));
    }
  }
}

TEST_CASE("anf names applications and agrees with the evaluator") {
  Program p = parseProgram(R"(
reflect fib :: n:{v:Int | 0 <= v} -> {v:Int | 0 <= v} ;
  fib n | n == 0 = 0 ;
  fib n | n == 1 = 1 ;
  fib n = fib (n - 1) + fib (n - 2) ;
)");
  DefTable defs = definitionTable(loadPrelude(), p);
  NameSupply ns;

  // fib 2 = fib 1 + fib 0 gets three named calls and an atomic goal.
  Expr goal = mkBin(Builtin::Eq, mkApp(var("fib"), mkIntLit(2)),
                    mkBin(Builtin::Add, mkApp(var("fib"), mkIntLit(1)),
                          mkApp(var("fib"), mkIntLit(0))));
  Expr norm = anfNormalize(goal, ns);
  int lets = 0;
  Expr cur = norm;
  while (cur->kind == ExprNode::Kind::App && cur->a->kind == ExprNode::Kind::Lam) {
    ++lets;
    cur = cur->a->a;
  }
  CHECK(lets == 4);  // three calls plus the + application
  // the final atom is an equality over variables
  CHECK(cur->kind == ExprNode::Kind::App);
  auto evalBoth = [&](const Expr& e) {
    EvalResult r = eval(e, kDefaultFuel, defs);
    REQUIRE(r.isValue());
    return printExpr(r.value);
  };
  CHECK(evalBoth(goal) == evalBoth(norm));

  // literals stay put
  Expr three = mkIntLit(3);
  CHECK(anfNormalize(three, ns) == three);

  // f (g x) binds the inner call
  Expr fgx = mkApp(var("f"), mkApp(var("g"), var("x")));
  Expr n2 = anfNormalize(fgx, ns);
  CHECK(n2->kind == ExprNode::Kind::App);
  CHECK(n2->a->kind == ExprNode::Kind::Lam);
}

TEST_CASE("anf preserves evaluation on random closed arithmetic") {
  std::mt19937 rng(17);
  DefTable defs;
  NameSupply ns;
  std::vector<Name> scope;
  for (int i = 0; i < 200; ++i) {
    scope.clear();
    Expr e = randomTerm(rng, scope, 3);
    if (!freeVars(e).empty()) continue;
    EvalResult r1 = eval(e, 10000, defs);
    EvalResult r2 = eval(anfNormalize(e, ns), 10000, defs);
    CHECK(r1.kind == r2.kind);
    if (r1.isValue() && r2.isValue())
      CHECK(alphaEq(r1.value, r2.value));
  }
}
