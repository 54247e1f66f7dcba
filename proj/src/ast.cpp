#include "rfl/ast.hpp"

#include <algorithm>
#include <cassert>
#include <cctype>
#include <functional>
#include <map>
#include <sstream>

namespace rfl {

const char* builtinName(Builtin op) {
  switch (op) {
    case Builtin::Eq: return "=";
    case Builtin::Ne: return "/=";
    case Builtin::Lt: return "<";
    case Builtin::Le: return "<=";
    case Builtin::Gt: return ">";
    case Builtin::Ge: return ">=";
    case Builtin::And: return "&&";
    case Builtin::Or: return "||";
    case Builtin::Not: return "not";
    case Builtin::Add: return "+";
    case Builtin::Sub: return "-";
  }
  return "?";
}

bool builtinIsUnary(Builtin op) { return op == Builtin::Not; }

bool BaseType::operator==(const BaseType& o) const {
  if (kind != o.kind) return false;
  switch (kind) {
    case Kind::Int:
    case Kind::Bool:
    case Kind::Unit: return true;
    case Kind::Var: return name == o.name;
    case Kind::Data:
      if (name != o.name || params.size() != o.params.size()) return false;
      for (size_t i = 0; i < params.size(); ++i)
        if (!(params[i] == o.params[i])) return false;
      return true;
  }
  return false;
}

// ---------------------------------------------------------------------------

static Expr make(ExprNode n) { return std::make_shared<const ExprNode>(std::move(n)); }

Expr mkIntLit(long long v, Span sp) {
  ExprNode n;
  n.kind = ExprNode::Kind::IntLit;
  n.intVal = v;
  n.span = sp;
  return make(std::move(n));
}
Expr mkBoolLit(bool v, Span sp) {
  ExprNode n;
  n.kind = ExprNode::Kind::BoolLit;
  n.boolVal = v;
  n.span = sp;
  return make(std::move(n));
}
Expr mkUnitLit(Span sp) {
  ExprNode n;
  n.kind = ExprNode::Kind::UnitLit;
  n.span = sp;
  return make(std::move(n));
}
Expr mkVar(Name x, Span sp) {
  ExprNode n;
  n.kind = ExprNode::Kind::Var;
  n.name = std::move(x);
  n.span = sp;
  return make(std::move(n));
}
Expr mkConst(Builtin op, Span sp) {
  ExprNode n;
  n.kind = ExprNode::Kind::Const;
  n.op = op;
  n.span = sp;
  return make(std::move(n));
}
Expr mkLam(Name x, Expr body, Span sp) {
  ExprNode n;
  n.kind = ExprNode::Kind::Lam;
  n.name = std::move(x);
  n.a = std::move(body);
  n.span = sp;
  return make(std::move(n));
}
Expr mkApp(Expr f, Expr arg, Span sp) {
  ExprNode n;
  n.kind = ExprNode::Kind::App;
  n.a = std::move(f);
  n.b = std::move(arg);
  n.span = sp;
  return make(std::move(n));
}
Expr mkCtor(Name d, std::vector<Expr> args, Span sp) {
  ExprNode n;
  n.kind = ExprNode::Kind::Ctor;
  n.name = std::move(d);
  n.args = std::move(args);
  n.span = sp;
  return make(std::move(n));
}
Expr mkCase(Name scrutBinder, Expr scrut, std::vector<CaseAlt> alts, Span sp) {
  ExprNode n;
  n.kind = ExprNode::Kind::Case;
  n.name = std::move(scrutBinder);
  n.a = std::move(scrut);
  n.alts = std::move(alts);
  n.span = sp;
  return make(std::move(n));
}
Expr mkFix(Expr inner, Span sp) {
  ExprNode n;
  n.kind = ExprNode::Kind::Fix;
  n.a = std::move(inner);
  n.span = sp;
  return make(std::move(n));
}

Expr mkBin(Builtin op, Expr l, Expr r) {
  return mkApp(mkApp(mkConst(op), std::move(l)), std::move(r));
}
Expr mkNot(Expr e) { return mkApp(mkConst(Builtin::Not), std::move(e)); }
Expr mkTrue() { return mkBoolLit(true); }

Expr mkAnd(Expr l, Expr r) {
  if (l->kind == ExprNode::Kind::BoolLit && l->boolVal) return r;
  if (r->kind == ExprNode::Kind::BoolLit && r->boolVal) return l;
  return mkBin(Builtin::And, std::move(l), std::move(r));
}

bool isValue(const Expr& e) {
  switch (e->kind) {
    case ExprNode::Kind::IntLit:
    case ExprNode::Kind::BoolLit:
    case ExprNode::Kind::UnitLit:
    case ExprNode::Kind::Lam:
    case ExprNode::Kind::Const: return true;
    case ExprNode::Kind::Ctor:
      return std::all_of(e->args.begin(), e->args.end(),
                         [](const Expr& a) { return isValue(a); });
    case ExprNode::Kind::App: {
      // Partially applied binary operator awaiting its second argument.
      const Expr& f = e->a;
      return f->kind == ExprNode::Kind::Const && !builtinIsUnary(f->op) && isValue(e->b);
    }
    default: return false;
  }
}

// ---------------------------------------------------------------------------

RefType mkBase(Name binder, BaseType b, Expr refinement, TermLabel label) {
  auto n = std::make_shared<RefTypeNode>();
  n->isFun = false;
  n->binder = std::move(binder);
  n->base = std::move(b);
  n->label = label;
  n->refinement = std::move(refinement);
  return n;
}

RefType mkFun(Name param, RefType domain, RefType codomain) {
  auto n = std::make_shared<RefTypeNode>();
  n->isFun = true;
  n->param = std::move(param);
  n->domain = std::move(domain);
  n->codomain = std::move(codomain);
  return n;
}

RefType trivialBase(BaseType b) { return mkBase(Name("_v"), std::move(b), mkTrue()); }

// ---------------------------------------------------------------------------

void Program::pushData(DataDecl d) {
  order.emplace_back(DeclKind::Data, datas.size());
  datas.push_back(std::move(d));
}
void Program::pushMeasure(MeasureDef m) {
  order.emplace_back(DeclKind::Measure, measures.size());
  measures.push_back(std::move(m));
}
void Program::pushReflect(ReflectDecl r) {
  order.emplace_back(DeclKind::Reflect, reflects.size());
  reflects.push_back(std::move(r));
}
void Program::pushLet(LetDecl l) {
  order.emplace_back(DeclKind::Let, lets.size());
  lets.push_back(std::move(l));
}
void Program::pushProp(PropDecl p) {
  order.emplace_back(DeclKind::Prop, props.size());
  props.push_back(std::move(p));
}

// ---------------------------------------------------------------------------
// Generated measures

std::vector<MeasureDef> generatedMeasures(const DataDecl& d) {
  std::vector<MeasureDef> out;
  std::vector<BaseType> params;
  for (const auto& tv : d.tyvars) params.push_back(BaseType::mkVar(tv));
  BaseType domain = BaseType::mkData(d.name, params);

  // Checkers: is<Ctor> : T -> Bool, true exactly on that constructor.
  for (const auto& c : d.ctors) {
    MeasureDef m;
    m.name = Name("is" + c.name.base);
    m.generated = true;
    m.type = mkFun(Name("$x"), trivialBase(domain), trivialBase(BaseType::mkBool()));
    Name arg("$x");
    std::vector<CaseAlt> alts;
    for (const auto& c2 : d.ctors) {
      std::vector<Name> binders;
      for (size_t j = 0; j < c2.fields.size(); ++j)
        binders.push_back(Name("$f" + std::to_string(j + 1)));
      alts.push_back({c2.name, std::move(binders), mkBoolLit(c2.name == c.name)});
    }
    m.body = mkLam(arg, mkCase(Name("$s"), mkVar(arg), std::move(alts)));
    m.span = c.span;
    out.push_back(std::move(m));
  }

  // Selectors: sel<Ctor>_i : T -> field_i, defined on that constructor only.
  for (const auto& c : d.ctors) {
    for (size_t j = 0; j < c.fields.size(); ++j) {
      MeasureDef m;
      m.name = Name("sel" + c.name.base + "_" + std::to_string(j + 1));
      m.generated = true;
      m.type = mkFun(Name("$x"), trivialBase(domain), c.fields[j]);
      Name arg("$x");
      std::vector<Name> binders;
      for (size_t k = 0; k < c.fields.size(); ++k)
        binders.push_back(Name("$f" + std::to_string(k + 1)));
      Expr rhs = mkVar(binders[j]);
      std::vector<CaseAlt> alts;
      alts.push_back({c.name, std::move(binders), rhs});
      m.body = mkLam(arg, mkCase(Name("$s"), mkVar(arg), std::move(alts)));
      m.span = c.span;
      out.push_back(std::move(m));
    }
  }
  return out;
}


// ---------------------------------------------------------------------------
// Free variables

static void freeVarsInto(const Expr& e, std::set<Name>& bound, std::set<Name>& out) {
  switch (e->kind) {
    case ExprNode::Kind::IntLit:
    case ExprNode::Kind::BoolLit:
    case ExprNode::Kind::UnitLit:
    case ExprNode::Kind::Const: return;
    case ExprNode::Kind::Var:
      if (!bound.count(e->name)) out.insert(e->name);
      return;
    case ExprNode::Kind::Lam: {
      bool fresh = bound.insert(e->name).second;
      freeVarsInto(e->a, bound, out);
      if (fresh) bound.erase(e->name);
      return;
    }
    case ExprNode::Kind::App:
      freeVarsInto(e->a, bound, out);
      freeVarsInto(e->b, bound, out);
      return;
    case ExprNode::Kind::Ctor:
      for (const auto& a : e->args) freeVarsInto(a, bound, out);
      return;
    case ExprNode::Kind::Fix: freeVarsInto(e->a, bound, out); return;
    case ExprNode::Kind::Case: {
      freeVarsInto(e->a, bound, out);
      for (const auto& alt : e->alts) {
        std::vector<Name> added;
        if (bound.insert(e->name).second) added.push_back(e->name);
        for (const auto& b : alt.binders)
          if (bound.insert(b).second) added.push_back(b);
        freeVarsInto(alt.rhs, bound, out);
        for (const auto& b : added) bound.erase(b);
      }
      return;
    }
  }
}

std::set<Name> freeVars(const Expr& e) {
  std::set<Name> bound, out;
  freeVarsInto(e, bound, out);
  return out;
}

bool occursFree(const Expr& e, const Name& x) { return freeVars(e).count(x) != 0; }

// ---------------------------------------------------------------------------
// Substitution

namespace {

class Substituter {
 public:
  Substituter(const Name& x, const Expr& v) : x_(x), v_(v) {
    vFree_ = freeVars(v);
    floor_ = 0;
    scanMax(v);
  }

  Expr run(const Expr& e) {
    scanMax(e);
    return go(e);
  }

 private:
  void scanMax(const Expr& e) {
    switch (e->kind) {
      case ExprNode::Kind::Var:
      case ExprNode::Kind::Lam: floor_ = std::max(floor_, e->name.unique); break;
      case ExprNode::Kind::Case:
        floor_ = std::max(floor_, e->name.unique);
        for (const auto& alt : e->alts)
          for (const auto& b : alt.binders) floor_ = std::max(floor_, b.unique);
        break;
      default: break;
    }
    if (e->a) scanMax(e->a);
    if (e->b) scanMax(e->b);
    for (const auto& a : e->args) scanMax(a);
    for (const auto& alt : e->alts) scanMax(alt.rhs);
  }

  Name freshen(const Name& n) { return Name(n.base, ++floor_); }

  Expr go(const Expr& e) {
    switch (e->kind) {
      case ExprNode::Kind::IntLit:
      case ExprNode::Kind::BoolLit:
      case ExprNode::Kind::UnitLit:
      case ExprNode::Kind::Const: return e;
      case ExprNode::Kind::Var: return e->name == x_ ? v_ : e;
      case ExprNode::Kind::Lam: {
        if (e->name == x_) return e;  // shadowed
        if (vFree_.count(e->name)) {
          Name y = freshen(e->name);
          Expr body = substitute(e->a, e->name, mkVar(y));
          return mkLam(y, go(body), e->span);
        }
        return mkLam(e->name, go(e->a), e->span);
      }
      case ExprNode::Kind::App: return mkApp(go(e->a), go(e->b), e->span);
      case ExprNode::Kind::Fix: return mkFix(go(e->a), e->span);
      case ExprNode::Kind::Ctor: {
        std::vector<Expr> args;
        args.reserve(e->args.size());
        for (const auto& a : e->args) args.push_back(go(a));
        return mkCtor(e->name, std::move(args), e->span);
      }
      case ExprNode::Kind::Case: {
        Expr scrut = go(e->a);
        Name sb = e->name;
        std::vector<CaseAlt> alts = e->alts;
        // The scrutinee-binder scopes over every alternative; rename it
        // globally when it would capture a free variable of v.
        if (sb != x_ && vFree_.count(sb)) {
          Name y = freshen(sb);
          for (auto& alt : alts) alt.rhs = substitute(alt.rhs, sb, mkVar(y));
          sb = y;
        }
        std::vector<CaseAlt> out;
        out.reserve(alts.size());
        for (auto& alt : alts) {
          bool shadowed =
              sb == x_ || std::any_of(alt.binders.begin(), alt.binders.end(),
                                      [&](const Name& b) { return b == x_; });
          if (shadowed) {
            out.push_back(alt);
            continue;
          }
          std::vector<Name> binders = alt.binders;
          Expr rhs = alt.rhs;
          for (auto& b : binders) {
            if (vFree_.count(b)) {
              Name y = freshen(b);
              rhs = substitute(rhs, b, mkVar(y));
              b = y;
            }
          }
          out.push_back({alt.ctor, std::move(binders), go(rhs)});
        }
        return mkCase(sb, std::move(scrut), std::move(out), e->span);
      }
    }
    return e;
  }

  Name x_;
  Expr v_;
  std::set<Name> vFree_;
  int floor_;
};

}  // namespace

Expr substitute(const Expr& e, const Name& x, const Expr& v) {
  if (!occursFree(e, x)) return e;
  Substituter s(x, v);
  return s.run(e);
}

// ---------------------------------------------------------------------------
// Alpha equivalence via synchronized binder maps

namespace {

bool alphaGo(const Expr& a, const Expr& b, std::map<Name, Name>& l2r,
             std::map<Name, Name>& r2l) {
  if (a->kind != b->kind) return false;
  auto bindPair = [&](const Name& x, const Name& y, auto&& k) -> bool {
    auto savedL = l2r.count(x) ? std::optional<Name>(l2r[x]) : std::nullopt;
    auto savedR = r2l.count(y) ? std::optional<Name>(r2l[y]) : std::nullopt;
    l2r[x] = y;
    r2l[y] = x;
    bool ok = k();
    if (savedL) l2r[x] = *savedL; else l2r.erase(x);
    if (savedR) r2l[y] = *savedR; else r2l.erase(y);
    return ok;
  };
  switch (a->kind) {
    case ExprNode::Kind::IntLit: return a->intVal == b->intVal;
    case ExprNode::Kind::BoolLit: return a->boolVal == b->boolVal;
    case ExprNode::Kind::UnitLit: return true;
    case ExprNode::Kind::Const: return a->op == b->op;
    case ExprNode::Kind::Var: {
      auto it = l2r.find(a->name);
      auto jt = r2l.find(b->name);
      if (it != l2r.end() || jt != r2l.end())
        return it != l2r.end() && jt != r2l.end() && it->second == b->name &&
               jt->second == a->name;
      return a->name == b->name;
    }
    case ExprNode::Kind::Lam:
      return bindPair(a->name, b->name, [&] { return alphaGo(a->a, b->a, l2r, r2l); });
    case ExprNode::Kind::App:
      return alphaGo(a->a, b->a, l2r, r2l) && alphaGo(a->b, b->b, l2r, r2l);
    case ExprNode::Kind::Fix: return alphaGo(a->a, b->a, l2r, r2l);
    case ExprNode::Kind::Ctor: {
      if (a->name != b->name || a->args.size() != b->args.size()) return false;
      for (size_t i = 0; i < a->args.size(); ++i)
        if (!alphaGo(a->args[i], b->args[i], l2r, r2l)) return false;
      return true;
    }
    case ExprNode::Kind::Case: {
      if (a->alts.size() != b->alts.size()) return false;
      if (!alphaGo(a->a, b->a, l2r, r2l)) return false;
      for (size_t i = 0; i < a->alts.size(); ++i) {
        const auto& x = a->alts[i];
        const auto& y = b->alts[i];
        if (x.ctor != y.ctor || x.binders.size() != y.binders.size()) return false;
        std::function<bool(size_t)> nest = [&](size_t j) -> bool {
          if (j == x.binders.size()) return alphaGo(x.rhs, y.rhs, l2r, r2l);
          return bindPair(x.binders[j], y.binders[j], [&] { return nest(j + 1); });
        };
        if (!bindPair(a->name, b->name, [&] { return nest(0); })) return false;
      }
      return true;
    }
  }
  return false;
}

}  // namespace

bool alphaEq(const Expr& e1, const Expr& e2) {
  if (e1 == e2) return true;
  std::map<Name, Name> l2r, r2l;
  return alphaGo(e1, e2, l2r, r2l);
}

// ---------------------------------------------------------------------------
// A-normalization

namespace {

struct AnfCtx {
  NameSupply* supply;
  std::vector<std::pair<Name, Expr>> binds;

  Name bind(Expr rhs) {
    Name t = supply->fresh("$t");
    binds.emplace_back(t, std::move(rhs));
    return t;
  }
};

Expr anfExpr(const Expr& e, NameSupply& supply);
Expr atomize(const Expr& e, AnfCtx& ctx);

// Flattens an application spine, atomizes head and arguments, rebuilds.
// Returns an application (not an atom); the caller decides whether to bind it.
Expr rebuildSpine(const Expr& e, AnfCtx& ctx) {
  std::vector<Expr> spine;
  Expr cur = e;
  while (cur->kind == ExprNode::Kind::App) {
    spine.push_back(cur);
    cur = cur->a;
  }
  Expr head = cur;
  Expr result;
  if (head->kind == ExprNode::Kind::Lam) {
    result = mkLam(head->name, anfExpr(head->a, *ctx.supply), head->span);
  } else {
    result = atomize(head, ctx);
  }
  for (auto it = spine.rbegin(); it != spine.rend(); ++it) {
    Expr arg = (*it)->b;
    Expr atom = arg->kind == ExprNode::Kind::Lam
                    ? mkLam(arg->name, anfExpr(arg->a, *ctx.supply), arg->span)
                    : atomize(arg, ctx);
    result = mkApp(result, atom, (*it)->span);
  }
  return result;
}

Expr atomize(const Expr& e, AnfCtx& ctx) {
  switch (e->kind) {
    case ExprNode::Kind::IntLit:
    case ExprNode::Kind::BoolLit:
    case ExprNode::Kind::UnitLit:
    case ExprNode::Kind::Var:
    case ExprNode::Kind::Const: return e;
    case ExprNode::Kind::Lam:
      return mkLam(e->name, anfExpr(e->a, *ctx.supply), e->span);
    case ExprNode::Kind::App:
      return mkVar(ctx.bind(rebuildSpine(e, ctx)), e->span);
    case ExprNode::Kind::Ctor: {
      std::vector<Expr> args;
      args.reserve(e->args.size());
      for (const auto& a : e->args) args.push_back(atomize(a, ctx));
      return mkVar(ctx.bind(mkCtor(e->name, std::move(args), e->span)), e->span);
    }
    case ExprNode::Kind::Fix:
      return mkVar(ctx.bind(mkFix(anfExpr(e->a, *ctx.supply), e->span)), e->span);
    case ExprNode::Kind::Case: {
      // Case has no synthesizable type; the checker rejects it in argument
      // position with a targeted message. Normalize parts anyway.
      Expr scrut = atomize(e->a, ctx);
      std::vector<CaseAlt> alts;
      alts.reserve(e->alts.size());
      for (const auto& alt : e->alts)
        alts.push_back({alt.ctor, alt.binders, anfExpr(alt.rhs, *ctx.supply)});
      return mkCase(e->name, std::move(scrut), std::move(alts), e->span);
    }
  }
  return e;
}

Expr realize(Expr tail, const AnfCtx& ctx) {
  Expr out = std::move(tail);
  for (auto it = ctx.binds.rbegin(); it != ctx.binds.rend(); ++it)
    out = mkApp(mkLam(it->first, out, it->second->span), it->second, it->second->span);
  return out;
}

Expr anfExpr(const Expr& e, NameSupply& supply) {
  AnfCtx ctx{&supply, {}};
  Expr tail;
  switch (e->kind) {
    case ExprNode::Kind::Lam:
      return mkLam(e->name, anfExpr(e->a, supply), e->span);
    case ExprNode::Kind::Case: {
      Expr scrut = atomize(e->a, ctx);
      std::vector<CaseAlt> alts;
      alts.reserve(e->alts.size());
      for (const auto& alt : e->alts)
        alts.push_back({alt.ctor, alt.binders, anfExpr(alt.rhs, supply)});
      tail = mkCase(e->name, std::move(scrut), std::move(alts), e->span);
      break;
    }
    case ExprNode::Kind::App: {
      Expr app = rebuildSpine(e, ctx);
      // Keep let-forms ((\t. body) rhs) in tail position; name other apps so
      // their call sites become environment binders.
      if (app->kind == ExprNode::Kind::App && app->a->kind == ExprNode::Kind::Lam) {
        tail = app;
      } else {
        tail = mkVar(ctx.bind(app), e->span);
      }
      break;
    }
    case ExprNode::Kind::Ctor:
    case ExprNode::Kind::Fix: tail = atomize(e, ctx); break;
    default: tail = e; break;
  }
  return realize(std::move(tail), ctx);
}

}  // namespace

Expr anfNormalize(const Expr& e, NameSupply& supply) { return anfExpr(e, supply); }

// ---------------------------------------------------------------------------
// Type helpers

static void freeTyVarsBase(const BaseType& b, std::set<Name>& out) {
  if (b.kind == BaseType::Kind::Var) out.insert(b.name);
  for (const auto& p : b.params) freeTyVarsBase(p, out);
}

static void freeTyVarsInto(const RefType& t, std::set<Name>& out) {
  if (t->isFun) {
    freeTyVarsInto(t->domain, out);
    freeTyVarsInto(t->codomain, out);
  } else {
    freeTyVarsBase(t->base, out);
  }
}

std::set<Name> freeTyVars(const RefType& t) {
  std::set<Name> out;
  freeTyVarsInto(t, out);
  return out;
}

RefType substTypeExpr(const RefType& t, const Name& x, const Expr& e) {
  if (t->isFun) {
    RefType dom = substTypeExpr(t->domain, x, e);
    if (t->param == x) return mkFun(t->param, dom, t->codomain);
    if (freeVars(e).count(t->param)) {
      static thread_local int renameCounter = 1 << 20;
      Name y(t->param.base, ++renameCounter);
      RefType cod = substTypeExpr(t->codomain, t->param, mkVar(y));
      return mkFun(y, dom, substTypeExpr(cod, x, e));
    }
    return mkFun(t->param, dom, substTypeExpr(t->codomain, x, e));
  }
  if (t->binder == x) return t;
  Expr r = substitute(t->refinement, x, e);
  return mkBase(t->binder, t->base, r, t->label);
}

RefType renameBinder(const RefType& t, const Name& to) {
  assert(!t->isFun);
  if (t->binder == to) return t;
  Expr r = substitute(t->refinement, t->binder, mkVar(to));
  return mkBase(to, t->base, r, t->label);
}

// ---------------------------------------------------------------------------
// Printing

namespace {

// Surface precedence levels (low to high):
//   0 **      1 proof steps and ?      2 ||      3 &&
//   4 comparisons      5 + -      6 application      7 atoms

bool isOperatorName(const std::string& s) {
  return !s.empty() && !(std::isalpha((unsigned char)s[0]) || s[0] == '_' || s[0] == '$');
}

int builtinPrec(Builtin op) {
  switch (op) {
    case Builtin::Or: return 2;
    case Builtin::And: return 3;
    case Builtin::Eq:
    case Builtin::Ne:
    case Builtin::Lt:
    case Builtin::Le:
    case Builtin::Gt:
    case Builtin::Ge: return 4;
    case Builtin::Add:
    case Builtin::Sub: return 5;
    case Builtin::Not: return 6;
  }
  return 6;
}

const char* builtinSurface(Builtin op, bool inType) {
  if (op == Builtin::Eq) return inType ? "=" : "==";
  return builtinName(op);
}

struct Printer {
  std::ostringstream os;
  bool inType = false;

  void expr(const Expr& e, int prec) {
    switch (e->kind) {
      case ExprNode::Kind::IntLit:
        if (e->intVal < 0) {
          os << "(" << e->intVal << ")";
        } else {
          os << e->intVal;
        }
        return;
      case ExprNode::Kind::BoolLit: os << (e->boolVal ? "True" : "False"); return;
      case ExprNode::Kind::UnitLit: os << "()"; return;
      case ExprNode::Kind::Var:
        if (isOperatorName(e->name.base)) {
          os << "(" << e->name.str() << ")";
        } else {
          os << e->name.str();
        }
        return;
      case ExprNode::Kind::Const:
        os << "(" << builtinSurface(e->op, inType) << ")";
        return;
      case ExprNode::Kind::Lam: {
        if (prec > 0) os << "(";
        os << "\\";
        const ExprNode* cur = e.get();
        while (true) {
          os << cur->name.str();
          if (cur->a->kind == ExprNode::Kind::Lam) {
            os << " ";
            cur = cur->a.get();
          } else {
            break;
          }
        }
        os << " -> ";
        expr(cur->a, 0);
        if (prec > 0) os << ")";
        return;
      }
      case ExprNode::Kind::App: {
        if (e->a->kind == ExprNode::Kind::App &&
            e->a->a->kind == ExprNode::Kind::Const) {
          Builtin op = e->a->a->op;
          int p = builtinPrec(op);
          if (prec > p) os << "(";
          expr(e->a->b, p + 1);
          os << " " << builtinSurface(op, inType) << " ";
          expr(e->b, p + 1);
          if (prec > p) os << ")";
          return;
        }
        if (e->a->kind == ExprNode::Kind::Const && builtinIsUnary(e->a->op)) {
          if (prec > 6) os << "(";
          os << builtinName(e->a->op) << " ";
          expr(e->b, 7);
          if (prec > 6) os << ")";
          return;
        }
        if (e->a->kind == ExprNode::Kind::App &&
            e->a->a->kind == ExprNode::Kind::Var &&
            isOperatorName(e->a->a->name.base)) {
          const std::string& opn = e->a->a->name.base;
          int p = opn == "**" ? 0 : 1;
          if (prec > p) os << "(";
          expr(e->a->b, p + 1);
          os << " " << opn << " ";
          expr(e->b, p + 1);
          if (prec > p) os << ")";
          return;
        }
        if (prec > 6) os << "(";
        expr(e->a, 6);
        os << " ";
        expr(e->b, 7);
        if (prec > 6) os << ")";
        return;
      }
      case ExprNode::Kind::Ctor: {
        if (e->args.empty()) {
          os << e->name.str();
          return;
        }
        if (prec > 6) os << "(";
        os << e->name.str();
        for (const auto& a : e->args) {
          os << " ";
          expr(a, 7);
        }
        if (prec > 6) os << ")";
        return;
      }
      case ExprNode::Kind::Case: {
        if (prec > 0) os << "(";
        os << "case ";
        expr(e->a, 1);
        os << " of {";
        bool first = true;
        for (const auto& alt : e->alts) {
          if (!first) os << " ;";
          first = false;
          os << " " << alt.ctor.str();
          for (const auto& b : alt.binders) os << " " << b.str();
          os << " -> ";
          expr(alt.rhs, 0);
        }
        os << " }";
        if (prec > 0) os << ")";
        return;
      }
      case ExprNode::Kind::Fix:
        os << "fix (";
        expr(e->a, 0);
        os << ")";
        return;
    }
  }

  void baseType(const BaseType& b, bool atomic) {
    switch (b.kind) {
      case BaseType::Kind::Int: os << "Int"; return;
      case BaseType::Kind::Bool: os << "Bool"; return;
      case BaseType::Kind::Unit: os << "Unit"; return;
      case BaseType::Kind::Var: os << b.name.str(); return;
      case BaseType::Kind::Data: {
        if (b.params.empty()) {
          os << b.name.str();
          return;
        }
        if (atomic) os << "(";
        os << b.name.str();
        for (const auto& p : b.params) {
          os << " ";
          baseType(p, true);
        }
        if (atomic) os << ")";
        return;
      }
    }
  }

  static void exprVars(const RefType& t, std::set<Name>& out) {
    if (t->isFun) {
      exprVars(t->domain, out);
      exprVars(t->codomain, out);
    } else {
      for (const auto& v : freeVars(t->refinement))
        if (v != t->binder) out.insert(v);
    }
  }

  void type(const RefType& t, bool atom) {
    if (t->isFun) {
      if (atom) os << "(";
      std::set<Name> vs;
      exprVars(t->codomain, vs);
      if (vs.count(t->param)) {
        os << t->param.str() << ":";
        type(t->domain, true);
      } else {
        type(t->domain, true);
      }
      os << " -> ";
      type(t->codomain, false);
      if (atom) os << ")";
      return;
    }
    bool trivial =
        t->refinement->kind == ExprNode::Kind::BoolLit && t->refinement->boolVal;
    if (trivial) {
      baseType(t->base, atom);
      return;
    }
    bool save = inType;
    inType = true;
    if (t->base.kind == BaseType::Kind::Unit && !occursFree(t->refinement, t->binder)) {
      os << "{ ";
      expr(t->refinement, 0);
      os << " }";
    } else {
      os << "{" << t->binder.str() << ":";
      baseType(t->base, false);
      os << " | ";
      expr(t->refinement, 0);
      os << "}";
    }
    inType = save;
  }
};

std::string declName(const Name& n) {
  if (isOperatorName(n.base)) return "(" + n.str() + ")";
  return n.str();
}

void printEquation(std::ostringstream& os, const Name& name, const Expr& body) {
  Printer p;
  std::vector<Name> params;
  Expr cur = body;
  while (cur->kind == ExprNode::Kind::Lam) {
    params.push_back(cur->name);
    cur = cur->a;
  }
  os << "  " << declName(name);
  for (const auto& x : params) os << " " << x.str();
  os << " = ";
  p.expr(cur, 0);
  os << p.os.str() << " ;\n";
}

void printMetric(std::ostringstream& os, const std::optional<TermMetric>& metric) {
  if (!metric) return;
  os << " / [";
  bool first = true;
  for (const auto& e : *metric) {
    if (!first) os << ", ";
    first = false;
    os << printExpr(e);
  }
  os << "]";
}

}  // namespace

std::string printExpr(const Expr& e) {
  Printer p;
  p.expr(e, 0);
  return p.os.str();
}

std::string printBaseType(const BaseType& b) {
  Printer p;
  p.baseType(b, false);
  return p.os.str();
}

std::string printType(const RefType& t) {
  Printer p;
  p.type(t, false);
  return p.os.str();
}

std::string printProgram(const Program& prog) {
  std::ostringstream os;
  for (const auto& [kind, idx] : prog.order) {
    switch (kind) {
      case Program::DeclKind::Data: {
        const auto& d = prog.datas[idx];
        os << "data " << d.name.str();
        for (const auto& tv : d.tyvars) os << " " << tv.str();
        os << " = ";
        bool first = true;
        for (const auto& c : d.ctors) {
          if (!first) os << " | ";
          first = false;
          os << c.name.str();
          for (const auto& f : c.fields) {
            Printer p;
            p.type(f, true);
            os << " " << p.os.str();
          }
        }
        os << " ;\n";
        break;
      }
      case Program::DeclKind::Measure: {
        const auto& m = prog.measures[idx];
        if (m.generated) break;
        os << "measure " << declName(m.name) << " :: " << printType(m.type) << " ;\n";
        printEquation(os, m.name, m.body);
        break;
      }
      case Program::DeclKind::Reflect: {
        const auto& r = prog.reflects[idx];
        os << "reflect " << declName(r.name) << " :: " << printType(r.type);
        printMetric(os, r.metric);
        os << " ;\n";
        printEquation(os, r.name, r.body);
        break;
      }
      case Program::DeclKind::Let: {
        const auto& l = prog.lets[idx];
        if (!l.body) {
          os << "assume " << declName(l.name) << " :: " << printType(l.type) << " ;\n";
        } else {
          os << "let " << declName(l.name) << " :: " << printType(l.type);
          printMetric(os, l.metric);
          os << " ;\n";
          printEquation(os, l.name, *l.body);
        }
        break;
      }
      case Program::DeclKind::Prop: {
        const auto& pd = prog.props[idx];
        os << "prop " << declName(pd.name) << " :: " << printType(pd.type);
        printMetric(os, pd.metric);
        os << " ;\n";
        printEquation(os, pd.name, pd.body);
        break;
      }
    }
  }
  return os.str();
}

}  // namespace rfl
