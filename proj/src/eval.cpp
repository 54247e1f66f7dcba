#include "rfl/eval.hpp"

namespace rfl {

DefTable definitionTable(const Program& prelude, const Program& prog) {
  DefTable t;
  auto addProgram = [&t](const Program& p) {
    for (const auto& r : p.reflects) t.add(r.name, r.body);
    for (const auto& l : p.lets)
      if (l.body) t.add(l.name, *l.body);
    for (const auto& m : p.measures) t.add(m.name, m.body);
    for (const auto& pr : p.props) t.add(pr.name, pr.body);
    for (const auto& d : p.datas)
      for (const auto& gm : generatedMeasures(d)) t.add(gm.name, gm.body);
  };
  addProgram(prelude);
  addProgram(prog);
  return t;
}

namespace {

bool structuralEq(const Expr& a, const Expr& b) {
  if (a->kind == ExprNode::Kind::Lam || b->kind == ExprNode::Kind::Lam ||
      a->kind == ExprNode::Kind::Const || b->kind == ExprNode::Kind::Const ||
      (a->kind == ExprNode::Kind::App) || (b->kind == ExprNode::Kind::App))
    throw StuckError{"equality applied to a function value"};
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case ExprNode::Kind::IntLit: return a->intVal == b->intVal;
    case ExprNode::Kind::BoolLit: return a->boolVal == b->boolVal;
    case ExprNode::Kind::UnitLit: return true;
    case ExprNode::Kind::Ctor: {
      if (a->name != b->name || a->args.size() != b->args.size()) return false;
      for (size_t i = 0; i < a->args.size(); ++i)
        if (!structuralEq(a->args[i], b->args[i])) return false;
      return true;
    }
    default: throw StuckError{"equality applied to a non-value"};
  }
}

long long intOf(const Expr& e) {
  if (e->kind != ExprNode::Kind::IntLit) throw StuckError{"integer operand expected"};
  return e->intVal;
}

bool boolOf(const Expr& e) {
  if (e->kind != ExprNode::Kind::BoolLit) throw StuckError{"boolean operand expected"};
  return e->boolVal;
}

}  // namespace

Expr delta(Builtin op, const Expr& lhs, const Expr& rhs) {
  switch (op) {
    case Builtin::Eq: return mkBoolLit(structuralEq(lhs, rhs));
    case Builtin::Ne: return mkBoolLit(!structuralEq(lhs, rhs));
    case Builtin::Lt: return mkBoolLit(intOf(lhs) < intOf(rhs));
    case Builtin::Le: return mkBoolLit(intOf(lhs) <= intOf(rhs));
    case Builtin::Gt: return mkBoolLit(intOf(lhs) > intOf(rhs));
    case Builtin::Ge: return mkBoolLit(intOf(lhs) >= intOf(rhs));
    case Builtin::And: return mkBoolLit(boolOf(lhs) && boolOf(rhs));
    case Builtin::Or: return mkBoolLit(boolOf(lhs) || boolOf(rhs));
    case Builtin::Add: return mkIntLit(intOf(lhs) + intOf(rhs));
    case Builtin::Sub: return mkIntLit(intOf(lhs) - intOf(rhs));
    case Builtin::Not: throw StuckError{"binary application of unary operator"};
  }
  throw StuckError{"unknown operator"};
}

Expr deltaUnary(Builtin op, const Expr& arg) {
  if (op != Builtin::Not) throw StuckError{"unary application of binary operator"};
  return mkBoolLit(!boolOf(arg));
}

std::optional<Expr> step(const Expr& e, const DefTable& defs) {
  switch (e->kind) {
    case ExprNode::Kind::IntLit:
    case ExprNode::Kind::BoolLit:
    case ExprNode::Kind::UnitLit:
    case ExprNode::Kind::Lam:
    case ExprNode::Kind::Const: return std::nullopt;
    case ExprNode::Kind::Var: {
      if (const Expr* body = defs.lookup(e->name)) return *body;
      throw StuckError{"unbound variable " + e->name.str()};
    }
    case ExprNode::Kind::Ctor: {
      for (size_t i = 0; i < e->args.size(); ++i) {
        if (!isValue(e->args[i])) {
          if (auto s = step(e->args[i], defs)) {
            std::vector<Expr> args = e->args;
            args[i] = *s;
            return mkCtor(e->name, std::move(args), e->span);
          }
          return std::nullopt;
        }
      }
      return std::nullopt;  // saturated constructor of values
    }
    case ExprNode::Kind::Fix: {
      if (!isValue(e->a)) {
        if (auto s = step(e->a, defs)) return mkFix(*s, e->span);
        return std::nullopt;
      }
      if (e->a->kind != ExprNode::Kind::Lam) throw StuckError{"fix of a non-lambda"};
      return substitute(e->a->a, e->a->name, e);
    }
    case ExprNode::Kind::App: {
      const Expr& f = e->a;
      const Expr& arg = e->b;
      if (!isValue(f)) {
        if (auto s = step(f, defs)) return mkApp(*s, arg, e->span);
        return std::nullopt;
      }
      // A partially applied binary operator is a value; its saturated form
      // is an application of that value.
      if (f->kind == ExprNode::Kind::Const && builtinIsUnary(f->op)) {
        if (!isValue(arg)) {
          if (auto s = step(arg, defs)) return mkApp(f, *s, e->span);
          return std::nullopt;
        }
        return deltaUnary(f->op, arg);
      }
      if (f->kind == ExprNode::Kind::App && f->a->kind == ExprNode::Kind::Const) {
        if (!isValue(arg)) {
          if (auto s = step(arg, defs)) return mkApp(f, *s, e->span);
          return std::nullopt;
        }
        return delta(f->a->op, f->b, arg);
      }
      if (!isValue(arg)) {
        if (auto s = step(arg, defs)) return mkApp(f, *s, e->span);
        return std::nullopt;
      }
      if (f->kind == ExprNode::Kind::Lam) return substitute(f->a, f->name, arg);
      throw StuckError{"application of a non-function value"};
    }
    case ExprNode::Kind::Case: {
      if (!isValue(e->a)) {
        if (auto s = step(e->a, defs))
          return mkCase(e->name, *s, e->alts, e->span);
        return std::nullopt;
      }
      const Expr& scrut = e->a;
      Name matched;
      std::vector<Expr> fields;
      if (scrut->kind == ExprNode::Kind::BoolLit) {
        matched = Name(scrut->boolVal ? "True" : "False");
      } else if (scrut->kind == ExprNode::Kind::Ctor) {
        matched = scrut->name;
        fields = scrut->args;
      } else {
        throw StuckError{"case scrutinee is not a data value"};
      }
      for (const auto& alt : e->alts) {
        if (alt.ctor != matched) continue;
        if (alt.binders.size() != fields.size())
          throw StuckError{"constructor arity mismatch in case"};
        Expr rhs = alt.rhs;
        for (size_t i = 0; i < fields.size(); ++i)
          rhs = substitute(rhs, alt.binders[i], fields[i]);
        return substitute(rhs, e->name, scrut);
      }
      throw StuckError{"no case alternative matches " + matched.str()};
    }
  }
  return std::nullopt;
}

EvalResult eval(const Expr& e, long long fuel, const DefTable& defs) {
  Expr cur = e;
  for (long long used = 0; used < fuel; ++used) {
    try {
      auto next = step(cur, defs);
      if (!next) {
        if (isValue(cur)) return {EvalResult::Kind::Value, cur, used, ""};
        return {EvalResult::Kind::Stuck, cur, used, "irreducible non-value"};
      }
      cur = *next;
    } catch (const StuckError& s) {
      return {EvalResult::Kind::Stuck, cur, 0, s.what};
    }
  }
  return {EvalResult::Kind::OutOfFuel, cur, fuel, ""};
}

}  // namespace rfl
