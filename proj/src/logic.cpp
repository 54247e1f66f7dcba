#include "rfl/logic.hpp"

#include <algorithm>
#include <cstring>
#include <functional>
#include <sstream>

namespace rfl {

bool Sort::operator==(const Sort& o) const {
  if (kind != o.kind) return false;
  if (kind != Kind::Fun) return true;
  return *arg == *o.arg && *res == *o.res;
}

std::string Sort::str() const {
  switch (kind) {
    case Kind::Int: return "Int";
    case Kind::Bool: return "Bool";
    case Kind::Univ: return "Univ";
    case Kind::Fun: return "Fun<" + arg->str() + "," + res->str() + ">";
  }
  return "?";
}

const char* predOpName(PredOp op) {
  switch (op) {
    case PredOp::Eq: return "=";
    case PredOp::Ne: return "distinct";
    case PredOp::Lt: return "<";
    case PredOp::Le: return "<=";
    case PredOp::Gt: return ">";
    case PredOp::Ge: return ">=";
    case PredOp::And: return "and";
    case PredOp::Or: return "or";
    case PredOp::Add: return "+";
    case PredOp::Sub: return "-";
  }
  return "?";
}

static Pred make(PredNode n) { return std::make_shared<const PredNode>(std::move(n)); }

Pred pInt(long long v) {
  PredNode n;
  n.kind = PredNode::Kind::Int;
  n.intVal = v;
  n.sort = Sort::mkInt();
  return make(std::move(n));
}
Pred pBool(bool v) {
  PredNode n;
  n.kind = PredNode::Kind::Bool;
  n.boolVal = v;
  n.sort = Sort::mkBool();
  return make(std::move(n));
}
Pred pVar(std::string name, Sort s, int pool) {
  PredNode n;
  n.kind = PredNode::Kind::Var;
  n.var = std::move(name);
  n.sort = std::move(s);
  n.pool = pool;
  return make(std::move(n));
}
Pred pApp(std::string sym, std::vector<Pred> args, Sort resultSort) {
  PredNode n;
  n.kind = PredNode::Kind::App;
  n.sym = std::move(sym);
  n.args = std::move(args);
  n.sort = std::move(resultSort);
  return make(std::move(n));
}
Pred pBin(PredOp op, Pred l, Pred r) {
  PredNode n;
  n.kind = PredNode::Kind::Bin;
  n.op = op;
  n.a = std::move(l);
  n.b = std::move(r);
  return make(std::move(n));
}
Pred pNot(Pred p) {
  PredNode n;
  n.kind = PredNode::Kind::Not;
  n.a = std::move(p);
  return make(std::move(n));
}
Pred pIte(Pred c, Pred t, Pred e) {
  PredNode n;
  n.kind = PredNode::Kind::Ite;
  n.a = std::move(c);
  n.b = std::move(t);
  n.c = std::move(e);
  return make(std::move(n));
}

Pred pAndAll(const std::vector<Pred>& ps) {
  Pred acc;
  for (const auto& p : ps) {
    if (p->kind == PredNode::Kind::Bool && p->boolVal) continue;
    acc = acc ? pBin(PredOp::And, acc, p) : p;
  }
  return acc ? acc : pBool(true);
}

Sort sortOf(const Pred& p) {
  switch (p->kind) {
    case PredNode::Kind::Int: return Sort::mkInt();
    case PredNode::Kind::Bool: return Sort::mkBool();
    case PredNode::Kind::Var:
    case PredNode::Kind::App: return p->sort;
    case PredNode::Kind::Bin:
      switch (p->op) {
        case PredOp::Add:
        case PredOp::Sub: return Sort::mkInt();
        default: return Sort::mkBool();
      }
    case PredNode::Kind::Not: return Sort::mkBool();
    case PredNode::Kind::Ite: return sortOf(p->b);
  }
  return Sort::mkUniv();
}

bool predEq(const Pred& a, const Pred& b) {
  if (a == b) return true;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case PredNode::Kind::Int: return a->intVal == b->intVal;
    case PredNode::Kind::Bool: return a->boolVal == b->boolVal;
    case PredNode::Kind::Var: return a->var == b->var && a->sort == b->sort;
    case PredNode::Kind::App: {
      if (a->sym != b->sym || a->args.size() != b->args.size()) return false;
      for (size_t i = 0; i < a->args.size(); ++i)
        if (!predEq(a->args[i], b->args[i])) return false;
      return true;
    }
    case PredNode::Kind::Bin:
      return a->op == b->op && predEq(a->a, b->a) && predEq(a->b, b->b);
    case PredNode::Kind::Not: return predEq(a->a, b->a);
    case PredNode::Kind::Ite:
      return predEq(a->a, b->a) && predEq(a->b, b->b) && predEq(a->c, b->c);
  }
  return false;
}

std::string printPred(const Pred& p) {
  std::ostringstream os;
  std::function<void(const Pred&)> go = [&](const Pred& q) {
    switch (q->kind) {
      case PredNode::Kind::Int:
        if (q->intVal < 0) {
          os << "(- " << -q->intVal << ")";
        } else {
          os << q->intVal;
        }
        return;
      case PredNode::Kind::Bool: os << (q->boolVal ? "true" : "false"); return;
      case PredNode::Kind::Var: os << q->var; return;
      case PredNode::Kind::App: {
        os << "(" << q->sym;
        for (const auto& a : q->args) {
          os << " ";
          go(a);
        }
        os << ")";
        return;
      }
      case PredNode::Kind::Bin: {
        os << "(" << predOpName(q->op) << " ";
        go(q->a);
        os << " ";
        go(q->b);
        os << ")";
        return;
      }
      case PredNode::Kind::Not:
        os << "(not ";
        go(q->a);
        os << ")";
        return;
      case PredNode::Kind::Ite:
        os << "(ite ";
        go(q->a);
        os << " ";
        go(q->b);
        os << " ";
        go(q->c);
        os << ")";
        return;
    }
  };
  go(p);
  return os.str();
}

Pred substPredVar(const Pred& p, const std::string& var, const Pred& to) {
  switch (p->kind) {
    case PredNode::Kind::Int:
    case PredNode::Kind::Bool: return p;
    case PredNode::Kind::Var: return p->var == var ? to : p;
    case PredNode::Kind::App: {
      std::vector<Pred> args;
      args.reserve(p->args.size());
      bool changed = false;
      for (const auto& a : p->args) {
        Pred a2 = substPredVar(a, var, to);
        changed |= a2 != a;
        args.push_back(std::move(a2));
      }
      if (!changed) return p;
      return pApp(p->sym, std::move(args), p->sort);
    }
    case PredNode::Kind::Bin: {
      Pred l = substPredVar(p->a, var, to);
      Pred r = substPredVar(p->b, var, to);
      if (l == p->a && r == p->b) return p;
      return pBin(p->op, std::move(l), std::move(r));
    }
    case PredNode::Kind::Not: {
      Pred a = substPredVar(p->a, var, to);
      return a == p->a ? p : pNot(std::move(a));
    }
    case PredNode::Kind::Ite: {
      Pred c = substPredVar(p->a, var, to);
      Pred t = substPredVar(p->b, var, to);
      Pred e = substPredVar(p->c, var, to);
      if (c == p->a && t == p->b && e == p->c) return p;
      return pIte(std::move(c), std::move(t), std::move(e));
    }
  }
  return p;
}

int maxlam(const Sort& s, const Pred& p) {
  switch (p->kind) {
    case PredNode::Kind::Int:
    case PredNode::Kind::Bool:
    case PredNode::Kind::Var: return 0;
    case PredNode::Kind::App: {
      int m = 0;
      Sort argSort;
      if (isLamSymbol(p->sym, &argSort) && argSort == s && !p->args.empty() &&
          p->args[0]->kind == PredNode::Kind::Var && p->args[0]->pool > 0) {
        m = p->args[0]->pool;
      }
      for (const auto& a : p->args) m = std::max(m, maxlam(s, a));
      return m;
    }
    case PredNode::Kind::Bin: return std::max(maxlam(s, p->a), maxlam(s, p->b));
    case PredNode::Kind::Not: return maxlam(s, p->a);
    case PredNode::Kind::Ite:
      return std::max({maxlam(s, p->a), maxlam(s, p->b), maxlam(s, p->c)});
  }
  return 0;
}

std::string poolVarName(const Sort& s, int index) {
  return "x" + std::to_string(index) + "!" + s.str();
}

Pred poolVar(const Sort& s, int index) { return pVar(poolVarName(s, index), s, index); }

std::string appSymbol(const Sort& arg, const Sort& res) {
  return "app<" + arg.str() + "," + res.str() + ">";
}
std::string lamSymbol(const Sort& arg, const Sort& res) {
  return "lam<" + arg.str() + "," + res.str() + ">";
}

namespace {

// Parses a sort rendered by Sort::str starting at position i.
bool parseSortStr(const std::string& s, size_t& i, Sort& out) {
  auto starts = [&](const char* w) {
    return s.compare(i, std::strlen(w), w) == 0;
  };
  if (starts("Int")) {
    out = Sort::mkInt();
    i += 3;
    return true;
  }
  if (starts("Bool")) {
    out = Sort::mkBool();
    i += 4;
    return true;
  }
  if (starts("Univ")) {
    out = Sort::mkUniv();
    i += 4;
    return true;
  }
  if (starts("Fun<")) {
    i += 4;
    Sort a, r;
    if (!parseSortStr(s, i, a)) return false;
    if (i >= s.size() || s[i] != ',') return false;
    ++i;
    if (!parseSortStr(s, i, r)) return false;
    if (i >= s.size() || s[i] != '>') return false;
    ++i;
    out = Sort::mkFun(a, r);
    return true;
  }
  return false;
}

}  // namespace

bool isLamSymbol(const std::string& sym, Sort* argSort) {
  if (sym.rfind("lam<", 0) != 0) return false;
  if (argSort) {
    size_t i = 4;
    Sort a;
    if (parseSortStr(sym, i, a)) *argSort = a;
  }
  return true;
}

bool isAppSymbol(const std::string& sym) { return sym.rfind("app<", 0) == 0; }

void LogicEnv::ensureAppLam(const Sort& arg, const Sort& res) {
  Sort fun = Sort::mkFun(arg, res);
  std::string app = appSymbol(arg, res);
  if (!declared(app)) declare(app, {{fun, arg}, res});
  std::string lam = lamSymbol(arg, res);
  if (!declared(lam)) declare(lam, {{arg, res}, fun});
  ensurePool(arg);
}

void LogicEnv::ensurePool(const Sort& s) {
  for (int i = 1; i <= lambdaPool; ++i) {
    std::string n = poolVarName(s, i);
    if (!declared(n)) declare(n, {{}, s});
  }
}

std::string renderVC(const VC& vc) {
  std::ostringstream os;
  std::map<std::string, Sort> vars;
  std::map<std::string, size_t> syms;
  collectVars(vc.hypothesis, vars);
  collectVars(vc.goal, vars);
  collectSymbols(vc.hypothesis, syms);
  collectSymbols(vc.goal, syms);
  for (const auto& inst : vc.instances) {
    collectVars(inst, vars);
    collectSymbols(inst, syms);
  }
  os << "decls:";
  for (const auto& [n, s] : vars) os << " " << n << ":" << s.str();
  for (const auto& [n, a] : syms) os << " " << n << "/" << a;
  os << "\n";
  os << "hyp: " << printPred(vc.hypothesis) << "\n";
  for (const auto& inst : vc.instances) os << "inst: " << printPred(inst) << "\n";
  os << "goal: " << printPred(vc.goal) << "\n";
  return os.str();
}

void collectVars(const Pred& p, std::map<std::string, Sort>& out) {
  switch (p->kind) {
    case PredNode::Kind::Var: out.emplace(p->var, p->sort); return;
    case PredNode::Kind::App:
      for (const auto& a : p->args) collectVars(a, out);
      return;
    case PredNode::Kind::Bin:
      collectVars(p->a, out);
      collectVars(p->b, out);
      return;
    case PredNode::Kind::Not: collectVars(p->a, out); return;
    case PredNode::Kind::Ite:
      collectVars(p->a, out);
      collectVars(p->b, out);
      collectVars(p->c, out);
      return;
    default: return;
  }
}

void collectSymbols(const Pred& p, std::map<std::string, size_t>& arity) {
  switch (p->kind) {
    case PredNode::Kind::App: {
      arity.emplace(p->sym, p->args.size());
      for (const auto& a : p->args) collectSymbols(a, arity);
      return;
    }
    case PredNode::Kind::Bin:
      collectSymbols(p->a, arity);
      collectSymbols(p->b, arity);
      return;
    case PredNode::Kind::Not: collectSymbols(p->a, arity); return;
    case PredNode::Kind::Ite:
      collectSymbols(p->a, arity);
      collectSymbols(p->b, arity);
      collectSymbols(p->c, arity);
      return;
    default: return;
  }
}

void collectSubterms(const Pred& p, std::vector<Pred>& out) {
  out.push_back(p);
  switch (p->kind) {
    case PredNode::Kind::App:
      for (const auto& a : p->args) collectSubterms(a, out);
      return;
    case PredNode::Kind::Bin:
      collectSubterms(p->a, out);
      collectSubterms(p->b, out);
      return;
    case PredNode::Kind::Not: collectSubterms(p->a, out); return;
    case PredNode::Kind::Ite:
      collectSubterms(p->a, out);
      collectSubterms(p->b, out);
      collectSubterms(p->c, out);
      return;
    default: return;
  }
}

}  // namespace rfl
