#include "rfl/translate.hpp"

#include <algorithm>
#include <cassert>
#include <set>

namespace rfl {

Sort embedSort(const BaseType& b) {
  switch (b.kind) {
    case BaseType::Kind::Int: return Sort::mkInt();
    case BaseType::Kind::Bool: return Sort::mkBool();
    default: return Sort::mkUniv();  // Unit, data types and type variables
  }
}

Sort embedSort(const RefType& t) {
  if (t->isFun) return Sort::mkFun(embedSort(t->domain), embedSort(t->codomain));
  return embedSort(t->base);
}

namespace {

// ---------------------------------------------------------------------------
// Erasure-level types with unification metavariables; used to infer lambda
// binder sorts inside refinement expressions.

struct STy;
using STyP = std::shared_ptr<STy>;

struct STy {
  enum class K { Int, Bool, Unit, Data, Rigid, Arrow, Meta };
  K k;
  Name name;                // Data / Rigid
  std::vector<STyP> params; // Data
  STyP a, b;                // Arrow
  int meta = -1;            // Meta
};

STyP sInt() { return std::make_shared<STy>(STy{STy::K::Int, {}, {}, nullptr, nullptr, -1}); }
STyP sBool() { return std::make_shared<STy>(STy{STy::K::Bool, {}, {}, nullptr, nullptr, -1}); }
STyP sUnit() { return std::make_shared<STy>(STy{STy::K::Unit, {}, {}, nullptr, nullptr, -1}); }
STyP sData(Name n, std::vector<STyP> ps) {
  return std::make_shared<STy>(STy{STy::K::Data, std::move(n), std::move(ps), nullptr, nullptr, -1});
}
STyP sRigid(Name n) {
  return std::make_shared<STy>(STy{STy::K::Rigid, std::move(n), {}, nullptr, nullptr, -1});
}
STyP sArrow(STyP a, STyP b) {
  return std::make_shared<STy>(STy{STy::K::Arrow, {}, {}, std::move(a), std::move(b), -1});
}

struct ATree {
  Expr e;
  STyP ty;
  std::vector<ATree> kids;
};

struct TransState {
  TransEnv* env;
  std::vector<STyP> metaSol;
  int markerCounter = 0;

  STyP freshMeta() {
    int id = (int)metaSol.size();
    metaSol.push_back(nullptr);
    auto m = std::make_shared<STy>();
    m->k = STy::K::Meta;
    m->meta = id;
    return m;
  }

  STyP shallowResolve(STyP t) {
    while (t->k == STy::K::Meta && metaSol[t->meta]) t = metaSol[t->meta];
    return t;
  }

  bool occurs(int meta, const STyP& t0) {
    STyP t = shallowResolve(t0);
    switch (t->k) {
      case STy::K::Meta: return t->meta == meta;
      case STy::K::Arrow: return occurs(meta, t->a) || occurs(meta, t->b);
      case STy::K::Data:
        for (const auto& p : t->params)
          if (occurs(meta, p)) return true;
        return false;
      default: return false;
    }
  }

  void unify(STyP x, STyP y, Span span) {
    x = shallowResolve(x);
    y = shallowResolve(y);
    if (x == y) return;
    if (x->k == STy::K::Meta) {
      if (occurs(x->meta, y))
        throw TranslateError{"SortMismatch", span, "cyclic type in refinement"};
      metaSol[x->meta] = y;
      return;
    }
    if (y->k == STy::K::Meta) {
      unify(y, x, span);
      return;
    }
    if (x->k != y->k)
      throw TranslateError{"SortMismatch", span, "refinement subterm type mismatch"};
    switch (x->k) {
      case STy::K::Int:
      case STy::K::Bool:
      case STy::K::Unit: return;
      case STy::K::Rigid:
        if (x->name != y->name)
          throw TranslateError{"SortMismatch", span, "type variable mismatch"};
        return;
      case STy::K::Data: {
        if (x->name != y->name || x->params.size() != y->params.size())
          throw TranslateError{"SortMismatch", span, "data type mismatch"};
        for (size_t i = 0; i < x->params.size(); ++i)
          unify(x->params[i], y->params[i], span);
        return;
      }
      case STy::K::Arrow:
        unify(x->a, y->a, span);
        unify(x->b, y->b, span);
        return;
      default: return;
    }
  }

  Sort sortOfTy(STyP t0) {
    STyP t = shallowResolve(std::move(t0));
    switch (t->k) {
      case STy::K::Int: return Sort::mkInt();
      case STy::K::Bool: return Sort::mkBool();
      case STy::K::Arrow: return Sort::mkFun(sortOfTy(t->a), sortOfTy(t->b));
      default: return Sort::mkUniv();  // Unit/Data/Rigid and unsolved metas
    }
  }
};

// Erases a refinement type to an STy; binds listed type variables through the
// supplied instantiation map, other variables become rigid.
STyP eraseBase(const BaseType& b, const std::map<Name, STyP>& inst) {
  switch (b.kind) {
    case BaseType::Kind::Int: return sInt();
    case BaseType::Kind::Bool: return sBool();
    case BaseType::Kind::Unit: return sUnit();
    case BaseType::Kind::Var: {
      auto it = inst.find(b.name);
      return it != inst.end() ? it->second : sRigid(b.name);
    }
    case BaseType::Kind::Data: {
      std::vector<STyP> ps;
      ps.reserve(b.params.size());
      for (const auto& p : b.params) ps.push_back(eraseBase(p, inst));
      return sData(b.name, std::move(ps));
    }
  }
  return sUnit();
}

STyP eraseType(const RefType& t, const std::map<Name, STyP>& inst) {
  if (t->isFun) return sArrow(eraseType(t->domain, inst), eraseType(t->codomain, inst));
  return eraseBase(t->base, inst);
}

// Per-occurrence instantiation: the type's free type variables become fresh
// metas so polymorphic definitions adapt to their use sites.
STyP instantiate(TransState& st, const RefType& t) {
  std::map<Name, STyP> inst;
  for (const auto& tv : freeTyVars(t)) inst[tv] = st.freshMeta();
  return eraseType(t, inst);
}

STyP builtinTy(TransState& st, Builtin op) {
  switch (op) {
    case Builtin::Eq:
    case Builtin::Ne: {
      STyP a = st.freshMeta();
      return sArrow(a, sArrow(a, sBool()));
    }
    case Builtin::Lt:
    case Builtin::Le:
    case Builtin::Gt:
    case Builtin::Ge: return sArrow(sInt(), sArrow(sInt(), sBool()));
    case Builtin::Add:
    case Builtin::Sub: return sArrow(sInt(), sArrow(sInt(), sInt()));
    case Builtin::And:
    case Builtin::Or: return sArrow(sBool(), sArrow(sBool(), sBool()));
    case Builtin::Not: return sArrow(sBool(), sBool());
  }
  return st.freshMeta();
}

// ---------------------------------------------------------------------------
// Elaboration: types every subterm, substituting case binders by selector
// applications so the emitted branches are binder-free.

ATree elab(TransState& st, const Expr& e, std::map<Name, STyP>& locals) {
  const DataWorld& world = *st.env->world;
  switch (e->kind) {
    case ExprNode::Kind::IntLit: return {e, sInt(), {}};
    case ExprNode::Kind::BoolLit: return {e, sBool(), {}};
    case ExprNode::Kind::UnitLit: return {e, sUnit(), {}};
    case ExprNode::Kind::Var: {
      if (auto it = st.env->aliases.find(e->name); it != st.env->aliases.end())
        return {e, st.freshMeta(), {}};
      if (auto it = locals.find(e->name); it != locals.end()) return {e, it->second, {}};
      if (auto it = st.env->vars.find(e->name); it != st.env->vars.end())
        return {e, instantiate(st, it->second), {}};
      if (auto it = world.measures.find(e->name); it != world.measures.end())
        return {e, instantiate(st, it->second.type), {}};
      throw TranslateError{"Untranslatable", e->span,
                           "unbound variable '" + e->name.str() + "' in refinement"};
    }
    case ExprNode::Kind::Const: return {e, builtinTy(st, e->op), {}};
    case ExprNode::Kind::Lam: {
      STyP binder = st.freshMeta();
      auto saved = locals.find(e->name) != locals.end()
                       ? std::optional<STyP>(locals[e->name])
                       : std::nullopt;
      locals[e->name] = binder;
      ATree body = elab(st, e->a, locals);
      if (saved) locals[e->name] = *saved; else locals.erase(e->name);
      STyP ty = sArrow(binder, body.ty);
      std::vector<ATree> kids;
      kids.push_back(std::move(body));
      return {e, std::move(ty), std::move(kids)};
    }
    case ExprNode::Kind::App: {
      ATree f = elab(st, e->a, locals);
      ATree arg = elab(st, e->b, locals);
      STyP res = st.freshMeta();
      st.unify(f.ty, sArrow(arg.ty, res), e->span);
      std::vector<ATree> kids;
      kids.push_back(std::move(f));
      kids.push_back(std::move(arg));
      return {e, res, std::move(kids)};
    }
    case ExprNode::Kind::Ctor: {
      auto it = world.ctors.find(e->name);
      if (it == world.ctors.end())
        throw TranslateError{"Untranslatable", e->span,
                             "unknown constructor '" + e->name.str() + "'"};
      const auto& info = it->second;
      std::map<Name, STyP> inst;
      for (const auto& tv : info.tyvars) inst[tv] = st.freshMeta();
      if (e->args.size() != info.fields.size())
        throw TranslateError{"Untranslatable", e->span, "constructor arity mismatch"};
      std::vector<ATree> kids;
      kids.reserve(e->args.size());
      for (size_t i = 0; i < e->args.size(); ++i) {
        ATree k = elab(st, e->args[i], locals);
        st.unify(k.ty, eraseType(info.fields[i], inst), e->span);
        kids.push_back(std::move(k));
      }
      std::vector<STyP> ps;
      for (const auto& tv : info.tyvars) ps.push_back(inst[tv]);
      return {e, sData(info.dataType, std::move(ps)), std::move(kids)};
    }
    case ExprNode::Kind::Case: {
      ATree scrut = elab(st, e->a, locals);
      bool boolCase = !e->alts.empty() && (e->alts[0].ctor.base == "True" ||
                                           e->alts[0].ctor.base == "False");
      std::vector<ATree> kids;
      kids.push_back(std::move(scrut));
      STyP result = st.freshMeta();
      if (boolCase) {
        st.unify(kids[0].ty, sBool(), e->span);
        for (const auto& alt : e->alts) {
          Expr rhs = substitute(alt.rhs, e->name, e->a);
          ATree k = elab(st, rhs, locals);
          st.unify(k.ty, result, e->span);
          kids.push_back(std::move(k));
        }
      } else {
        const Name dataType = world.ctors.at(e->alts[0].ctor).dataType;
        std::map<Name, STyP> inst;
        for (const auto& tv : world.datas.at(dataType).tyvars)
          inst[tv] = st.freshMeta();
        std::vector<STyP> ps;
        for (const auto& tv : world.datas.at(dataType).tyvars) ps.push_back(inst[tv]);
        st.unify(kids[0].ty, sData(dataType, ps), e->span);
        for (const auto& alt : e->alts) {
          const auto& info = world.ctors.at(alt.ctor);
          Expr rhs = alt.rhs;
          for (size_t j = 0; j < alt.binders.size(); ++j) {
            Expr sel = mkApp(mkVar(info.selectors[j]), e->a, e->span);
            rhs = substitute(rhs, alt.binders[j], sel);
          }
          rhs = substitute(rhs, e->name, e->a);
          ATree k = elab(st, rhs, locals);
          st.unify(k.ty, result, e->span);
          kids.push_back(std::move(k));
        }
      }
      return {e, result, std::move(kids)};
    }
    case ExprNode::Kind::Fix:
      throw TranslateError{"Untranslatable", e->span, "fix in a refinement"};
  }
  throw TranslateError{"Untranslatable", e->span, "unsupported refinement form"};
}

// ---------------------------------------------------------------------------
// Emission

struct Emitter {
  TransState& st;
  LogicEnv& logic;

  Pred coerceTo(const Pred& p, const Sort& target, Span span) {
    Sort s = sortOf(p);
    if (s == target) return p;
    if (target.kind == Sort::Kind::Univ && s.kind == Sort::Kind::Int) {
      logic.declare("toUniv_Int", {{Sort::mkInt()}, Sort::mkUniv()});
      return pApp("toUniv_Int", {p}, Sort::mkUniv());
    }
    if (target.kind == Sort::Kind::Univ && s.kind == Sort::Kind::Bool) {
      logic.declare("toUniv_Bool", {{Sort::mkBool()}, Sort::mkUniv()});
      return pApp("toUniv_Bool", {p}, Sort::mkUniv());
    }
    throw TranslateError{"SortMismatch", span,
                         "cannot use a " + s.str() + " value at sort " + target.str()};
  }

  // Makes two sides of an (dis)equality sort-compatible.
  void matchSides(Pred& l, Pred& r, Span span) {
    Sort sl = sortOf(l), sr = sortOf(r);
    if (sl == sr) return;
    if (sl.kind == Sort::Kind::Univ) {
      r = coerceTo(r, Sort::mkUniv(), span);
      return;
    }
    if (sr.kind == Sort::Kind::Univ) {
      l = coerceTo(l, Sort::mkUniv(), span);
      return;
    }
    throw TranslateError{"SortMismatch", span,
                         "equality between " + sl.str() + " and " + sr.str()};
  }

  Pred emit(const ATree& t) {
    const Expr& e = t.e;
    const DataWorld& world = *st.env->world;
    switch (e->kind) {
      case ExprNode::Kind::IntLit: return pInt(e->intVal);
      case ExprNode::Kind::BoolLit: return pBool(e->boolVal);
      case ExprNode::Kind::UnitLit:
        logic.declare("unitval", {{}, Sort::mkUniv()});
        return pApp("unitval", {}, Sort::mkUniv());
      case ExprNode::Kind::Var: {
        if (auto it = st.env->aliases.find(e->name); it != st.env->aliases.end())
          return it->second;
        if (auto it = localPreds.find(e->name); it != localPreds.end())
          return it->second;
        if (auto it = st.env->vars.find(e->name); it != st.env->vars.end()) {
          if (st.env->nonTerminating.count(e->name))
            throw TranslateError{"NonTerminatingSubterm", e->span,
                                 "'" + e->name.str() +
                                     "' is not provably terminating and cannot "
                                     "appear in a refinement"};
          return pVar(e->name.str(), embedSort(it->second));
        }
        if (world.isMeasure(e->name))
          throw TranslateError{"Untranslatable", e->span,
                               "measure '" + e->name.str() + "' must be applied"};
        throw TranslateError{"Untranslatable", e->span,
                             "unbound variable '" + e->name.str() + "'"};
      }
      case ExprNode::Kind::Const: return opValue(e->op);
      case ExprNode::Kind::Lam: return emitLam(t);
      case ExprNode::Kind::App: return emitApp(t);
      case ExprNode::Kind::Ctor: {
        const auto& info = world.ctors.at(e->name);
        std::vector<Pred> args;
        args.reserve(t.kids.size());
        for (size_t i = 0; i < t.kids.size(); ++i) {
          Pred a = emit(t.kids[i]);
          args.push_back(coerceTo(a, embedSort(info.fields[i]), e->span));
        }
        declareCtor(e->name, info);
        return pApp(e->name.str(), std::move(args), Sort::mkUniv());
      }
      case ExprNode::Kind::Case: return emitCase(t);
      case ExprNode::Kind::Fix:
        throw TranslateError{"Untranslatable", e->span, "fix in a refinement"};
    }
    throw TranslateError{"Untranslatable", e->span, "unsupported refinement form"};
  }

  void declareCtor(const Name& name, const DataWorld::CtorInfo& info) {
    if (logic.declared(name.str())) return;
    SymbolSig sig;
    for (const auto& f : info.fields) sig.args.push_back(embedSort(f));
    sig.res = Sort::mkUniv();
    logic.declare(name.str(), std::move(sig));
  }

  void declareMeasure(const Name& name, const DataWorld::MeasureInfo& info) {
    if (logic.declared(name.str())) return;
    const RefType& t = info.type;
    SymbolSig sig;
    sig.args.push_back(embedSort(t->domain));
    sig.res = embedSort(t->codomain);
    logic.declare(name.str(), std::move(sig));
  }

  Pred opValue(Builtin op) {
    // Partially applied operator: an uninterpreted function-sorted constant.
    std::string name = std::string("op!") + builtinName(op);
    Sort s = builtinIsUnary(op) ? Sort::mkFun(Sort::mkBool(), Sort::mkBool())
             : op == Builtin::Add || op == Builtin::Sub
                 ? Sort::mkFun(Sort::mkInt(), Sort::mkFun(Sort::mkInt(), Sort::mkInt()))
             : op == Builtin::And || op == Builtin::Or
                 ? Sort::mkFun(Sort::mkBool(), Sort::mkFun(Sort::mkBool(), Sort::mkBool()))
             : op == Builtin::Eq || op == Builtin::Ne
                 ? Sort::mkFun(Sort::mkUniv(), Sort::mkFun(Sort::mkUniv(), Sort::mkBool()))
                 : Sort::mkFun(Sort::mkInt(), Sort::mkFun(Sort::mkInt(), Sort::mkBool()));
    logic.declare(name, {{}, s});
    return pVar(name, s);
  }

  Pred emitLam(const ATree& t) {
    const Expr& e = t.e;
    STyP ty = st.shallowResolve(t.ty);
    assert(ty->k == STy::K::Arrow);
    Sort argSort = st.sortOfTy(ty->a);
    Sort resSort = st.sortOfTy(ty->b);
    std::string marker = "$mark!" + std::to_string(++st.markerCounter);
    auto saved = localPreds.find(e->name) != localPreds.end()
                     ? std::optional<Pred>(localPreds[e->name])
                     : std::nullopt;
    localPreds[e->name] = pVar(marker, argSort);
    Pred body = emit(t.kids[0]);
    if (saved) localPreds[e->name] = *saved; else localPreds.erase(e->name);
    int i = maxlam(argSort, body);
    if (i + 1 > logic.lambdaPool)
      throw TranslateError{"PoolExhausted", e->span,
                           "lambda nesting exceeds the binder pool (" +
                               std::to_string(logic.lambdaPool) + ")"};
    Pred binder = poolVar(argSort, i + 1);
    body = substPredVar(body, marker, binder);
    logic.ensureAppLam(argSort, resSort);
    return pApp(lamSymbol(argSort, resSort), {binder, body},
                Sort::mkFun(argSort, resSort));
  }

  Pred emitApp(const ATree& t) {
    // Flatten the application spine.
    std::vector<const ATree*> spine;
    const ATree* cur = &t;
    while (cur->e->kind == ExprNode::Kind::App) {
      spine.push_back(cur);
      cur = &cur->kids[0];
    }
    const ATree& head = *cur;
    const DataWorld& world = *st.env->world;
    size_t nargs = spine.size();

    // Saturated builtin operator.
    if (head.e->kind == ExprNode::Kind::Const) {
      Builtin op = head.e->op;
      if (builtinIsUnary(op) && nargs >= 1) {
        Pred a = emit(spine.back()->kids[1]);
        Pred out = pNot(a);
        return applyRest(out, spine, 1, t.e->span);
      }
      if (!builtinIsUnary(op) && nargs >= 2) {
        Pred l = emit(spine[nargs - 1]->kids[1]);
        Pred r = emit(spine[nargs - 2]->kids[1]);
        Pred out = emitBin(op, std::move(l), std::move(r), t.e->span);
        return applyRest(out, spine, 2, t.e->span);
      }
      // Partial operator application goes through the operator value.
      Pred f = opValue(op);
      return applyChain(f, spine, 0, t.e->span);
    }

    // Saturated measure application (checkers, selectors, user measures).
    // Measures are logic symbols; they win over program binders of the same
    // name so a measure's own recursive checking lines up with the
    // constructor-refinement facts.
    if (head.e->kind == ExprNode::Kind::Var && world.isMeasure(head.e->name) &&
        st.env->aliases.find(head.e->name) == st.env->aliases.end() &&
        localPreds.find(head.e->name) == localPreds.end() && nargs >= 1) {
      const auto& info = world.measures.at(head.e->name);
      declareMeasure(head.e->name, info);
      Pred arg = emit(spine[nargs - 1]->kids[1]);
      arg = coerceTo(arg, embedSort(info.type->domain), t.e->span);
      Pred out = pApp(head.e->name.str(), {arg}, embedSort(info.type->codomain));
      return applyRest(out, spine, 1, t.e->span);
    }

    Pred f = emit(head);
    return applyChain(f, spine, 0, t.e->span);
  }

  // Applies remaining spine arguments (after `consumed`) through app symbols.
  Pred applyRest(Pred acc, const std::vector<const ATree*>& spine, size_t consumed,
                 Span span) {
    if (spine.size() == consumed) return acc;
    return applyChain(std::move(acc), spine, consumed, span);
  }

  Pred applyChain(Pred f, const std::vector<const ATree*>& spine, size_t consumed,
                  Span span) {
    // spine is outermost-first; arguments apply innermost-first.
    for (size_t k = spine.size() - consumed; k-- > 0;) {
      const ATree& argTree = spine[k]->kids[1];
      Sort fs = sortOf(f);
      if (!fs.isFun())
        throw TranslateError{"SortMismatch", span,
                             "application of a non-function value in a refinement"};
      Pred arg = emit(argTree);
      arg = coerceTo(arg, *fs.arg, span);
      logic.ensureAppLam(*fs.arg, *fs.res);
      f = pApp(appSymbol(*fs.arg, *fs.res), {std::move(f), std::move(arg)}, *fs.res);
    }
    return f;
  }

  Pred emitBin(Builtin op, Pred l, Pred r, Span span) {
    auto needInt = [&](const Pred& p) {
      if (!(sortOf(p) == Sort::mkInt()))
        throw TranslateError{"SortMismatch", span, "integer operand expected"};
    };
    auto needBool = [&](const Pred& p) {
      if (!(sortOf(p) == Sort::mkBool()))
        throw TranslateError{"SortMismatch", span, "boolean operand expected"};
    };
    switch (op) {
      case Builtin::Eq:
      case Builtin::Ne:
        matchSides(l, r, span);
        return pBin(op == Builtin::Eq ? PredOp::Eq : PredOp::Ne, l, r);
      case Builtin::Lt:
      case Builtin::Le:
      case Builtin::Gt:
      case Builtin::Ge:
        needInt(l);
        needInt(r);
        return pBin(op == Builtin::Lt   ? PredOp::Lt
                    : op == Builtin::Le ? PredOp::Le
                    : op == Builtin::Gt ? PredOp::Gt
                                        : PredOp::Ge,
                    l, r);
      case Builtin::Add:
      case Builtin::Sub:
        needInt(l);
        needInt(r);
        return pBin(op == Builtin::Add ? PredOp::Add : PredOp::Sub, l, r);
      case Builtin::And:
      case Builtin::Or:
        needBool(l);
        needBool(r);
        return pBin(op == Builtin::And ? PredOp::And : PredOp::Or, l, r);
      case Builtin::Not: break;
    }
    throw TranslateError{"Untranslatable", span, "operator arity"};
  }

  Pred emitCase(const ATree& t) {
    const Expr& e = t.e;
    const DataWorld& world = *st.env->world;
    Pred scrut = emit(t.kids[0]);
    bool boolCase =
        e->alts[0].ctor.base == "True" || e->alts[0].ctor.base == "False";
    if (boolCase) {
      Pred tBranch, fBranch;
      for (size_t i = 0; i < e->alts.size(); ++i) {
        Pred p = emit(t.kids[i + 1]);
        if (e->alts[i].ctor.base == "True") tBranch = p; else fBranch = p;
      }
      if (!tBranch || !fBranch)
        throw TranslateError{"Untranslatable", e->span, "boolean case must cover both"};
      harmonize(tBranch, fBranch, e->span);
      return pIte(scrut, tBranch, fBranch);
    }
    // Data case: checker-guarded chain, last alternative as the default.
    scrut = coerceTo(scrut, Sort::mkUniv(), e->span);
    std::vector<Pred> branches;
    for (size_t i = 0; i < e->alts.size(); ++i) branches.push_back(emit(t.kids[i + 1]));
    for (size_t i = 0; i + 1 < branches.size(); ++i)
      for (size_t j = i + 1; j < branches.size(); ++j)
        harmonize(branches[i], branches[j], e->span);
    Pred out = branches.back();
    for (size_t i = e->alts.size() - 1; i-- > 0;) {
      const auto& info = world.ctors.at(e->alts[i].ctor);
      declareMeasure(info.checker, world.measures.at(info.checker));
      Pred guard = pApp(info.checker.str(), {scrut}, Sort::mkBool());
      out = pIte(guard, branches[i], out);
    }
    return out;
  }

  void harmonize(Pred& a, Pred& b, Span span) {
    Sort sa = sortOf(a), sb = sortOf(b);
    if (sa == sb) return;
    if (sa.kind == Sort::Kind::Univ) {
      b = coerceTo(b, Sort::mkUniv(), span);
    } else if (sb.kind == Sort::Kind::Univ) {
      a = coerceTo(a, Sort::mkUniv(), span);
    } else {
      throw TranslateError{"SortMismatch", span, "case branches of different sorts"};
    }
  }

  std::map<Name, Pred> localPreds;
};

}  // namespace

TransResult translateExpr(TransEnv& env, const Expr& e) {
  TransState st{&env, {}, 0};
  std::map<Name, STyP> locals;
  ATree tree = elab(st, e, locals);
  Emitter em{st, *env.logic, {}};
  Pred p = em.emit(tree);
  return {p, sortOf(p)};
}

Pred embedEnv(TransEnv& env, const std::vector<std::pair<Name, RefType>>& gamma) {
  std::vector<Pred> conjuncts;
  for (const auto& [x, t] : gamma) {
    if (t->isFun) continue;
    if (t->label != TermLabel::Terminating) continue;
    if (env.nonTerminating.count(x)) continue;
    const Expr& r = t->refinement;
    if (r->kind == ExprNode::Kind::BoolLit && r->boolVal) continue;
    Expr inst = substitute(r, t->binder, mkVar(x));
    TransResult res = translateExpr(env, inst);
    conjuncts.push_back(res.pred);
  }
  return pAndAll(conjuncts);
}

VC makeVC(TransEnv& env, const std::vector<std::pair<Name, RefType>>& gamma,
          const Name& valueBinder, const BaseType& base, const Expr& lhsRefinement,
          const Expr& rhsRefinement, Span span, std::string provenance) {
  bool hadBinder = env.vars.count(valueBinder) != 0;
  RefType savedBinder = hadBinder ? env.vars[valueBinder] : RefType();
  env.vars[valueBinder] = trivialBase(base);

  Pred gammaPred = embedEnv(env, gamma);
  Pred lhs = translateExpr(env, lhsRefinement).pred;
  Pred goal = translateExpr(env, rhsRefinement).pred;

  if (hadBinder) env.vars[valueBinder] = savedBinder; else env.vars.erase(valueBinder);

  VC vc;
  vc.hypothesis = pAndAll({gammaPred, lhs});
  vc.goal = goal;
  vc.env = env.logic;
  vc.span = span;
  vc.provenance = std::move(provenance);
  return vc;
}

// ---------------------------------------------------------------------------
// Equivalence instances

namespace {

void allPreds(const VC& vc, std::vector<Pred>& out) {
  collectSubterms(vc.hypothesis, out);
  collectSubterms(vc.goal, out);
  for (const auto& i : vc.instances) collectSubterms(i, out);
}

bool lambdaFree(const Pred& p) {
  std::vector<Pred> subs;
  collectSubterms(p, subs);
  for (const auto& s : subs)
    if (s->kind == PredNode::Kind::App && isLamSymbol(s->sym)) return false;
  return true;
}

}  // namespace

std::vector<Pred> alphaInstances(const VC& vc) {
  std::vector<Pred> subs;
  allPreds(vc, subs);

  // Pool binders occurring anywhere, per argument sort.
  std::map<std::string, std::set<int>> occurring;
  for (const auto& s : subs)
    if (s->kind == PredNode::Kind::Var && s->pool > 0)
      occurring[s->sort.str()].insert(s->pool);

  std::vector<Pred> out;
  std::set<std::string> seen;
  for (const auto& s : subs) {
    if (s->kind != PredNode::Kind::App) continue;
    Sort argSort;
    if (!isLamSymbol(s->sym, &argSort)) continue;
    if (s->args.size() != 2 || s->args[0]->kind != PredNode::Kind::Var ||
        s->args[0]->pool <= 0)
      continue;
    int i = s->args[0]->pool;
    auto it = occurring.find(argSort.str());
    if (it == occurring.end()) continue;
    for (int j : it->second) {
      if (j <= i) continue;
      Pred xj = poolVar(argSort, j);
      Pred renamed = substPredVar(s->args[1], s->args[0]->var, xj);
      Pred inst = pBin(PredOp::Eq, s, pApp(s->sym, {xj, renamed}, s->sort));
      std::string key = printPred(inst);
      if (seen.insert(key).second) out.push_back(inst);
    }
  }
  return out;
}

std::vector<Pred> betaInstances(const VC& vc, int budget, bool* budgetExceeded) {
  if (budgetExceeded) *budgetExceeded = false;
  std::vector<Pred> work;
  allPreds(vc, work);

  std::vector<Pred> out;
  std::set<std::string> seen;
  for (size_t k = 0; k < work.size(); ++k) {
    const Pred& s = work[k];
    if (s->kind != PredNode::Kind::App || !isAppSymbol(s->sym) || s->args.size() != 2)
      continue;
    const Pred& f = s->args[0];
    const Pred& arg = s->args[1];
    if (f->kind != PredNode::Kind::App || !isLamSymbol(f->sym) || f->args.size() != 2)
      continue;
    if (f->args[0]->kind != PredNode::Kind::Var || f->args[0]->pool <= 0) continue;
    if (!lambdaFree(arg)) continue;  // keeps the normalization invariant
    Pred reduced = substPredVar(f->args[1], f->args[0]->var, arg);
    Pred inst = pBin(PredOp::Eq, s, reduced);
    std::string key = printPred(inst);
    if (!seen.insert(key).second) continue;
    if ((int)out.size() >= budget) {
      if (budgetExceeded) *budgetExceeded = true;
      break;
    }
    out.push_back(inst);
    collectSubterms(reduced, work);  // new right-hand sides may expose redexes
  }
  return out;
}

// ---------------------------------------------------------------------------
// VC strengthening: alpha/beta instances plus ground constructor, measure and
// coercion-injectivity facts.

namespace {

// Translates a refinement with pred-level aliases installed.
Pred translateWithAliases(TransEnv& env, const Expr& refinement,
                          std::map<Name, Pred> aliases) {
  std::swap(env.aliases, aliases);
  Pred out;
  try {
    out = translateExpr(env, refinement).pred;
  } catch (...) {
    std::swap(env.aliases, aliases);
    throw;
  }
  std::swap(env.aliases, aliases);
  return out;
}

}  // namespace

void strengthen(VC& vc, TransEnv& env, const StrengthenOptions& opts,
                std::vector<std::string>* notes) {
  std::set<std::string> seen;
  auto addInstance = [&](const Pred& p) -> bool {
    if (p->kind == PredNode::Kind::Bool && p->boolVal) return false;
    std::string key = printPred(p);
    if (!seen.insert(key).second) return false;
    vc.instances.push_back(p);
    return true;
  };

  const DataWorld& world = *env.world;

  // Ground constructor and measure instances, to a fixed point: instance
  // predicates may mention further constructor/measure applications.
  std::set<std::string> expanded;
  bool changed = true;
  int guard = 0;
  while (changed && guard++ < 16) {
    changed = false;
    std::vector<Pred> subs;
    allPreds(vc, subs);
    for (const auto& s : subs) {
      if (s->kind != PredNode::Kind::App) continue;
      Name symName(s->sym);
      if (auto it = world.ctors.find(symName); it != world.ctors.end()) {
        std::string key = "c:" + printPred(s);
        if (!expanded.insert(key).second) continue;
        const auto& info = it->second;
        const RefType& refined = info.refinedType;
        // Walk to the result base type, collecting parameter binders.
        std::vector<Name> params;
        RefType cur = refined;
        while (cur->isFun) {
          params.push_back(cur->param);
          cur = cur->codomain;
        }
        if (params.size() != s->args.size()) continue;
        std::map<Name, Pred> aliases;
        for (size_t i = 0; i < params.size(); ++i) aliases[params[i]] = s->args[i];
        aliases[cur->binder] = s;
        try {
          Pred inst = translateWithAliases(env, cur->refinement, std::move(aliases));
          if (addInstance(inst)) changed = true;
        } catch (const TranslateError&) {
          // The instance is optional strengthening; skip on sort friction.
        }
      } else if (auto mt = world.measures.find(symName); mt != world.measures.end()) {
        const RefType& ty = mt->second.type;
        if (ty->codomain->isFun) continue;
        const Expr& r = ty->codomain->refinement;
        if (r->kind == ExprNode::Kind::BoolLit && r->boolVal) continue;
        if (s->args.size() != 1) continue;
        std::string key = "m:" + printPred(s);
        if (!expanded.insert(key).second) continue;
        std::map<Name, Pred> aliases;
        aliases[ty->param] = s->args[0];
        aliases[ty->codomain->binder] = s;
        try {
          Pred inst = translateWithAliases(env, r, std::move(aliases));
          if (addInstance(inst)) changed = true;
        } catch (const TranslateError&) {
        }
      }
    }
  }

  // alpha / beta equivalence instances, iterated to a fixed point within the
  // budget: beta right-hand sides can expose new lambda terms and redexes.
  bool exceeded = false;
  for (int round = 0; round < 8; ++round) {
    bool grew = false;
    for (const auto& a : alphaInstances(vc)) {
      if ((int)vc.instances.size() >= opts.instanceBudget) {
        exceeded = true;
        break;
      }
      grew |= addInstance(a);
    }
    bool betaOver = false;
    int remaining = opts.instanceBudget - (int)vc.instances.size();
    for (const auto& b : betaInstances(vc, std::max(0, remaining), &betaOver)) {
      if ((int)vc.instances.size() >= opts.instanceBudget) {
        exceeded = true;
        break;
      }
      grew |= addInstance(b);
    }
    exceeded |= betaOver;
    if (!grew) break;
  }
  if (exceeded && notes)
    notes->push_back("InstanceBudgetExceeded: alpha/beta instance generation stopped at " +
                     std::to_string(opts.instanceBudget));

  // Injectivity of coercions, as ground instances over occurring pairs.
  for (const char* coercion : {"toUniv_Int", "toUniv_Bool"}) {
    std::vector<Pred> subs;
    allPreds(vc, subs);
    std::vector<Pred> apps;
    std::set<std::string> appSeen;
    for (const auto& s : subs)
      if (s->kind == PredNode::Kind::App && s->sym == coercion)
        if (appSeen.insert(printPred(s)).second) apps.push_back(s);
    for (size_t i = 0; i < apps.size(); ++i)
      for (size_t j = i + 1; j < apps.size(); ++j) {
        Pred premise = pBin(PredOp::Eq, apps[i], apps[j]);
        Pred conclusion = pBin(PredOp::Eq, apps[i]->args[0], apps[j]->args[0]);
        addInstance(pBin(PredOp::Or, pNot(premise), conclusion));
      }
  }
}

}  // namespace rfl
