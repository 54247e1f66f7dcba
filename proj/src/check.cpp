#include "rfl/check.hpp"

#include <algorithm>
#include <cassert>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "rfl/parser.hpp"

namespace rfl {

bool CheckResult::allValid() const {
  for (const auto& o : obligations)
    if (o.verdict.kind != Verdict::Kind::Valid) return false;
  for (const auto& d : diagnostics)
    if (d.level == Diagnostic::Level::Fail || d.level == Diagnostic::Level::Error ||
        d.level == Diagnostic::Level::Unknown)
      return false;
  return true;
}

// ---------------------------------------------------------------------------
// exact_type

RefType exactType(const RefType& t, const Expr& e) {
  if (!t->isFun) {
    Expr self = mkBin(Builtin::Eq, mkVar(t->binder), e);
    return mkBase(t->binder, t->base, mkAnd(t->refinement, self), t->label);
  }
  if (e->kind != ExprNode::Kind::Lam)
    throw CheckError{"ShapeMismatch", e->span,
                     "a function type can only reflect a lambda; eta-expand the "
                     "definition so each parameter is explicit"};
  // Rename the type binder to the lambda binder; lambda binders are distinct
  // by construction, unnamed type parameters need not be.
  Name y = e->name;
  RefType cod = t->codomain;
  if (!(t->param == y)) cod = substTypeExpr(cod, t->param, mkVar(y));
  return mkFun(y, t->domain, exactType(cod, e->a));
}

// ---------------------------------------------------------------------------
// Generated measures and constructor refinement

namespace {

// The alternative of a measure body for a given constructor, if any.
std::optional<std::pair<std::vector<Name>, Expr>> measureAlt(const MeasureDef& m,
                                                             const Name& ctor) {
  if (m.body->kind != ExprNode::Kind::Lam) return std::nullopt;
  const Expr& body = m.body->a;
  if (body->kind != ExprNode::Kind::Case) return std::nullopt;
  for (const auto& alt : body->alts)
    if (alt.ctor == ctor) return std::make_pair(alt.binders, alt.rhs);
  return std::nullopt;
}

}  // namespace

std::map<Name, RefType> refineConstructors(const DataDecl& d,
                                           const std::vector<MeasureDef>& ms) {
  std::map<Name, RefType> out;
  std::vector<BaseType> params;
  for (const auto& tv : d.tyvars) params.push_back(BaseType::mkVar(tv));
  BaseType resultBase = BaseType::mkData(d.name, params);

  for (const auto& c : d.ctors) {
    // Field binder names for the constructor's function type.
    std::vector<Name> fieldNames;
    for (size_t j = 0; j < c.fields.size(); ++j)
      fieldNames.push_back(Name("$a" + std::to_string(j + 1) + "_" + c.name.base));

    Name v("v");
    Expr conj = mkTrue();
    // User measures contribute their per-constructor equation.
    for (const auto& m : ms) {
      if (m.generated) continue;
      auto alt = measureAlt(m, c.name);
      if (!alt)
        throw CheckError{"MeasureAltMissing", m.span,
                         "measure '" + m.name.str() + "' has no equation for "
                         "constructor '" + c.name.str() + "'"};
      Expr rhs = alt->second;
      for (size_t j = 0; j < alt->first.size(); ++j)
        rhs = substitute(rhs, alt->first[j], mkVar(fieldNames[j]));
      conj = mkAnd(std::move(conj),
                   mkBin(Builtin::Eq, mkApp(mkVar(m.name), mkVar(v)), rhs));
    }
    // Selectors pin each field.
    for (size_t j = 0; j < c.fields.size(); ++j) {
      Name sel("sel" + c.name.base + "_" + std::to_string(j + 1));
      conj = mkAnd(std::move(conj), mkBin(Builtin::Eq, mkApp(mkVar(sel), mkVar(v)),
                                          mkVar(fieldNames[j])));
    }
    // Checkers: own positive, others negated.
    conj = mkAnd(std::move(conj), mkApp(mkVar(Name("is" + c.name.base)), mkVar(v)));
    for (const auto& c2 : d.ctors)
      if (!(c2.name == c.name))
        conj = mkAnd(std::move(conj),
                     mkNot(mkApp(mkVar(Name("is" + c2.name.base)), mkVar(v))));

    RefType t = mkBase(v, resultBase, conj);
    for (size_t j = c.fields.size(); j-- > 0;) {
      RefType field = c.fields[j];
      if (!field->isFun) field = renameBinder(field, Name("$fv"));
      t = mkFun(fieldNames[j], field, t);
    }
    out[c.name] = t;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Type-variable instantiation slots

namespace {

bool isSlotName(const Name& n) { return n.base.rfind("$a!", 0) == 0; }

std::optional<Name> slotOf(const RefType& t) {
  if (t->isFun) return std::nullopt;
  if (t->base.kind == BaseType::Kind::Var && isSlotName(t->base.name))
    return t->base.name;
  return std::nullopt;
}

struct SlotState {
  std::map<Name, Name> parent;
  std::map<Name, RefType> bound;
  int counter = 0;

  Name fresh() {
    Name n("$a!" + std::to_string(++counter));
    parent[n] = n;
    return n;
  }

  Name find(Name n) {
    while (!(parent.at(n) == n)) n = parent.at(n);
    return n;
  }

  void unionSlots(const Name& a, const Name& b) {
    Name ra = find(a), rb = find(b);
    if (ra == rb) return;
    parent[rb] = ra;
  }

  bool isBound(const Name& n) { return bound.count(find(n)) != 0; }
  const RefType& binding(const Name& n) { return bound.at(find(n)); }
  void bind(const Name& n, RefType t) { bound[find(n)] = std::move(t); }
};

// ---------------------------------------------------------------------------
// The checker

struct TermHooks {
  Name fun;                        // current recursive definition
  std::vector<Name> params;        // its parameter names, outermost first
  std::vector<Expr> metric;        // components over params
  size_t callArity = 0;            // spine length that triggers the check
  bool active = false;
};

class Checker {
 public:
  Checker(const Program& prog, const CheckOptions& opts, std::string file)
      : prog_(prog), opts_(opts), file_(std::move(file)) {
    logic_ = std::make_shared<LogicEnv>();
    logic_->lambdaPool = opts.lambdaPool;
    result_.logic = logic_;
  }

  CheckResult run() {
    try {
      processProgram(loadPrelude(), /*internal=*/true);
      processProgram(prog_, /*internal=*/false);
    } catch (const CheckError& e) {
      error(e.kind, e.span, e.msg);
    } catch (const TranslateError& e) {
      error(e.kind, e.span, e.msg);
    }
    result_.world = world_;
    result_.accepted = result_.allValid();
    return result_;
  }

 private:
  // --- diagnostics -----------------------------------------------------------

  void error(const std::string& rule, Span span, const std::string& msg) {
    Diagnostic d;
    d.level = Diagnostic::Level::Error;
    d.file = file_;
    d.span = span;
    d.rule = rule;
    d.message = msg;
    result_.diagnostics.push_back(std::move(d));
  }

  void info(Span span, const std::string& msg) {
    Diagnostic d;
    d.level = Diagnostic::Level::Info;
    d.file = file_;
    d.span = span;
    d.rule = "Info";
    d.message = msg;
    result_.diagnostics.push_back(std::move(d));
  }

  // --- environment -----------------------------------------------------------

  struct Scope {
    Checker* c;
    size_t depth;
    std::vector<std::pair<Name, std::optional<RefType>>> shadowed;
    Scope(Checker* ch) : c(ch), depth(ch->gamma_.size()) {}
    ~Scope() {
      c->gamma_.resize(depth);
      for (auto it = shadowed.rbegin(); it != shadowed.rend(); ++it) {
        if (it->second) c->varTypes_[it->first] = *it->second;
        else c->varTypes_.erase(it->first);
      }
    }
  };

  void push(Scope& sc, const Name& x, RefType t) {
    auto it = varTypes_.find(x);
    sc.shadowed.emplace_back(x, it == varTypes_.end()
                                     ? std::optional<RefType>()
                                     : std::optional<RefType>(it->second));
    gamma_.emplace_back(x, t);
    varTypes_[x] = std::move(t);
  }

  TransEnv transEnv() {
    TransEnv env;
    env.world = &world_;
    env.logic = logic_;
    env.vars = varTypes_;
    env.nonTerminating = nonTerminating_;
    return env;
  }

  // --- solving ---------------------------------------------------------------

  Verdict discharge(VC& vc) {
    TransEnv env = transEnv();
    StrengthenOptions sopts;
    sopts.instanceBudget = opts_.instanceBudget;
    std::vector<std::string> notes;
    strengthen(vc, env, sopts, &notes);
    for (const auto& n : notes) info(vc.span, n);
    if (!opts_.externalSolver.empty()) {
      std::string text = emitSmtlib2(vc);
      std::string path = "/tmp/rfl_vc_" + std::to_string(::getpid()) + "_" +
                         std::to_string(vcCounter_) + ".smt2";
      {
        std::ofstream out(path);
        out << text;
      }
      auto res = runExternalSolver(opts_.externalSolver, path);
      std::remove(path.c_str());
      Verdict v;
      if (!res) {
        v.kind = Verdict::Kind::Unknown;
        v.reason = "external solver failed";
      } else if (*res == "unsat") {
        v.kind = Verdict::Kind::Valid;
      } else if (*res == "sat") {
        v.kind = Verdict::Kind::Invalid;
      } else {
        v.kind = Verdict::Kind::Unknown;
        v.reason = "external solver returned unknown";
      }
      return v;
    }
    SolveOptions so;
    so.branchBudget = opts_.branchBudget;
    so.bbDepth = opts_.bbDepth;
    return solve(vc, so);
  }

  void recordObligation(const std::string& rule, Span span, VC vc, Verdict verdict,
                        const std::string& metric = "") {
    Obligation o;
    o.declName = curDecl_;
    o.index = ++obligationIdx_;
    o.span = span.valid() ? span : curSpan_;
    o.rule = rule;
    o.metric = metric;
    o.vc = std::move(vc);
    o.verdict = verdict;
    o.internal = internal_;
    if (verdict.kind != Verdict::Kind::Valid) {
      Diagnostic d;
      d.level = verdict.kind == Verdict::Kind::Invalid ? Diagnostic::Level::Fail
                                                       : Diagnostic::Level::Unknown;
      d.file = file_;
      d.span = o.span;
      d.rule = rule;
      d.message = "goal: " + printPred(o.vc.goal) +
                  (metric.empty() ? "" : "  metric: " + metric);
      if (verdict.kind == Verdict::Kind::Invalid)
        d.countermodel = verdict.model.render();
      if (verdict.kind == Verdict::Kind::Unknown) d.message += "  (" + verdict.reason + ")";
      d.renderedVC = renderVC(o.vc);
      result_.diagnostics.push_back(std::move(d));
    }
    result_.obligations.push_back(std::move(o));
  }

  // --- slots / erasure unification -------------------------------------------

  RefType freshSlotType() {
    Name s = slots_.fresh();
    return mkBase(Name("$v"), BaseType::mkVar(s), mkTrue());
  }

  // Instantiates the free type variables of a declared type with fresh slots.
  RefType instantiateScheme(const RefType& t) {
    std::set<Name> tvs = freeTyVars(t);
    std::map<Name, BaseType> inst;
    for (const auto& tv : tvs) {
      if (rigid_.count(tv) || isSlotName(tv)) continue;
      inst[tv] = BaseType::mkVar(slots_.fresh());
    }
    if (inst.empty()) return t;
    return substTyVars(t, inst);
  }

  static BaseType substTyVarsBase(const BaseType& b,
                                  const std::map<Name, BaseType>& inst) {
    if (b.kind == BaseType::Kind::Var) {
      auto it = inst.find(b.name);
      return it != inst.end() ? it->second : b;
    }
    if (b.kind == BaseType::Kind::Data) {
      std::vector<BaseType> ps;
      ps.reserve(b.params.size());
      for (const auto& p : b.params) ps.push_back(substTyVarsBase(p, inst));
      return BaseType::mkData(b.name, std::move(ps));
    }
    return b;
  }

  static RefType substTyVars(const RefType& t, const std::map<Name, BaseType>& inst) {
    if (t->isFun)
      return mkFun(t->param, substTyVars(t->domain, inst),
                   substTyVars(t->codomain, inst));
    return mkBase(t->binder, substTyVarsBase(t->base, inst), t->refinement, t->label);
  }

  // Resolves slot bindings; a bound slot occurrence conjoins its own
  // refinement onto the binding.
  RefType resolve(const RefType& t) {
    if (t->isFun)
      return mkFun(t->param, resolve(t->domain), resolve(t->codomain));
    if (auto s = slotOf(t)) {
      Name root = slots_.find(*s);
      if (slots_.isBound(root)) {
        RefType b = resolve(slots_.binding(root));
        if (b->isFun) {
          // A slot with a nontrivial refinement cannot be function-typed.
          return b;
        }
        Expr extra = substitute(t->refinement, t->binder, mkVar(b->binder));
        return mkBase(b->binder, b->base, mkAnd(b->refinement, extra), b->label);
      }
      if (!(root == *s)) return mkBase(t->binder, BaseType::mkVar(root),
                                       t->refinement, t->label);
      return t;
    }
    // Resolve slots inside data parameters.
    if (t->base.kind == BaseType::Kind::Data) {
      BaseType b = resolveBase(t->base);
      return mkBase(t->binder, std::move(b), t->refinement, t->label);
    }
    return t;
  }

  BaseType resolveBase(const BaseType& b) {
    if (b.kind == BaseType::Kind::Var && isSlotName(b.name)) {
      Name root = slots_.find(b.name);
      if (slots_.isBound(root)) {
        RefType bd = resolve(slots_.binding(root));
        if (!bd->isFun) return bd->base;
        return b;  // function-typed data parameter: left opaque
      }
      return BaseType::mkVar(root);
    }
    if (b.kind == BaseType::Kind::Data) {
      std::vector<BaseType> ps;
      ps.reserve(b.params.size());
      for (const auto& p : b.params) ps.push_back(resolveBase(p));
      return BaseType::mkData(b.name, std::move(ps));
    }
    return b;
  }

  bool occursSlot(const Name& slot, const RefType& t) {
    for (const auto& tv : freeTyVars(resolve(t)))
      if (isSlotName(tv) && slots_.find(tv) == slots_.find(slot)) return true;
    return false;
  }

  void unifyErasure(const RefType& a0, const RefType& b0, Span span) {
    RefType a = resolve(a0);
    RefType b = resolve(b0);
    auto sa = slotOf(a);
    auto sb = slotOf(b);
    if (sa && sb) {
      slots_.unionSlots(*sa, *sb);
      return;
    }
    if (sa || sb) {
      const Name& s = sa ? *sa : *sb;
      const RefType& other = sa ? b : a;
      if (occursSlot(s, other))
        throw CheckError{"ArityMismatch", span, "cyclic type instantiation"};
      slots_.bind(s, other);
      return;
    }
    if (a->isFun != b->isFun)
      throw CheckError{"ArityMismatch", span,
                       "function/value shape mismatch between " + printType(a) +
                           " and " + printType(b)};
    if (a->isFun) {
      unifyErasure(a->domain, b->domain, span);
      unifyErasure(a->codomain, b->codomain, span);
      return;
    }
    unifyBase(a->base, b->base, span);
  }

  void unifyBase(const BaseType& x, const BaseType& y, Span span) {
    BaseType a = resolveBase(x);
    BaseType b = resolveBase(y);
    bool slotA = a.kind == BaseType::Kind::Var && isSlotName(a.name);
    bool slotB = b.kind == BaseType::Kind::Var && isSlotName(b.name);
    if (slotA && slotB) {
      slots_.unionSlots(a.name, b.name);
      return;
    }
    if (slotA || slotB) {
      const Name& s = slotA ? a.name : b.name;
      const BaseType& other = slotA ? b : a;
      slots_.bind(s, trivialBase(other));
      return;
    }
    if (a.kind != b.kind)
      throw CheckError{"ArityMismatch", span,
                       "base type mismatch: " + printBaseType(a) + " vs " +
                           printBaseType(b)};
    if (a.kind == BaseType::Kind::Var && !(a.name == b.name))
      throw CheckError{"ArityMismatch", span,
                       "type variable mismatch: " + a.name.str() + " vs " +
                           b.name.str()};
    if (a.kind == BaseType::Kind::Data) {
      if (!(a.name == b.name) || a.params.size() != b.params.size())
        throw CheckError{"ArityMismatch", span,
                         "data type mismatch: " + printBaseType(a) + " vs " +
                             printBaseType(b)};
      for (size_t i = 0; i < a.params.size(); ++i) unifyBase(a.params[i], b.params[i], span);
    }
  }

  // --- subtyping --------------------------------------------------------------

  void subtype(const RefType& t1in, const RefType& t2in, Span span,
               const std::string& what) {
    RefType t1 = resolve(t1in);
    RefType t2 = resolve(t2in);
    if (slotOf(t1) || slotOf(t2)) {
      unifyErasure(t1, t2, span);
      t1 = resolve(t1);
      t2 = resolve(t2);
      if (slotOf(t1) && slotOf(t2)) return;  // both unconstrained
    }
    if (t1->isFun != t2->isFun)
      throw CheckError{"ArityMismatch", span,
                       what + ": function/value mismatch between " + printType(t1) +
                           " and " + printType(t2)};
    if (t1->isFun) {
      subtype(t2->domain, t1->domain, span, what);
      Name x = t2->param;
      RefType cod1 = t1->codomain;
      if (!(t1->param == x)) cod1 = substTypeExpr(cod1, t1->param, mkVar(x));
      Scope sc(this);
      push(sc, x, t2->domain);
      subtype(cod1, t2->codomain, span, what);
      return;
    }
    unifyBase(t1->base, t2->base, span);
    BaseType base = resolveBase(t1->base);

    Name v = supply_.fresh("$vc");
    Expr r1 = substitute(t1->refinement, t1->binder, mkVar(v));
    Expr r2 = substitute(t2->refinement, t2->binder, mkVar(v));
    if (alphaEq(r1, r2)) return;  // reflexive obligation
    if (r2->kind == ExprNode::Kind::BoolLit && r2->boolVal) return;

    TransEnv env = transEnv();
    VC vc = makeVC(env, gamma_, v, base, r1, r2, span,
                   file_ + " " + curDecl_ + " [Sub-Base]");
    Verdict verdict = discharge(vc);
    ++vcCounter_;
    recordObligation("Sub-Base", span, std::move(vc), verdict);
  }

  // --- selfification -----------------------------------------------------------

  RefType selfify(const RefType& t, const Expr& e) {
    RefType r = resolve(t);
    if (r->isFun || slotOf(r)) return r;
    if (r->label != TermLabel::Terminating) return r;
    if (e->kind == ExprNode::Kind::Case || e->kind == ExprNode::Kind::Fix) return r;
    Expr self = mkBin(Builtin::Eq, mkVar(r->binder), e);
    return mkBase(r->binder, r->base, mkAnd(r->refinement, self), r->label);
  }

  // --- termination ---------------------------------------------------------------

  // Builds the lexicographic decrease goal: old metric values mOld, new mNew.
  Expr lexDecrease(const std::vector<Expr>& mNew, const std::vector<Expr>& mOld) {
    Expr out;
    for (size_t k = 0; k < mNew.size(); ++k) {
      Expr stepK = mkAnd(mkBin(Builtin::Le, mkIntLit(0), mNew[k]),
                         mkBin(Builtin::Lt, mNew[k], mOld[k]));
      for (size_t j = k; j-- > 0;)
        stepK = mkAnd(mkBin(Builtin::Eq, mNew[j], mOld[j]), stepK);
      out = out ? mkBin(Builtin::Or, out, stepK) : stepK;
    }
    return out ? out : mkBoolLit(false);
  }

  void terminationCallCheck(const std::vector<Expr>& args, Span span) {
    if (!hooks_.active) return;
    std::vector<Expr> mNew;
    for (const auto& m : hooks_.metric) {
      Expr e = m;
      for (size_t i = 0; i < hooks_.params.size() && i < args.size(); ++i)
        e = substitute(e, hooks_.params[i], args[i]);
      mNew.push_back(e);
    }
    Expr goal = lexDecrease(mNew, hooks_.metric);
    Name v = supply_.fresh("$vc");
    TransEnv env = transEnv();
    std::string metricText = renderMetric();
    VC vc = makeVC(env, gamma_, v, BaseType::mkUnit(), mkTrue(), goal, span,
                   file_ + " " + curDecl_ + " [NonDecreasingCall]");
    Verdict verdict = discharge(vc);
    ++vcCounter_;
    recordObligation("NonDecreasingCall", span, std::move(vc), verdict, metricText);
  }

  std::string renderMetric() {
    std::string s = "[";
    for (size_t i = 0; i < hooks_.metric.size(); ++i) {
      if (i) s += ", ";
      s += printExpr(hooks_.metric[i]);
    }
    return s + "]";
  }

  // Chooses the default termination metric: the first Int parameter, else the
  // first ADT parameter's first declared measure.
  bool defaultMetric(const std::vector<Name>& params,
                     const std::vector<RefType>& paramTypes, Span span) {
    for (size_t i = 0; i < params.size(); ++i) {
      RefType t = resolve(paramTypes[i]);
      if (t->isFun) continue;
      if (t->base.kind == BaseType::Kind::Int) {
        hooks_.metric = {mkVar(params[i])};
        hooks_.callArity = i + 1;
        return true;
      }
    }
    for (size_t i = 0; i < params.size(); ++i) {
      RefType t = resolve(paramTypes[i]);
      if (t->isFun || t->base.kind != BaseType::Kind::Data) continue;
      auto it = world_.measuresOf.find(t->base.name);
      if (it == world_.measuresOf.end()) continue;
      std::vector<Name> userMeasures;
      for (const auto& m : it->second)
        if (!world_.measures.at(m).generated) userMeasures.push_back(m);
      if (userMeasures.empty()) continue;
      if (userMeasures.size() > 1 && opts_.verbose)
        info(span, "several measures on " + t->base.name.str() +
                       "; using '" + userMeasures[0].str() +
                       "' as the termination metric");
      hooks_.metric = {mkApp(mkVar(userMeasures[0]), mkVar(params[i]))};
      hooks_.callArity = i + 1;
      return true;
    }
    return false;
  }

  // Does the body recursively mention the current definition?
  static bool mentions(const Expr& e, const Name& f) { return occursFree(e, f); }

  // --- bidirectional checking -----------------------------------------------------

  struct Spine {
    Expr head;
    std::vector<Expr> args;   // outermost application last
    std::vector<Span> spans;
  };

  static Spine flatten(const Expr& e) {
    Spine s;
    Expr cur = e;
    std::vector<Expr> rev;
    std::vector<Span> revSpans;
    while (cur->kind == ExprNode::Kind::App) {
      rev.push_back(cur->b);
      revSpans.push_back(cur->span);
      cur = cur->a;
    }
    s.head = cur;
    s.args.assign(rev.rbegin(), rev.rend());
    s.spans.assign(revSpans.rbegin(), revSpans.rend());
    return s;
  }

  RefType lookupVar(const Name& x, Span span) {
    for (auto it = gamma_.rbegin(); it != gamma_.rend(); ++it)
      if (it->first == x) return it->second;
    if (auto it = world_.measures.find(x); it != world_.measures.end())
      return it->second.type;
    throw CheckError{"UnboundVariable", span, "unbound variable '" + x.str() + "'"};
  }

  RefType constType(Builtin op) {
    Name x("$x"), y("$y"), v("v");
    auto intT = [] { return BaseType::mkInt(); };
    auto boolT = [] { return BaseType::mkBool(); };
    switch (op) {
      case Builtin::Eq:
      case Builtin::Ne: {
        RefType a = freshSlotType();
        Expr r = mkBin(Builtin::Eq, mkVar(v),
                       mkBin(op, mkVar(x), mkVar(y)));
        return mkFun(x, a, mkFun(y, a, mkBase(v, boolT(), r)));
      }
      case Builtin::Lt:
      case Builtin::Le:
      case Builtin::Gt:
      case Builtin::Ge: {
        Expr r = mkBin(Builtin::Eq, mkVar(v), mkBin(op, mkVar(x), mkVar(y)));
        return mkFun(x, trivialBase(intT()),
                     mkFun(y, trivialBase(intT()), mkBase(v, boolT(), r)));
      }
      case Builtin::Add:
      case Builtin::Sub: {
        Expr r = mkBin(Builtin::Eq, mkVar(v), mkBin(op, mkVar(x), mkVar(y)));
        return mkFun(x, trivialBase(intT()),
                     mkFun(y, trivialBase(intT()), mkBase(v, intT(), r)));
      }
      case Builtin::And:
      case Builtin::Or: {
        Expr r = mkBin(Builtin::Eq, mkVar(v), mkBin(op, mkVar(x), mkVar(y)));
        return mkFun(x, trivialBase(boolT()),
                     mkFun(y, trivialBase(boolT()), mkBase(v, boolT(), r)));
      }
      case Builtin::Not: {
        Expr r = mkBin(Builtin::Eq, mkVar(v), mkNot(mkVar(x)));
        return mkFun(x, trivialBase(boolT()), mkBase(v, boolT(), r));
      }
    }
    throw CheckError{"UnboundVariable", {}, "unknown operator"};
  }

  RefType synth(const Expr& e) {
    switch (e->kind) {
      case ExprNode::Kind::IntLit:
        return mkBase(Name("v"), BaseType::mkInt(),
                      mkBin(Builtin::Eq, mkVar(Name("v")), e));
      case ExprNode::Kind::BoolLit:
        return mkBase(Name("v"), BaseType::mkBool(),
                      mkBin(Builtin::Eq, mkVar(Name("v")), e));
      case ExprNode::Kind::UnitLit: return trivialBase(BaseType::mkUnit());
      case ExprNode::Kind::Var: {
        if (hooks_.active && e->name == hooks_.fun)
          throw CheckError{"NoUsableMetric", e->span,
                           "recursive reference to '" + hooks_.fun.str() +
                               "' must be a fully applied call"};
        RefType t = instantiateScheme(lookupVar(e->name, e->span));
        return selfify(t, e);
      }
      case ExprNode::Kind::Const: return constType(e->op);
      case ExprNode::Kind::Ctor: {
        auto it = world_.ctors.find(e->name);
        if (it == world_.ctors.end())
          throw CheckError{"UnboundVariable", e->span,
                           "unknown constructor '" + e->name.str() + "'"};
        RefType t = instantiateScheme(it->second.refinedType);
        RefType res = applyArgs(t, e->args, e->span);
        return selfify(res, e);
      }
      case ExprNode::Kind::App: {
        Spine sp = flatten(e);
        // let-form: an immediately applied lambda binds its argument.
        if (sp.head->kind == ExprNode::Kind::Lam && !sp.args.empty()) {
          RefType tRhs = synth(sp.args[0]);
          Scope sc(this);
          push(sc, sp.head->name, tRhs);
          Expr inner = sp.head->a;
          for (size_t i = 1; i < sp.args.size(); ++i) inner = mkApp(inner, sp.args[i]);
          RefType tBody = synth(inner);
          RefType out = substTypeExpr(resolve(tBody), sp.head->name, sp.args[0]);
          return out;
        }
        RefType tf;
        if (sp.head->kind == ExprNode::Kind::Var && hooks_.active &&
            sp.head->name == hooks_.fun) {
          if (sp.args.size() < hooks_.callArity)
            throw CheckError{"NoUsableMetric", e->span,
                             "recursive reference to '" + hooks_.fun.str() +
                                 "' must be a fully applied call"};
          terminationCallCheck(sp.args, e->span);
          tf = instantiateScheme(lookupVar(sp.head->name, sp.head->span));
        } else {
          tf = synth(sp.head);
        }
        RefType res = applyArgs(tf, sp.args, e->span);
        return selfify(res, e);
      }
      case ExprNode::Kind::Lam:
        throw CheckError{"ArityMismatch", e->span,
                         "cannot synthesize a type for a lambda here; bind it "
                         "with a declared type"};
      case ExprNode::Kind::Case:
        throw CheckError{"ArityMismatch", e->span,
                         "a case expression needs a checked position"};
      case ExprNode::Kind::Fix:
        throw CheckError{"ArityMismatch", e->span, "fix is internal"};
    }
    throw CheckError{"ArityMismatch", e->span, "unsupported expression"};
  }

  RefType applyArgs(RefType t, const std::vector<Expr>& args, Span span) {
    for (const auto& arg : args) {
      RefType f = resolve(t);
      if (auto s = slotOf(f)) {
        // Arrow-expand an unconstrained slot.
        RefType dom = freshSlotType();
        RefType cod = freshSlotType();
        slots_.bind(*s, mkFun(Name("$w"), dom, cod));
        f = resolve(f);
      }
      if (!f->isFun)
        throw CheckError{"ArityMismatch", arg->span.valid() ? arg->span : span,
                         "too many arguments: " + printType(f) +
                             " is not a function type"};
      if (arg->kind == ExprNode::Kind::Lam) {
        check(arg, f->domain);
      } else {
        RefType ta = synth(arg);
        RefType dom = resolve(f->domain);
        if (auto s = slotOf(dom)) {
          // A bare type-variable domain takes the argument's shape; the
          // selfification conjunct must not leak into the instantiation or
          // every later use of the variable would be forced equal to this
          // argument.
          RefType rta = resolve(ta);
          if (occursSlot(*s, rta))
            throw CheckError{"ArityMismatch", span, "cyclic type instantiation"};
          if (rta->isFun) {
            slots_.bind(*s, rta);
          } else {
            slots_.bind(*s, mkBase(rta->binder, rta->base, mkTrue(), rta->label));
          }
        } else {
          unifyErasure(dom, ta, arg->span.valid() ? arg->span : span);
        }
        subtype(ta, resolve(f->domain), arg->span.valid() ? arg->span : span,
                "argument");
      }
      t = substTypeExpr(resolve(f->codomain), f->param, arg);
    }
    return t;
  }

  void check(const Expr& e, const RefType& tIn) {
    RefType t = resolve(tIn);
    switch (e->kind) {
      case ExprNode::Kind::Lam: {
        if (auto s = slotOf(t)) {
          RefType dom = freshSlotType();
          RefType cod = freshSlotType();
          slots_.bind(*s, mkFun(Name("$w"), dom, cod));
          t = resolve(t);
        }
        if (!t->isFun)
          throw CheckError{"ArityMismatch", e->span,
                           "lambda checked against non-function type " +
                               printType(t)};
        Scope sc(this);
        push(sc, e->name, t->domain);
        RefType cod = t->codomain;
        if (!(t->param == e->name))
          cod = substTypeExpr(cod, t->param, mkVar(e->name));
        check(e->a, cod);
        return;
      }
      case ExprNode::Kind::Case: {
        checkCase(e, t);
        return;
      }
      case ExprNode::Kind::App: {
        Spine sp = flatten(e);
        if (sp.head->kind == ExprNode::Kind::Lam && !sp.args.empty()) {
          RefType tRhs = synth(sp.args[0]);
          Scope sc(this);
          push(sc, sp.head->name, tRhs);
          Expr inner = sp.head->a;
          for (size_t i = 1; i < sp.args.size(); ++i) inner = mkApp(inner, sp.args[i]);
          check(inner, t);
          return;
        }
        RefType te = synth(e);
        subtype(te, t, e->span, "result");
        return;
      }
      default: {
        RefType te = synth(e);
        subtype(te, t, e->span, "result");
        return;
      }
    }
  }

  void checkCase(const Expr& e, const RefType& t) {
    RefType tScrut = resolve(synth(e->a));
    if (slotOf(tScrut))
      throw CheckError{"ArityMismatch", e->span,
                       "cannot determine the scrutinee's data type"};
    if (tScrut->isFun)
      throw CheckError{"ArityMismatch", e->span, "case scrutinee is a function"};

    if (tScrut->base.kind == BaseType::Kind::Bool) {
      for (const auto& alt : e->alts) {
        bool isTrue = alt.ctor.base == "True";
        Expr fact = isTrue ? e->a : mkNot(e->a);
        Scope sc(this);
        push(sc, supply_.fresh("$g"),
             mkBase(Name("$u"), BaseType::mkUnit(), fact));
        // The scrutinee binder names the scrutinee value in the branch.
        push(sc, e->name,
             mkBase(Name("$u"), BaseType::mkBool(),
                    mkBin(Builtin::Eq, mkVar(Name("$u")), mkBoolLit(isTrue))));
        check(alt.rhs, t);
      }
      return;
    }

    if (tScrut->base.kind != BaseType::Kind::Data)
      throw CheckError{"ArityMismatch", e->span,
                       "case scrutinee must be a data type or Bool, got " +
                           printBaseType(tScrut->base)};
    const Name dataType = tScrut->base.name;
    auto dataIt = world_.datas.find(dataType);
    if (dataIt == world_.datas.end())
      throw CheckError{"UnboundVariable", e->span,
                       "unknown data type " + dataType.str()};
    const DataDecl& decl = dataIt->second;

    // Coverage: exactly the declared constructors, each once.
    std::set<Name> seen;
    for (const auto& alt : e->alts) {
      if (!world_.ctors.count(alt.ctor) ||
          !(world_.ctors.at(alt.ctor).dataType == dataType))
        throw CheckError{"UnknownConstructor", e->span,
                         "constructor '" + alt.ctor.str() + "' does not belong to " +
                             dataType.str()};
      if (!seen.insert(alt.ctor).second)
        throw CheckError{"OverlappingPatterns", e->span,
                         "duplicate alternative for '" + alt.ctor.str() + "'"};
    }
    if (seen.size() != decl.ctors.size())
      throw CheckError{"NonExhaustive", e->span,
                       "case does not cover every constructor of " + dataType.str()};

    // Instantiate the data parameters from the scrutinee type.
    std::map<Name, BaseType> inst;
    for (size_t i = 0; i < decl.tyvars.size(); ++i)
      inst[decl.tyvars[i]] = i < tScrut->base.params.size()
                                 ? tScrut->base.params[i]
                                 : BaseType::mkVar(slots_.fresh());

    for (const auto& alt : e->alts) {
      const auto& info = world_.ctors.at(alt.ctor);
      // Field types and the constructor's output refinement, instantiated.
      RefType ctorTy = substTyVars(info.refinedType, inst);
      std::vector<RefType> fieldTys;
      RefType walk = ctorTy;
      std::vector<Name> fieldParams;
      while (walk->isFun) {
        fieldTys.push_back(walk->domain);
        fieldParams.push_back(walk->param);
        walk = walk->codomain;
      }
      if (fieldTys.size() != alt.binders.size())
        throw CheckError{"ArityMismatch", e->span,
                         "alternative for '" + alt.ctor.str() +
                             "' binds the wrong number of fields"};
      Scope sc(this);
      // Bind fields, substituting earlier binders into later field types.
      for (size_t j = 0; j < fieldTys.size(); ++j) {
        RefType ft = fieldTys[j];
        for (size_t k = 0; k < j; ++k)
          ft = substTypeExpr(ft, fieldParams[k], mkVar(alt.binders[k]));
        push(sc, alt.binders[j], ft);
      }
      // Scrutinee binder: scrutinee refinement + constructor refinement +
      // the matched-value equation.
      Expr outR = walk->refinement;
      for (size_t k = 0; k < fieldParams.size(); ++k)
        outR = substitute(outR, fieldParams[k], mkVar(alt.binders[k]));
      outR = substitute(outR, walk->binder, mkVar(Name("$u")));
      Expr scrutR = substitute(tScrut->refinement, tScrut->binder, mkVar(Name("$u")));
      std::vector<Expr> ctorArgs;
      for (const auto& b : alt.binders) ctorArgs.push_back(mkVar(b));
      Expr matched = mkBin(Builtin::Eq, mkVar(Name("$u")),
                           mkCtor(alt.ctor, ctorArgs));
      RefType binderTy = mkBase(Name("$u"), tScrut->base,
                                mkAnd(scrutR, mkAnd(outR, matched)));
      push(sc, e->name, binderTy);
      check(alt.rhs, t);
    }
  }

  // --- declaration processing ---------------------------------------------------

  void processProgram(const Program& p, bool internal) {
    internal_ = internal;
    for (const auto& [kind, idx] : p.order) {
      switch (kind) {
        case Program::DeclKind::Data: processData(p.datas[idx]); break;
        case Program::DeclKind::Measure: processMeasure(p.measures[idx]); break;
        case Program::DeclKind::Reflect: processReflect(p.reflects[idx]); break;
        case Program::DeclKind::Let: processLet(p.lets[idx]); break;
        case Program::DeclKind::Prop: processProp(p.props[idx]); break;
      }
    }
  }

  void registerMeasure(const MeasureDef& m) {
    RefType t = m.type;
    if (!t->isFun || t->domain->isFun ||
        t->domain->base.kind != BaseType::Kind::Data)
      throw CheckError{"MeasureAltMissing", m.span,
                       "measure '" + m.name.str() +
                           "' must take a data-type argument"};
    Name dataType = t->domain->base.name;
    world_.measures[m.name] = {m.type, dataType, m.generated, m.body};
    world_.measuresOf[dataType].push_back(m.name);
  }

  void refreshCtorRefinements(const Name& dataType) {
    const DataDecl& d = world_.datas.at(dataType);
    std::vector<MeasureDef> ms;
    for (const auto& mn : world_.measuresOf[dataType]) {
      const auto& info = world_.measures.at(mn);
      MeasureDef md;
      md.name = mn;
      md.type = info.type;
      md.body = info.body;
      md.generated = info.generated;
      ms.push_back(std::move(md));
    }
    // refineConstructors wants user measures; order: user then generated.
    std::stable_sort(ms.begin(), ms.end(),
                     [](const MeasureDef& a, const MeasureDef& b) {
                       return a.generated < b.generated;
                     });
    auto refined = refineConstructors(d, ms);
    for (size_t i = 0; i < d.ctors.size(); ++i) {
      auto& info = world_.ctors[d.ctors[i].name];
      info.refinedType = refined.at(d.ctors[i].name);
    }
  }

  void processData(const DataDecl& d) {
    if (world_.datas.count(d.name))
      throw CheckError{"DuplicateName", d.span,
                       "data type '" + d.name.str() + "' already declared"};
    world_.datas[d.name] = d;
    for (size_t i = 0; i < d.ctors.size(); ++i) {
      DataWorld::CtorInfo info;
      info.dataType = d.name;
      info.tyvars = d.tyvars;
      info.fields = d.ctors[i].fields;
      info.index = i;
      info.checker = Name("is" + d.ctors[i].name.base);
      for (size_t j = 0; j < d.ctors[i].fields.size(); ++j)
        info.selectors.push_back(
            Name("sel" + d.ctors[i].name.base + "_" + std::to_string(j + 1)));
      world_.ctors[d.ctors[i].name] = std::move(info);
    }
    for (auto& m : generatedMeasures(d)) registerMeasure(m);
    refreshCtorRefinements(d.name);
  }

  void processMeasure(const MeasureDef& m) {
    // Shape: one case over the argument with one alternative per constructor.
    registerMeasure(m);
    const Name dataType = world_.measures.at(m.name).dataType;
    if (!m.generated) {
      const DataDecl& d = world_.datas.at(dataType);
      for (const auto& c : d.ctors)
        if (!measureAlt(m, c.name))
          throw CheckError{"MeasureAltMissing", m.span,
                           "measure '" + m.name.str() + "' misses constructor '" +
                               c.name.str() + "'"};
    }
    refreshCtorRefinements(dataType);
    // Check the measure body like an ordinary terminating definition.
    beginDecl(m.name.str(), m.span);
    checkDefinition(m.name, m.type, m.body, std::nullopt, m.span,
                    /*reflectStrengthen=*/false);
    endDecl();
  }

  void processReflect(const ReflectDecl& r) {
    beginDecl(r.name.str(), r.span);
    wellFormed(r.type, r.span);
    RefType exact;
    try {
      exact = exactType(r.type, r.body);
    } catch (const CheckError& e) {
      error(e.kind, e.span, e.msg);
      endDecl();
      return;
    }
    bool ok = checkDefinition(r.name, exact, r.body, r.metric, r.span, true);
    declareTop(r.name, ok ? exact : relabel(exact, TermLabel::Unlabeled));
    if (!ok) nonTerminating_.insert(r.name);
    endDecl();
  }

  void processLet(const LetDecl& l) {
    beginDecl(l.name.str(), l.span);
    wellFormed(l.type, l.span);
    if (!l.body) {
      declareTop(l.name, l.type);  // assumed (the extensionality combinator)
      endDecl();
      return;
    }
    bool ok = checkDefinition(l.name, l.type, *l.body, l.metric, l.span, false);
    declareTop(l.name, l.type);
    if (!ok) nonTerminating_.insert(l.name);
    endDecl();
  }

  void processProp(const PropDecl& p) {
    beginDecl(p.name.str(), p.span);
    wellFormed(p.type, p.span);
    bool ok = checkDefinition(p.name, p.type, p.body, p.metric, p.span, false);
    declareTop(p.name, p.type);
    if (!ok) nonTerminating_.insert(p.name);
    endDecl();
  }

  void beginDecl(const std::string& name, Span span) {
    curDecl_ = name;
    curSpan_ = span;
    obligationIdx_ = 0;
  }
  void endDecl() {
    hooks_ = {};
    rigid_.clear();
  }

  void declareTop(const Name& n, RefType t) {
    if (varTypes_.count(n)) {
      error("DuplicateName", curSpan_, "'" + n.str() + "' is already defined");
      return;
    }
    gamma_.emplace_back(n, t);
    varTypes_[n] = std::move(t);
  }

  static RefType relabel(const RefType& t, TermLabel label) {
    if (t->isFun) return mkFun(t->param, t->domain, relabel(t->codomain, label));
    return mkBase(t->binder, t->base, t->refinement, label);
  }

  // Checks a definition body against its (possibly strengthened) type.
  // Returns true when every obligation generated for it was valid.
  bool checkDefinition(const Name& name, const RefType& type, const Expr& body,
                       const std::optional<TermMetric>& metric, Span span,
                       bool isReflect) {
    size_t firstObligation = result_.obligations.size();
    size_t firstDiag = result_.diagnostics.size();
    rigid_ = freeTyVars(type);

    // Parameter spine for termination metrics.
    std::vector<Name> params;
    std::vector<RefType> paramTypes;
    RefType walk = type;
    Expr cur = body;
    while (cur->kind == ExprNode::Kind::Lam && walk->isFun) {
      params.push_back(cur->name);
      paramTypes.push_back(walk->domain);
      walk = walk->codomain;
      cur = cur->a;
    }

    hooks_ = {};
    bool recursive = mentions(body, name);
    if (recursive) {
      hooks_.fun = name;
      hooks_.params = params;
      if (metric) {
        hooks_.metric.clear();
        for (const auto& m : *metric) hooks_.metric.push_back(m);
        size_t maxIdx = 0;
        for (const auto& m : hooks_.metric) {
          auto fv = freeVars(m);
          for (size_t i = 0; i < params.size(); ++i)
            if (fv.count(params[i])) maxIdx = std::max(maxIdx, i + 1);
        }
        hooks_.callArity = std::max<size_t>(maxIdx, 1);
        hooks_.active = true;
      } else {
        if (!defaultMetric(params, paramTypes, span)) {
          error("NoUsableMetric", span,
                "'" + name.str() +
                    "' is recursive but no termination metric applies "
                    "(no integer or measured data parameter)");
          return false;
        }
        hooks_.active = true;
      }
    }

    Scope sc(this);
    push(sc, name, type);  // recursion sees the strengthened type
    // Bind parameters so metric expressions and the entry obligation are
    // stated in their scope; the body re-binds them through check().
    {
      // Entry obligation for explicit metrics: components are nonnegative.
      if (recursive && metric) {
        Scope psc(this);
        for (size_t i = 0; i < params.size(); ++i) {
          RefType d = paramTypes[i];
          if (!d->isFun) d = renameBinder(d, params[i]);
          push(psc, params[i], d);
        }
        Expr goal = mkTrue();
        for (const auto& m : hooks_.metric)
          goal = mkAnd(goal, mkBin(Builtin::Le, mkIntLit(0), m));
        Name v = supply_.fresh("$vc");
        TransEnv env = transEnv();
        VC vc = makeVC(env, gamma_, v, BaseType::mkUnit(), mkTrue(), goal, span,
                       file_ + " " + curDecl_ + " [MetricNonNegative]");
        Verdict verdict = discharge(vc);
        ++vcCounter_;
        recordObligation("MetricNonNegative", span, std::move(vc), verdict,
                         renderMetric());
      }
    }

    Expr anfBody = anfNormalize(body, supply_);
    (void)isReflect;
    try {
      check(anfBody, type);
    } catch (const CheckError& e) {
      error(e.kind, e.span.valid() ? e.span : span, e.msg);
      return false;
    } catch (const TranslateError& e) {
      error(e.kind, e.span.valid() ? e.span : span, e.msg);
      return false;
    }

    for (size_t i = firstObligation; i < result_.obligations.size(); ++i)
      if (result_.obligations[i].verdict.kind != Verdict::Kind::Valid) return false;
    for (size_t i = firstDiag; i < result_.diagnostics.size(); ++i)
      if (result_.diagnostics[i].level == Diagnostic::Level::Error ||
          result_.diagnostics[i].level == Diagnostic::Level::Fail ||
          result_.diagnostics[i].level == Diagnostic::Level::Unknown)
        return false;
    return true;
  }

  // Well-formedness: every refinement must be boolean under its prefix.
  void wellFormed(const RefType& t, Span span) {
    Scope sc(this);
    wellFormedGo(t, span, sc);
  }

  void wellFormedGo(const RefType& t, Span span, Scope& sc) {
    if (t->isFun) {
      wellFormedGo(t->domain, span, sc);
      push(sc, t->param, t->domain);
      wellFormedGo(t->codomain, span, sc);
      return;
    }
    TransEnv env = transEnv();
    env.vars[t->binder] = trivialBase(t->base);
    try {
      TransResult r = translateExpr(env, t->refinement);
      if (!(r.sort == Sort::mkBool()))
        error("NonBoolRefinement", span,
              "refinement is " + r.sort.str() + ", expected Bool");
    } catch (const TranslateError& e) {
      error(e.kind, e.span.valid() ? e.span : span, e.msg);
    }
  }

  const Program& prog_;
  CheckOptions opts_;
  std::string file_;
  DataWorld world_;
  std::shared_ptr<LogicEnv> logic_;
  NameSupply supply_;
  SlotState slots_;

  std::vector<std::pair<Name, RefType>> gamma_;
  std::map<Name, RefType> varTypes_;
  std::set<Name> rigid_;
  std::set<Name> nonTerminating_;

  CheckResult result_;
  std::string curDecl_;
  Span curSpan_;
  int obligationIdx_ = 0;
  long long vcCounter_ = 0;
  bool internal_ = false;
  TermHooks hooks_;
};

}  // namespace

CheckResult checkProgram(const Program& prog, const CheckOptions& opts,
                         const std::string& file) {
  Checker c(prog, opts, file);
  return c.run();
}

}  // namespace rfl
