#include "rfl/smt.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "smt_internal.hpp"

namespace rfl {

namespace {

using detail::EGraph;
using detail::Simplex;

// ---------------------------------------------------------------------------
// Atoms and formula encoding

struct Atom {
  enum class Kind { Eq, Le, Lt, BoolTerm };
  Kind kind;
  int l = -1, r = -1;  // term node ids
  int t = -1;          // BoolTerm node
  bool intSides = false;
};

struct Form {
  enum class Kind { True, False, Lit, And, Or, Not, Iff };
  Kind kind;
  int atom = -1;
  std::vector<Form> kids;
};

struct BudgetExceeded {};

class Encoder {
 public:
  explicit Encoder(const VC& vc) : vc_(vc) {}

  void run() {
    std::vector<Form> parts;
    for (const auto& inst : vc_.instances) parts.push_back(buildForm(inst));
    parts.push_back(buildForm(vc_.hypothesis));
    Form ng{Form::Kind::Not, -1, {buildForm(vc_.goal)}};
    parts.push_back(std::move(ng));
    Form root{Form::Kind::And, -1, std::move(parts)};

    // Integer disequality splitting: eq \/ l<r \/ r<l. The split atoms must
    // exist before the variable space is frozen (proxies share the space).
    std::vector<std::vector<int>> splitClauses;
    size_t atomCount = atoms_.size();
    for (size_t i = 0; i < atomCount; ++i) {
      if (atoms_[i].kind != Atom::Kind::Eq || !atoms_[i].intSides) continue;
      int lt1 = atomVar(mkAtomLt(atoms_[i].l, atoms_[i].r));
      int lt2 = atomVar(mkAtomLt(atoms_[i].r, atoms_[i].l));
      splitClauses.push_back({(int)i + 1, lt1 + 1, lt2 + 1});
    }

    numVars_ = (int)atoms_.size();
    frozen_ = true;
    int lit = tseitin(root);
    clauses_.push_back({lit});
    for (auto& c : splitClauses) clauses_.push_back(std::move(c));
  }

  EGraph graph;  // all terms pre-interned
  std::vector<Atom> atoms_;
  std::vector<std::vector<int>> clauses_;  // literals: +(var+1) / -(var+1)
  int numVars_ = 0;

 private:
  const VC& vc_;
  std::map<std::string, int> atomIds_;
  std::map<const PredNode*, int> termMemo_;
  int iteCounter_ = 0;
  int boolTermCounter_ = 0;
  bool frozen_ = false;

  static int sortTag(const Sort& s) {
    switch (s.kind) {
      case Sort::Kind::Int: return 0;
      case Sort::Kind::Bool: return 1;
      default: return 2;
    }
  }

  Atom mkAtomEq(int l, int r, bool intSides) {
    Atom a;
    a.kind = Atom::Kind::Eq;
    a.l = std::min(l, r);
    a.r = std::max(l, r);
    a.intSides = intSides;
    return a;
  }
  Atom mkAtomLe(int l, int r) {
    Atom a;
    a.kind = Atom::Kind::Le;
    a.l = l;
    a.r = r;
    a.intSides = true;
    return a;
  }
  Atom mkAtomLt(int l, int r) {
    Atom a;
    a.kind = Atom::Kind::Lt;
    a.l = l;
    a.r = r;
    a.intSides = true;
    return a;
  }
  Atom mkAtomBool(int t) {
    Atom a;
    a.kind = Atom::Kind::BoolTerm;
    a.t = t;
    return a;
  }

  int atomVar(const Atom& a) {
    std::ostringstream os;
    switch (a.kind) {
      case Atom::Kind::Eq: os << "e:" << a.l << "," << a.r; break;
      case Atom::Kind::Le: os << "le:" << a.l << "," << a.r; break;
      case Atom::Kind::Lt: os << "lt:" << a.l << "," << a.r; break;
      case Atom::Kind::BoolTerm: os << "b:" << a.t; break;
    }
    auto it = atomIds_.find(os.str());
    if (it != atomIds_.end()) return it->second;
    if (frozen_) throw BudgetExceeded{};  // must not happen: atoms precede proxies
    int id = (int)atoms_.size();
    atoms_.push_back(a);
    atomIds_[os.str()] = id;
    return id;
  }

  bool isBoolSorted(const Pred& p) { return sortOf(p) == Sort::mkBool(); }

  // Terms (non-boolean sorts, or atomic boolean occurrences inside terms).
  int buildTerm(const Pred& p) {
    auto it = termMemo_.find(p.get());
    if (it != termMemo_.end()) return it->second;
    int id = buildTermUncached(p);
    termMemo_[p.get()] = id;
    return id;
  }

  int buildTermUncached(const Pred& p) {
    switch (p->kind) {
      case PredNode::Kind::Int: return graph.addNum(p->intVal);
      case PredNode::Kind::Bool: return p->boolVal ? graph.trueNode : graph.falseNode;
      case PredNode::Kind::Var: return graph.addApp(p->var, {}, sortTag(p->sort));
      case PredNode::Kind::App: {
        std::vector<int> kids;
        kids.reserve(p->args.size());
        for (const auto& a : p->args) kids.push_back(buildTerm(a));
        return graph.addApp(p->sym, kids, sortTag(p->sort));
      }
      case PredNode::Kind::Bin: {
        if (p->op == PredOp::Add || p->op == PredOp::Sub) {
          int l = buildTerm(p->a);
          int r = buildTerm(p->b);
          return graph.addApp(p->op == PredOp::Add ? "+" : "-", {l, r}, 0);
        }
        // A boolean formula used as a term: name it and define by iff.
        int v = graph.addApp("$bterm" + std::to_string(++boolTermCounter_), {}, 1);
        Form def{Form::Kind::Iff, -1, {}};
        def.kids.push_back(Form{Form::Kind::Lit, atomVar(mkAtomBool(v)), {}});
        def.kids.push_back(buildForm(p));
        sideDefs_.push_back(std::move(def));
        return v;
      }
      case PredNode::Kind::Not: {
        int v = graph.addApp("$bterm" + std::to_string(++boolTermCounter_), {}, 1);
        Form def{Form::Kind::Iff, -1, {}};
        def.kids.push_back(Form{Form::Kind::Lit, atomVar(mkAtomBool(v)), {}});
        def.kids.push_back(buildForm(p));
        sideDefs_.push_back(std::move(def));
        return v;
      }
      case PredNode::Kind::Ite: {
        Sort s = sortOf(p->b);
        if (s == Sort::mkBool()) {
          int v = graph.addApp("$bterm" + std::to_string(++boolTermCounter_), {}, 1);
          Form def{Form::Kind::Iff, -1, {}};
          def.kids.push_back(Form{Form::Kind::Lit, atomVar(mkAtomBool(v)), {}});
          def.kids.push_back(buildForm(p));
          sideDefs_.push_back(std::move(def));
          return v;
        }
        int v = graph.addApp("$ite" + std::to_string(++iteCounter_), {}, sortTag(s));
        int thenT = buildTerm(p->b);
        int elseT = buildTerm(p->c);
        Form c = buildForm(p->a);
        bool ints = s == Sort::mkInt();
        // (c -> v = then) /\ (~c -> v = else)
        {
          Form imp{Form::Kind::Or, -1, {}};
          imp.kids.push_back(Form{Form::Kind::Not, -1, {c}});
          imp.kids.push_back(Form{Form::Kind::Lit, atomVar(mkAtomEq(v, thenT, ints)), {}});
          sideDefs_.push_back(std::move(imp));
        }
        {
          Form imp{Form::Kind::Or, -1, {}};
          imp.kids.push_back(c);
          imp.kids.push_back(Form{Form::Kind::Lit, atomVar(mkAtomEq(v, elseT, ints)), {}});
          sideDefs_.push_back(std::move(imp));
        }
        return v;
      }
    }
    return graph.trueNode;
  }

  Form buildForm(const Pred& p) {
    switch (p->kind) {
      case PredNode::Kind::Bool:
        return Form{p->boolVal ? Form::Kind::True : Form::Kind::False, -1, {}};
      case PredNode::Kind::Var:
      case PredNode::Kind::App:
        return Form{Form::Kind::Lit, atomVar(mkAtomBool(buildTerm(p))), {}};
      case PredNode::Kind::Not: return Form{Form::Kind::Not, -1, {buildForm(p->a)}};
      case PredNode::Kind::Ite: {
        Form c = buildForm(p->a);
        Form t = buildForm(p->b);
        Form e = buildForm(p->c);
        Form l{Form::Kind::And, -1, {c, t}};
        Form notc{Form::Kind::Not, -1, {c}};
        Form r{Form::Kind::And, -1, {notc, e}};
        return Form{Form::Kind::Or, -1, {l, r}};
      }
      case PredNode::Kind::Bin: {
        switch (p->op) {
          case PredOp::And:
            return Form{Form::Kind::And, -1, {buildForm(p->a), buildForm(p->b)}};
          case PredOp::Or:
            return Form{Form::Kind::Or, -1, {buildForm(p->a), buildForm(p->b)}};
          case PredOp::Eq:
          case PredOp::Ne: {
            Form eq;
            if (isBoolSorted(p->a) && isBoolSorted(p->b)) {
              eq = Form{Form::Kind::Iff, -1, {buildForm(p->a), buildForm(p->b)}};
            } else {
              int l = buildTerm(p->a);
              int r = buildTerm(p->b);
              bool ints = sortOf(p->a) == Sort::mkInt() && sortOf(p->b) == Sort::mkInt();
              eq = Form{Form::Kind::Lit, atomVar(mkAtomEq(l, r, ints)), {}};
            }
            if (p->op == PredOp::Eq) return eq;
            return Form{Form::Kind::Not, -1, {std::move(eq)}};
          }
          case PredOp::Lt:
            return Form{Form::Kind::Lit,
                        atomVar(mkAtomLt(buildTerm(p->a), buildTerm(p->b))), {}};
          case PredOp::Le:
            return Form{Form::Kind::Lit,
                        atomVar(mkAtomLe(buildTerm(p->a), buildTerm(p->b))), {}};
          case PredOp::Gt:
            return Form{Form::Kind::Lit,
                        atomVar(mkAtomLt(buildTerm(p->b), buildTerm(p->a))), {}};
          case PredOp::Ge:
            return Form{Form::Kind::Lit,
                        atomVar(mkAtomLe(buildTerm(p->b), buildTerm(p->a))), {}};
          case PredOp::Add:
          case PredOp::Sub: break;
        }
        return Form{Form::Kind::True, -1, {}};
      }
      default: return Form{Form::Kind::True, -1, {}};
    }
  }

  // Tseitin encoding; returns a literal equisatisfiable with f.
  int tseitin(const Form& f) {
    switch (f.kind) {
      case Form::Kind::True: return trueLit();
      case Form::Kind::False: return -trueLit();
      case Form::Kind::Lit: return f.atom + 1;
      case Form::Kind::Not: return -tseitin(f.kids[0]);
      case Form::Kind::And: {
        int p = freshVar();
        std::vector<int> big{p + 1};
        for (const auto& k : f.kids) {
          int l = tseitin(k);
          clauses_.push_back({-(p + 1), l});
          big.push_back(-l);
        }
        clauses_.push_back(std::move(big));
        return p + 1;
      }
      case Form::Kind::Or: {
        int p = freshVar();
        std::vector<int> big{-(p + 1)};
        for (const auto& k : f.kids) {
          int l = tseitin(k);
          clauses_.push_back({p + 1, -l});
          big.push_back(l);
        }
        clauses_.push_back(std::move(big));
        return p + 1;
      }
      case Form::Kind::Iff: {
        int a = tseitin(f.kids[0]);
        int b = tseitin(f.kids[1]);
        int p = freshVar();
        clauses_.push_back({-(p + 1), -a, b});
        clauses_.push_back({-(p + 1), a, -b});
        clauses_.push_back({p + 1, a, b});
        clauses_.push_back({p + 1, -a, -b});
        return p + 1;
      }
    }
    return trueLit();
  }

  int trueLit() {
    if (trueVar_ < 0) {
      trueVar_ = freshVar();
      clauses_.push_back({trueVar_ + 1});
    }
    return trueVar_ + 1;
  }

  int freshVar() { return numVars_++; }

 public:
  // Definitional formulas created during term building; conjoined by finish().
  std::vector<Form> sideDefs_;
  int trueVar_ = -1;

  void finish() {
    for (const auto& d : sideDefs_) clauses_.push_back({tseitin(d)});
    sideDefs_.clear();
  }
};

// ---------------------------------------------------------------------------
// Theory solver: EUF + LIA over a set of asserted atoms.

struct TheoryModel {
  EGraph graph;
  std::map<int, long long> intValueOfClass;
};

class TheorySolver {
 public:
  TheorySolver(const EGraph& base, const std::vector<Atom>& atoms, int bbDepth)
      : base_(base), atoms_(atoms), bbDepth_(bbDepth) {}

  // val: -1 unassigned / 0 false / 1 true per atom index.
  std::optional<TheoryModel> check(const std::vector<int>& val) {
    EGraph g = base_;
    std::vector<std::pair<int, bool>> ineqs;  // (atom, positive)
    for (size_t i = 0; i < atoms_.size(); ++i) {
      if (i >= val.size() || val[i] < 0) continue;
      const Atom& a = atoms_[i];
      bool pos = val[i] == 1;
      switch (a.kind) {
        case Atom::Kind::Eq:
          if (pos) {
            if (!g.merge(a.l, a.r, "assert")) return std::nullopt;
          } else {
            g.addDiseq(a.l, a.r, (int)i);
          }
          break;
        case Atom::Kind::BoolTerm:
          if (!g.merge(a.t, pos ? g.trueNode : g.falseNode, "assert"))
            return std::nullopt;
          break;
        case Atom::Kind::Le:
        case Atom::Kind::Lt: ineqs.emplace_back((int)i, pos); break;
      }
    }
    if (!g.rebuild()) return std::nullopt;
    if (g.violatedDiseq() >= 0) return std::nullopt;

    // EUF <-> LIA loop.
    std::map<int, long long> intModel;
    for (int round = 0; round < 8; ++round) {
      auto lia = buildLia(g, ineqs);
      auto r = runLia(lia);
      if (r.kind == Simplex::Result::Kind::Infeasible) return std::nullopt;
      if (r.kind == Simplex::Result::Kind::Unknown) throw BudgetExceeded{};
      intModel.clear();
      for (const auto& [cls, var] : lia.varOfClass) {
        Rat v = r.model.count(var) ? r.model[var] : Rat(0);
        intModel[cls] = v.num / v.den;
      }
      if (!propagateEqualities(g, ineqs, lia, intModel)) return std::nullopt;
      if (!progress_) break;
    }

    TheoryModel m{g, intModel};
    return m;
  }

 private:
  struct LiaProblem {
    std::vector<LinAtom> cons;                 // over class-variable names
    std::map<int, std::string> nameOfClass;   // class -> var name
    std::map<int, int> varOfClass;            // class -> dense id (filled later)
  };

  LiaProblem buildLia(EGraph& g, const std::vector<std::pair<int, bool>>& ineqs) {
    LiaProblem p;
    auto cvar = [&](int node) {
      int cls = g.find(node);
      auto it = p.nameOfClass.find(cls);
      if (it == p.nameOfClass.end()) p.nameOfClass[cls] = "c" + std::to_string(cls);
      return p.nameOfClass[cls];
    };
    // Definitional constraints for numerals and arithmetic nodes.
    for (int i = 0; i < (int)g.nodes.size(); ++i) {
      const auto& n = g.nodes[i];
      if (n.sortTag != 0) continue;
      if (n.isNum) {
        LinAtom a;
        a.rel = LinAtom::Rel::Eq;
        a.coeffs[cvar(i)] += 1;
        a.k = n.intVal;
        p.cons.push_back(std::move(a));
      } else if ((n.sym == "+" || n.sym == "-") && n.kids.size() == 2) {
        LinAtom a;
        a.rel = LinAtom::Rel::Eq;
        a.coeffs[cvar(i)] += 1;
        a.coeffs[cvar(n.kids[0])] -= 1;
        if (n.sym == "+") a.coeffs[cvar(n.kids[1])] -= 1;
        else a.coeffs[cvar(n.kids[1])] += 1;
        a.k = 0;
        // Drop self-cancelling forms (e.g. class(x+y) == class(x)).
        for (auto it = a.coeffs.begin(); it != a.coeffs.end();)
          it = it->second == 0 ? a.coeffs.erase(it) : std::next(it);
        p.cons.push_back(std::move(a));
      }
    }
    for (const auto& [idx, pos] : ineqs) {
      const Atom& a = atoms_[idx];
      LinAtom c;
      // l <= r  <=>  l - r <= 0 ; negations flip sides strictly.
      int l = a.l, r = a.r;
      bool strict = a.kind == Atom::Kind::Lt;
      if (!pos) {
        std::swap(l, r);
        strict = !strict;
      }
      c.rel = strict ? LinAtom::Rel::Lt : LinAtom::Rel::Le;
      c.coeffs[cvar(l)] += 1;
      c.coeffs[cvar(r)] -= 1;
      for (auto it = c.coeffs.begin(); it != c.coeffs.end();)
        it = it->second == 0 ? c.coeffs.erase(it) : std::next(it);
      c.k = 0;
      if (c.coeffs.empty()) {
        // Ground after merging: 0 rel 0.
        bool ok = strict ? false : true;
        if (!ok) {
          c.rel = LinAtom::Rel::Lt;  // keep an infeasible marker
          c.k = -1;
          c.coeffs["c!zero"] = 0;
          p.cons.push_back(std::move(c));
        }
        continue;
      }
      p.cons.push_back(std::move(c));
    }
    return p;
  }

  Simplex::Result runLia(LiaProblem& p) {
    std::map<std::string, int> ids;
    for (const auto& a : p.cons)
      for (const auto& [v, c] : a.coeffs) {
        (void)c;
        if (!ids.count(v)) {
          int id = (int)ids.size();
          ids[v] = id;
        }
      }
    for (const auto& [cls, name] : p.nameOfClass) {
      if (!ids.count(name)) {
        int id = (int)ids.size();
        ids[name] = id;
      }
      p.varOfClass[cls] = ids[name];
    }
    Simplex s((int)ids.size());
    for (size_t i = 0; i < p.cons.size(); ++i) {
      std::map<int, Rat> coeffs;
      for (const auto& [v, c] : p.cons[i].coeffs)
        if (c != 0) coeffs[ids[v]] = Rat(c);
      if (coeffs.empty()) {
        if (p.cons[i].rel == LinAtom::Rel::Lt && p.cons[i].k <= 0 && false) {
        }
        // ground infeasible marker
        Simplex::Result res;
        res.kind = Simplex::Result::Kind::Infeasible;
        return res;
      }
      s.addConstraint(coeffs, p.cons[i].rel, Rat(p.cons[i].k), (int)i);
    }
    return s.checkInteger(bbDepth_);
  }

  // Model-guided equality propagation from LIA into EUF, verified by
  // entailment before merging.
  bool propagateEqualities(EGraph& g, const std::vector<std::pair<int, bool>>& ineqs,
                           LiaProblem& lia, std::map<int, long long>& intModel) {
    progress_ = false;
    // Candidates: same-symbol applications differing in int argument classes.
    std::map<std::string, std::vector<int>> bySym;
    for (int i = 0; i < (int)g.nodes.size(); ++i) {
      const auto& n = g.nodes[i];
      if (n.kids.empty() || n.isNum || n.isBoolConst) continue;
      if (n.sym == "+" || n.sym == "-") continue;
      bySym[n.sym].push_back(i);
    }
    std::vector<std::pair<int, int>> candidates;
    for (const auto& [sym, nodes] : bySym) {
      (void)sym;
      for (size_t i = 0; i < nodes.size(); ++i)
        for (size_t j = i + 1; j < nodes.size(); ++j) {
          const auto& a = g.nodes[nodes[i]];
          const auto& b = g.nodes[nodes[j]];
          if (a.kids.size() != b.kids.size()) continue;
          if (g.sameClass(nodes[i], nodes[j])) continue;
          for (size_t k = 0; k < a.kids.size(); ++k) {
            int u = g.find(a.kids[k]);
            int v = g.find(b.kids[k]);
            if (u == v) continue;
            if (g.nodes[u].sortTag != 0 && g.nodes[a.kids[k]].sortTag != 0) continue;
            if (intModel.count(u) && intModel.count(v) && intModel[u] != intModel[v])
              continue;  // model already separates them
            candidates.emplace_back(std::min(u, v), std::max(u, v));
          }
        }
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()),
                     candidates.end());
    if (candidates.size() > 64) candidates.resize(64);

    for (const auto& [u, v] : candidates) {
      if (g.sameClass(u, v)) continue;
      if (!lia.nameOfClass.count(u) || !lia.nameOfClass.count(v)) continue;
      if (!entailedEqual(lia, u, v)) continue;
      if (!g.merge(u, v, "arith")) return false;
      if (!g.rebuild()) return false;
      if (g.violatedDiseq() >= 0) return false;
      progress_ = true;
    }
    // Re-run LIA when classes merged (callers loop while progress_).
    (void)ineqs;
    return true;
  }

  bool entailedEqual(LiaProblem lia, int u, int v) {
    // u = v entailed iff both strict separations are infeasible.
    for (int dir = 0; dir < 2; ++dir) {
      LiaProblem p = lia;
      LinAtom c;
      c.rel = LinAtom::Rel::Lt;
      c.coeffs[p.nameOfClass[dir == 0 ? u : v]] += 1;
      c.coeffs[p.nameOfClass[dir == 0 ? v : u]] -= 1;
      c.k = 0;
      p.cons.push_back(std::move(c));
      auto r = runLia(p);
      if (r.kind != Simplex::Result::Kind::Infeasible) return false;
    }
    return true;
  }

  const EGraph& base_;
  const std::vector<Atom>& atoms_;
  int bbDepth_;
  bool progress_ = false;
};

// ---------------------------------------------------------------------------
// DPLL

class Dpll {
 public:
  Dpll(Encoder& enc, const SolveOptions& opts)
      : enc_(enc), opts_(opts), theory_(enc.graph, enc.atoms_, opts.bbDepth) {}

  // true = satisfiable (VC invalid), false = unsat (VC valid).
  bool search(std::optional<TheoryModel>& modelOut) {
    val_.assign(enc_.numVars_, -1);
    return go(modelOut, true);
  }

 private:
  bool go(std::optional<TheoryModel>& modelOut, bool atomsDirty) {
    if (++nodes_ > opts_.branchBudget) throw BudgetExceeded{};
    std::vector<int> trail;
    if (!propagate(trail)) {
      undo(trail);
      return false;
    }
    size_t atomCount = enc_.atoms_.size();
    for (int v : trail)
      if ((size_t)v < atomCount) atomsDirty = true;

    // Theory pruning whenever new theory atoms were assigned.
    std::optional<TheoryModel> partial;
    if (atomsDirty) {
      partial = theory_.check(val_);
      if (!partial) {
        undo(trail);
        return false;
      }
    }
    // Branch on theory atoms first; proxies mostly follow by propagation.
    int var = -1;
    for (int v = 0; v < (int)atomCount; ++v)
      if (val_[v] < 0) {
        var = v;
        break;
      }
    if (var < 0) {
      for (int v = (int)atomCount; v < enc_.numVars_; ++v)
        if (val_[v] < 0) {
          var = v;
          break;
        }
    }
    if (var < 0) {
      if (!partial) partial = theory_.check(val_);
      if (!partial) {
        undo(trail);
        return false;
      }
      modelOut = std::move(partial);
      undo(trail);
      return true;
    }
    bool branchIsAtom = (size_t)var < atomCount;
    for (int bit = 1; bit >= 0; --bit) {
      val_[var] = bit;
      if (go(modelOut, branchIsAtom)) {
        undo(trail);
        return true;
      }
    }
    val_[var] = -1;
    undo(trail);
    return false;
  }

  void undo(const std::vector<int>& trail) {
    for (int v : trail) val_[v] = -1;
  }

  bool propagate(std::vector<int>& trail) {
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& clause : enc_.clauses_) {
        int unassigned = -1;
        bool satisfied = false;
        int freeCount = 0;
        for (int lit : clause) {
          int v = std::abs(lit) - 1;
          bool want = lit > 0;
          if (val_[v] < 0) {
            ++freeCount;
            unassigned = lit;
          } else if ((val_[v] == 1) == want) {
            satisfied = true;
            break;
          }
        }
        if (satisfied) continue;
        if (freeCount == 0) return false;  // conflict
        if (freeCount == 1) {
          int v = std::abs(unassigned) - 1;
          val_[v] = unassigned > 0 ? 1 : 0;
          trail.push_back(v);
          changed = true;
        }
      }
    }
    return true;
  }

  Encoder& enc_;
  const SolveOptions& opts_;
  TheorySolver theory_;
  std::vector<int> val_;
  long long nodes_ = 0;
};

// ---------------------------------------------------------------------------
// Model extraction

ModelValue evalNode(const EGraph& gIn, const std::map<int, long long>& intVals,
                    int id) {
  EGraph& g = const_cast<EGraph&>(gIn);
  const auto& n = g.nodes[id];
  if (n.isNum) return ModelValue::ofInt(n.intVal);
  if (n.isBoolConst) return ModelValue::ofBool(n.boolVal);
  int cls = g.find(id);
  if (g.find(g.trueNode) == cls) return ModelValue::ofBool(true);
  if (g.find(g.falseNode) == cls) return ModelValue::ofBool(false);
  // Numeral in the class?
  if (n.sortTag == 0) {
    if (auto it = intVals.find(cls); it != intVals.end())
      return ModelValue::ofInt(it->second);
    return ModelValue::ofInt(1000000 + cls);
  }
  if (n.sortTag == 1) return ModelValue::ofBool(false);
  return ModelValue::ofAbs(cls);
}

std::string appKey(const std::string& sym, const std::vector<ModelValue>& args) {
  std::string key = sym + "(";
  for (size_t i = 0; i < args.size(); ++i) {
    if (i) key += ",";
    key += args[i].str();
  }
  key += ")";
  return key;
}

Model extractModel(const VC& vc, const TheoryModel& tm) {
  Model m;
  EGraph& g = const_cast<EGraph&>(tm.graph);
  std::map<std::string, Sort> vars;
  collectVars(vc.hypothesis, vars);
  collectVars(vc.goal, vars);
  for (const auto& inst : vc.instances) collectVars(inst, vars);

  std::vector<ModelValue> nodeVal(g.nodes.size());
  for (int i = 0; i < (int)g.nodes.size(); ++i)
    nodeVal[i] = evalNode(g, tm.intValueOfClass, i);

  for (int i = 0; i < (int)g.nodes.size(); ++i) {
    const auto& n = g.nodes[i];
    if (n.isNum || n.isBoolConst) continue;
    if (n.kids.empty()) {
      if (vars.count(n.sym)) m.vars[n.sym] = nodeVal[i];
      continue;
    }
    if (n.sym == "+" || n.sym == "-") continue;
    std::vector<ModelValue> args;
    args.reserve(n.kids.size());
    for (int k : n.kids) args.push_back(nodeVal[k]);
    m.apps[appKey(n.sym, args)] = nodeVal[i];
  }
  return m;
}

}  // namespace

// ---------------------------------------------------------------------------

bool ModelValue::operator==(const ModelValue& o) const {
  if (kind != o.kind) return false;
  switch (kind) {
    case Kind::Int: return i == o.i;
    case Kind::Bool: return b == o.b;
    case Kind::Abs: return abs == o.abs;
  }
  return false;
}

std::string ModelValue::str() const {
  switch (kind) {
    case Kind::Int: return std::to_string(i);
    case Kind::Bool: return b ? "true" : "false";
    case Kind::Abs: return "@" + std::to_string(abs);
  }
  return "?";
}

std::string Model::render() const {
  std::ostringstream os;
  for (const auto& [k, v] : vars) os << "  " << k << " = " << v.str() << "\n";
  for (const auto& [k, v] : apps) os << "  " << k << " = " << v.str() << "\n";
  return os.str();
}

Verdict solve(const VC& vc, const SolveOptions& opts) {
  Verdict out;
  try {
    Encoder enc(vc);
    enc.run();
    enc.finish();
    Dpll dpll(enc, opts);
    std::optional<TheoryModel> model;
    bool sat = dpll.search(model);
    if (!sat) {
      out.kind = Verdict::Kind::Valid;
      return out;
    }
    out.kind = Verdict::Kind::Invalid;
    if (model) out.model = extractModel(vc, *model);
    return out;
  } catch (const BudgetExceeded&) {
    out.kind = Verdict::Kind::Unknown;
    out.reason = "BranchBudget";
    return out;
  }
}

// ---------------------------------------------------------------------------
// Replay

namespace {

uint64_t fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

struct Replayer {
  const Model& m;

  ModelValue defaultFor(const std::string& key, const Sort& s) {
    uint64_t h = fnv1a(key);
    switch (s.kind) {
      case Sort::Kind::Int: return ModelValue::ofInt((long long)(h % 1000));
      case Sort::Kind::Bool: return ModelValue::ofBool(h & 1);
      default: return ModelValue::ofAbs((int)(h % 100000));
    }
  }

  ModelValue value(const Pred& p) {
    switch (p->kind) {
      case PredNode::Kind::Int: return ModelValue::ofInt(p->intVal);
      case PredNode::Kind::Bool: return ModelValue::ofBool(p->boolVal);
      case PredNode::Kind::Var: {
        auto it = m.vars.find(p->var);
        if (it != m.vars.end()) return it->second;
        return defaultFor("v:" + p->var, p->sort);
      }
      case PredNode::Kind::App: {
        std::vector<ModelValue> args;
        args.reserve(p->args.size());
        for (const auto& a : p->args) args.push_back(value(a));
        std::string key = appKey(p->sym, args);
        auto it = m.apps.find(key);
        if (it != m.apps.end()) return it->second;
        return defaultFor("a:" + key, p->sort);
      }
      case PredNode::Kind::Bin: {
        if (p->op == PredOp::Add || p->op == PredOp::Sub) {
          ModelValue l = value(p->a), r = value(p->b);
          return ModelValue::ofInt(p->op == PredOp::Add ? l.i + r.i : l.i - r.i);
        }
        return ModelValue::ofBool(truth(p));
      }
      case PredNode::Kind::Not: return ModelValue::ofBool(truth(p));
      case PredNode::Kind::Ite: return truth(p->a) ? value(p->b) : value(p->c);
    }
    return ModelValue::ofBool(false);
  }

  bool truth(const Pred& p) {
    switch (p->kind) {
      case PredNode::Kind::Bool: return p->boolVal;
      case PredNode::Kind::Var:
      case PredNode::Kind::App: {
        ModelValue v = value(p);
        return v.kind == ModelValue::Kind::Bool ? v.b : false;
      }
      case PredNode::Kind::Not: return !truth(p->a);
      case PredNode::Kind::Ite: return truth(p->a) ? truth(p->b) : truth(p->c);
      case PredNode::Kind::Bin: {
        switch (p->op) {
          case PredOp::And: return truth(p->a) && truth(p->b);
          case PredOp::Or: return truth(p->a) || truth(p->b);
          case PredOp::Eq: {
            if (sortOf(p->a) == Sort::mkBool()) return truth(p->a) == truth(p->b);
            return value(p->a) == value(p->b);
          }
          case PredOp::Ne: {
            if (sortOf(p->a) == Sort::mkBool()) return truth(p->a) != truth(p->b);
            return !(value(p->a) == value(p->b));
          }
          case PredOp::Lt: return value(p->a).i < value(p->b).i;
          case PredOp::Le: return value(p->a).i <= value(p->b).i;
          case PredOp::Gt: return value(p->a).i > value(p->b).i;
          case PredOp::Ge: return value(p->a).i >= value(p->b).i;
          default: return false;
        }
      }
      default: return false;
    }
  }
};

}  // namespace

bool replayVC(const VC& vc, const Model& m) {
  Replayer r{m};
  bool hyp = r.truth(vc.hypothesis);
  for (const auto& inst : vc.instances) hyp = hyp && r.truth(inst);
  if (!hyp) return true;  // implication vacuously true
  return r.truth(vc.goal);
}

// ---------------------------------------------------------------------------
// SMT-LIB2 emission

namespace {

std::string smtSortName(const Sort& s) {
  switch (s.kind) {
    case Sort::Kind::Int: return "Int";
    case Sort::Kind::Bool: return "Bool";
    case Sort::Kind::Univ: return "Univ";
    case Sort::Kind::Fun: return "|" + s.str() + "|";
  }
  return "Univ";
}

std::string smtSymName(const std::string& sym) {
  bool plain = !sym.empty();
  for (char c : sym)
    if (!(isalnum((unsigned char)c) || c == '_' || c == '$' || c == '.' || c == '#'))
      plain = false;
  if (!sym.empty() && sym[0] == '#') plain = false;
  return plain ? sym : "|" + sym + "|";
}

void collectFunSorts(const Sort& s, std::set<std::string>& out) {
  if (s.kind == Sort::Kind::Fun) {
    out.insert(s.str());
    collectFunSorts(*s.arg, out);
    collectFunSorts(*s.res, out);
  }
}

void emitPred(std::ostringstream& os, const Pred& p) {
  switch (p->kind) {
    case PredNode::Kind::Int:
      if (p->intVal < 0) {
        os << "(- " << -p->intVal << ")";
      } else {
        os << p->intVal;
      }
      return;
    case PredNode::Kind::Bool: os << (p->boolVal ? "true" : "false"); return;
    case PredNode::Kind::Var: os << smtSymName(p->var); return;
    case PredNode::Kind::App: {
      if (p->args.empty()) {
        os << smtSymName(p->sym);
        return;
      }
      os << "(" << smtSymName(p->sym);
      for (const auto& a : p->args) {
        os << " ";
        emitPred(os, a);
      }
      os << ")";
      return;
    }
    case PredNode::Kind::Bin: {
      const char* op = nullptr;
      switch (p->op) {
        case PredOp::Eq: op = "="; break;
        case PredOp::Ne: op = "distinct"; break;
        case PredOp::Lt: op = "<"; break;
        case PredOp::Le: op = "<="; break;
        case PredOp::Gt: op = ">"; break;
        case PredOp::Ge: op = ">="; break;
        case PredOp::And: op = "and"; break;
        case PredOp::Or: op = "or"; break;
        case PredOp::Add: op = "+"; break;
        case PredOp::Sub: op = "-"; break;
      }
      os << "(" << op << " ";
      emitPred(os, p->a);
      os << " ";
      emitPred(os, p->b);
      os << ")";
      return;
    }
    case PredNode::Kind::Not:
      os << "(not ";
      emitPred(os, p->a);
      os << ")";
      return;
    case PredNode::Kind::Ite:
      os << "(ite ";
      emitPred(os, p->a);
      os << " ";
      emitPred(os, p->b);
      os << " ";
      emitPred(os, p->c);
      os << ")";
      return;
  }
}

}  // namespace

std::string emitSmtlib2(const VC& vc) {
  std::ostringstream os;
  os << "(set-logic QF_UFLIA)\n";

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

  // Sort declarations: Univ plus every occurring uninterpreted function sort.
  std::set<std::string> funSorts;
  bool univUsed = false;
  auto scanSort = [&](const Sort& s) {
    if (s.kind == Sort::Kind::Univ) univUsed = true;
    collectFunSorts(s, funSorts);
    if (s.kind == Sort::Kind::Fun) {
      std::function<void(const Sort&)> rec = [&](const Sort& t) {
        if (t.kind == Sort::Kind::Univ) univUsed = true;
        if (t.kind == Sort::Kind::Fun) {
          rec(*t.arg);
          rec(*t.res);
        }
      };
      rec(s);
    }
  };
  for (const auto& [n, s] : vars) {
    (void)n;
    scanSort(s);
  }
  std::map<std::string, SymbolSig> sigs;
  for (const auto& [n, arity] : syms) {
    auto it = vc.env ? vc.env->symbols.find(n) : std::map<std::string, SymbolSig>::iterator{};
    if (vc.env && it != vc.env->symbols.end()) {
      sigs[n] = it->second;
    } else {
      // Defensive: derive a signature from one occurrence.
      SymbolSig sig;
      sig.res = Sort::mkUniv();
      for (size_t i = 0; i < arity; ++i) sig.args.push_back(Sort::mkUniv());
      sigs[n] = sig;
    }
    for (const auto& a : sigs[n].args) scanSort(a);
    scanSort(sigs[n].res);
  }
  if (univUsed) os << "(declare-sort Univ 0)\n";
  for (const auto& fs : funSorts) os << "(declare-sort |" << fs << "| 0)\n";

  for (const auto& [n, sig] : sigs) {
    os << "(declare-fun " << smtSymName(n) << " (";
    for (size_t i = 0; i < sig.args.size(); ++i) {
      if (i) os << " ";
      os << smtSortName(sig.args[i]);
    }
    os << ") " << smtSortName(sig.res) << ")\n";
  }
  for (const auto& [n, s] : vars) {
    if (sigs.count(n)) continue;
    os << "(declare-fun " << smtSymName(n) << " () " << smtSortName(s) << ")\n";
  }

  for (const auto& inst : vc.instances) {
    os << "(assert ";
    emitPred(os, inst);
    os << ")\n";
  }
  os << "(assert ";
  emitPred(os, vc.hypothesis);
  os << ")\n(assert (not ";
  emitPred(os, vc.goal);
  os << "))\n(check-sat)\n";
  return os.str();
}

std::optional<std::string> runExternalSolver(const std::string& solverPath,
                                             const std::string& smtFile) {
  std::string cmd = solverPath + " " + smtFile + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return std::nullopt;
  char buf[256];
  std::string firstLine;
  if (fgets(buf, sizeof(buf), pipe)) firstLine = buf;
  pclose(pipe);
  while (!firstLine.empty() && (firstLine.back() == '\n' || firstLine.back() == '\r'))
    firstLine.pop_back();
  if (firstLine == "sat" || firstLine == "unsat" || firstLine == "unknown")
    return firstLine;
  return std::nullopt;
}

}  // namespace rfl
