#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rfl/logic.hpp"

// Built-in decision procedure for the VC fragment: boolean structure by
// DPLL-style guarded splitting, leaves decided by congruence closure over
// uninterpreted functions interleaved with a rational simplex plus
// branch-and-bound for integrality, exchanging equalities over shared
// subterms. SMT-LIB2 emission for external cross-checking.

namespace rfl {

// --- spec-level EUF entry ---------------------------------------------------

struct GTerm {
  std::string sym;             // function symbol or variable; "#<n>" for numerals
  std::vector<GTerm> args;

  static GTerm var(std::string v) { return {std::move(v), {}}; }
  static GTerm num(long long n) { return {"#" + std::to_string(n), {}}; }
  static GTerm app(std::string f, std::vector<GTerm> as) {
    return {std::move(f), std::move(as)};
  }
  std::string str() const;
};

struct CongruenceResult {
  bool consistent = true;
  // On conflict: the violated disequality index and the merge chain that
  // identified its sides (input equality indices and congruence steps).
  int violatedDiseq = -1;
  std::vector<std::string> justification;
};

CongruenceResult congruenceClose(const std::vector<std::pair<GTerm, GTerm>>& eqs,
                                 const std::vector<std::pair<GTerm, GTerm>>& diseqs);

// --- spec-level LIA entry ----------------------------------------------------

struct Rat {
  long long num = 0;
  long long den = 1;

  Rat() = default;
  Rat(long long n) : num(n), den(1) {}
  Rat(long long n, long long d);
  bool isInt() const { return den == 1; }
  std::string str() const;
};

Rat operator+(const Rat&, const Rat&);
Rat operator-(const Rat&, const Rat&);
Rat operator*(const Rat&, const Rat&);
bool operator==(const Rat&, const Rat&);
bool operator<(const Rat&, const Rat&);
bool operator<=(const Rat&, const Rat&);

struct LinAtom {
  enum class Rel { Eq, Le, Lt };  // sum rel k
  std::map<std::string, long long> coeffs;
  long long k = 0;
  Rel rel = Rel::Le;
};

struct LiaResult {
  enum class Kind { Feasible, Infeasible, Unknown };
  Kind kind = Kind::Unknown;
  std::map<std::string, long long> model;       // Feasible
  std::vector<std::pair<int, Rat>> certificate; // Infeasible at the rational
                                                // level: atom index -> multiplier
  std::string reason;                           // Unknown
};

LiaResult liaDecide(const std::vector<LinAtom>& atoms, int branchDepth = 32);

// --- full solver --------------------------------------------------------------

struct ModelValue {
  enum class Kind { Int, Bool, Abs };
  Kind kind = Kind::Abs;
  long long i = 0;
  bool b = false;
  int abs = 0;

  static ModelValue ofInt(long long v) { return {Kind::Int, v, false, 0}; }
  static ModelValue ofBool(bool v) { return {Kind::Bool, 0, v, 0}; }
  static ModelValue ofAbs(int id) { return {Kind::Abs, 0, false, id}; }
  bool operator==(const ModelValue& o) const;
  std::string str() const;
};

struct Model {
  std::map<std::string, ModelValue> vars;  // variable name -> value
  std::map<std::string, ModelValue> apps;  // rendered application -> value
  std::string render() const;
};

struct Verdict {
  enum class Kind { Valid, Invalid, Unknown };
  Kind kind = Kind::Unknown;
  Model model;         // Invalid
  std::string reason;  // Unknown: BranchBudget, NonlinearAtom, ...

  bool valid() const { return kind == Kind::Valid; }
};

struct SolveOptions {
  long long branchBudget = 10000;  // theory-checked leaves
  int bbDepth = 32;                // branch-and-bound depth for integrality
};

Verdict solve(const VC& vc, const SolveOptions& opts = {});

// Evaluates the VC under a model; uninterpreted gaps are filled
// hash-consistently. Used to replay Invalid verdicts.
bool replayVC(const VC& vc, const Model& m);

// --- SMT-LIB2 ------------------------------------------------------------------

std::string emitSmtlib2(const VC& vc);

// Runs `solverPath <file>` and parses sat|unsat|unknown from the first output
// line; nullopt when the solver could not be run.
std::optional<std::string> runExternalSolver(const std::string& solverPath,
                                             const std::string& smtFile);

}  // namespace rfl
