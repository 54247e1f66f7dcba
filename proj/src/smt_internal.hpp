#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rfl/smt.hpp"

// Shared internals of the decision procedure.

namespace rfl::detail {

// ---------------------------------------------------------------------------
// Hash-consed ground terms with union-find congruence closure.

struct EGraph {
  struct Node {
    std::string sym;         // symbol / variable; numerals use intVal
    std::vector<int> kids;   // child node ids (original, not class ids)
    bool isNum = false;
    long long intVal = 0;
    bool isBoolConst = false;
    bool boolVal = false;
    int sortTag = 2;  // 0 Int, 1 Bool, 2 other
  };

  std::vector<Node> nodes;
  std::vector<int> parent;           // union-find
  std::vector<int> rank;
  std::vector<int> classConst;       // node id of a constant in the class, -1
  std::map<std::string, int> hashcons;

  // proof forest for explanations
  std::vector<int> proofParent;      // -1 = root
  std::vector<std::string> proofLabel;

  std::vector<std::pair<int, int>> diseqs;
  std::vector<int> diseqReason;

  int trueNode = -1, falseNode = -1;

  EGraph();

  int addNum(long long v);
  int addBool(bool v);
  int addApp(const std::string& sym, const std::vector<int>& kids, int sortTag);

  int find(int a);
  bool sameClass(int a, int b) { return find(a) == find(b); }

  // Merges with an explanation label; returns false on hard conflict
  // (distinct numerals or distinct boolean constants identified).
  bool merge(int a, int b, const std::string& label);

  // Closes under congruence; false on hard conflict.
  bool rebuild();

  void addDiseq(int a, int b, int reason);
  // -1 when consistent, else the index of a violated disequality.
  int violatedDiseq();

  std::vector<std::string> explain(int a, int b);

  std::string render(int id) const;

 private:
  bool mergeRoots(int ra, int rb, int a, int b, const std::string& label);
  void proofLink(int a, int b, const std::string& label);
};

// ---------------------------------------------------------------------------
// Bounds-form simplex over rationals with branch-and-bound integrality.

struct Bound {
  bool has = false;
  Rat value;
  int constraintIndex = -1;  // originating input atom; -1 for internal
};

class Simplex {
 public:
  // var identifiers are dense ints supplied by the caller
  explicit Simplex(int numVars);

  // Adds sum(coeffs) rel k as input atom `index`.
  void addConstraint(const std::map<int, Rat>& coeffs, LinAtom::Rel rel, Rat k,
                     int index);
  void addLower(int var, Rat v, int index);
  void addUpper(int var, Rat v, int index);

  struct Result {
    enum class Kind { Feasible, Infeasible, Unknown } kind;
    std::map<int, Rat> model;
    std::vector<std::pair<int, Rat>> certificate;
    std::string reason;
  };

  Result checkRational();
  Result checkInteger(int depth);

 private:
  int ensureSlack(const std::map<int, Rat>& coeffs);
  Result solveLoop();

  int n_;                                 // total vars (columns + slacks)
  std::vector<std::map<int, Rat>> rows_;  // basic var -> linear form over nonbasic
  std::vector<int> rowOf_;                // var -> row index or -1
  std::vector<Bound> lower_, upper_;
  std::vector<Rat> beta_;
  std::map<std::string, int> slackBySig_;
};

}  // namespace rfl::detail
