#include <algorithm>
#include <deque>
#include <sstream>

#include "smt_internal.hpp"

namespace rfl::detail {

EGraph::EGraph() {
  trueNode = addBool(true);
  falseNode = addBool(false);
}

static std::string nodeKey(const std::string& sym, const std::vector<int>& kids,
                           bool isNum, long long intVal, bool isBoolConst,
                           bool boolVal) {
  std::ostringstream os;
  if (isNum) {
    os << "#" << intVal;
  } else if (isBoolConst) {
    os << (boolVal ? "#t" : "#f");
  } else {
    os << sym;
    for (int k : kids) os << "," << k;
  }
  return os.str();
}

int EGraph::addNum(long long v) {
  std::string key = nodeKey("", {}, true, v, false, false);
  if (auto it = hashcons.find(key); it != hashcons.end()) return it->second;
  Node n;
  n.isNum = true;
  n.intVal = v;
  n.sortTag = 0;
  n.sym = "#" + std::to_string(v);
  nodes.push_back(std::move(n));
  int id = (int)nodes.size() - 1;
  parent.push_back(id);
  rank.push_back(0);
  classConst.push_back(id);
  proofParent.push_back(-1);
  proofLabel.emplace_back();
  hashcons[key] = id;
  return id;
}

int EGraph::addBool(bool v) {
  std::string key = nodeKey("", {}, false, 0, true, v);
  if (auto it = hashcons.find(key); it != hashcons.end()) return it->second;
  Node n;
  n.isBoolConst = true;
  n.boolVal = v;
  n.sortTag = 1;
  n.sym = v ? "#true" : "#false";
  nodes.push_back(std::move(n));
  int id = (int)nodes.size() - 1;
  parent.push_back(id);
  rank.push_back(0);
  classConst.push_back(id);
  proofParent.push_back(-1);
  proofLabel.emplace_back();
  hashcons[key] = id;
  return id;
}

int EGraph::addApp(const std::string& sym, const std::vector<int>& kids, int sortTag) {
  std::string key = nodeKey(sym, kids, false, 0, false, false);
  if (auto it = hashcons.find(key); it != hashcons.end()) return it->second;
  Node n;
  n.sym = sym;
  n.kids = kids;
  n.sortTag = sortTag;
  nodes.push_back(std::move(n));
  int id = (int)nodes.size() - 1;
  parent.push_back(id);
  rank.push_back(0);
  classConst.push_back(-1);
  proofParent.push_back(-1);
  proofLabel.emplace_back();
  hashcons[key] = id;
  return id;
}

int EGraph::find(int a) {
  while (parent[a] != a) {
    parent[a] = parent[parent[a]];
    a = parent[a];
  }
  return a;
}

void EGraph::proofLink(int a, int b, const std::string& label) {
  // Reroot a's proof tree so a becomes a root, then hang it under b.
  std::vector<int> path;
  int cur = a;
  while (cur != -1) {
    path.push_back(cur);
    cur = proofParent[cur];
  }
  for (size_t i = path.size(); i-- > 1;) {
    proofParent[path[i]] = path[i - 1];
    proofLabel[path[i]] = proofLabel[path[i - 1]];
  }
  proofParent[a] = b;
  proofLabel[a] = label;
}

bool EGraph::mergeRoots(int ra, int rb, int a, int b, const std::string& label) {
  int ca = classConst[ra], cb = classConst[rb];
  if (ca >= 0 && cb >= 0) {
    const Node& na = nodes[ca];
    const Node& nb = nodes[cb];
    if (na.isNum && nb.isNum && na.intVal != nb.intVal) return false;
    if (na.isBoolConst && nb.isBoolConst && na.boolVal != nb.boolVal) return false;
    if (na.isNum != nb.isNum) return false;  // ill-sorted merge
  }
  proofLink(a, b, label);
  if (rank[ra] < rank[rb]) std::swap(ra, rb);
  parent[rb] = ra;
  if (rank[ra] == rank[rb]) ++rank[ra];
  classConst[ra] = std::max(ca, cb);
  classConst[rb] = classConst[ra];
  return true;
}

bool EGraph::merge(int a, int b, const std::string& label) {
  int ra = find(a), rb = find(b);
  if (ra == rb) return true;
  if (!mergeRoots(ra, rb, a, b, label)) return false;
  return rebuild();
}

bool EGraph::rebuild() {
  // Naive congruence closure: iterate until no two congruent applications
  // remain in different classes.
  bool changed = true;
  while (changed) {
    changed = false;
    std::map<std::string, int> sigs;
    for (int i = 0; i < (int)nodes.size(); ++i) {
      if (nodes[i].isNum || nodes[i].isBoolConst) continue;
      std::ostringstream os;
      os << nodes[i].sym;
      for (int k : nodes[i].kids) os << "," << find(k);
      std::string sig = os.str();
      auto it = sigs.find(sig);
      if (it == sigs.end()) {
        sigs[sig] = i;
        continue;
      }
      int j = it->second;
      int ri = find(i), rj = find(j);
      if (ri == rj) continue;
      if (!mergeRoots(ri, rj, i, j, "congruence")) return false;
      changed = true;
    }
  }
  return true;
}

void EGraph::addDiseq(int a, int b, int reason) {
  diseqs.emplace_back(a, b);
  diseqReason.push_back(reason);
}

int EGraph::violatedDiseq() {
  for (size_t i = 0; i < diseqs.size(); ++i)
    if (find(diseqs[i].first) == find(diseqs[i].second)) return (int)i;
  return -1;
}

std::vector<std::string> EGraph::explain(int a, int b) {
  // Collect labels along the proof-forest paths to the common ancestor.
  std::map<int, int> depthOf;
  std::vector<int> pa;
  int cur = a;
  while (cur != -1) {
    depthOf[cur] = (int)pa.size();
    pa.push_back(cur);
    cur = proofParent[cur];
  }
  std::vector<std::string> out;
  cur = b;
  while (cur != -1 && !depthOf.count(cur)) {
    out.push_back(proofLabel[cur]);
    cur = proofParent[cur];
  }
  if (cur == -1) return out;  // different trees (shouldn't happen when equal)
  for (int i = 0; i < depthOf[cur]; ++i) out.push_back(proofLabel[pa[i]]);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string EGraph::render(int id) const {
  const Node& n = nodes[id];
  if (n.kids.empty()) return n.sym;
  std::string s = "(" + n.sym;
  for (int k : n.kids) s += " " + render(k);
  s += ")";
  return s;
}

}  // namespace rfl::detail

// ---------------------------------------------------------------------------
// Spec-level congruence closure entry point.

namespace rfl {

std::string GTerm::str() const {
  if (args.empty()) return sym;
  std::string s = "(" + sym;
  for (const auto& a : args) s += " " + a.str();
  s += ")";
  return s;
}

namespace {

int addGTerm(detail::EGraph& g, const GTerm& t) {
  if (!t.sym.empty() && t.sym[0] == '#' && t.args.empty())
    return g.addNum(std::stoll(t.sym.substr(1)));
  std::vector<int> kids;
  kids.reserve(t.args.size());
  for (const auto& a : t.args) kids.push_back(addGTerm(g, a));
  return g.addApp(t.sym, kids, 2);
}

}  // namespace

CongruenceResult congruenceClose(const std::vector<std::pair<GTerm, GTerm>>& eqs,
                                 const std::vector<std::pair<GTerm, GTerm>>& diseqs) {
  detail::EGraph g;
  std::vector<std::pair<int, int>> eqIds;
  for (const auto& [l, r] : eqs) eqIds.emplace_back(addGTerm(g, l), addGTerm(g, r));
  for (size_t i = 0; i < diseqs.size(); ++i)
    g.addDiseq(addGTerm(g, diseqs[i].first), addGTerm(g, diseqs[i].second), (int)i);
  CongruenceResult res;
  for (size_t i = 0; i < eqIds.size(); ++i) {
    if (!g.merge(eqIds[i].first, eqIds[i].second, "eq#" + std::to_string(i))) {
      res.consistent = false;
      res.justification = {"eq#" + std::to_string(i), "constant-clash"};
      return res;
    }
  }
  int v = g.violatedDiseq();
  if (v >= 0) {
    res.consistent = false;
    res.violatedDiseq = v;
    res.justification = g.explain(g.diseqs[v].first, g.diseqs[v].second);
  }
  return res;
}

}  // namespace rfl
