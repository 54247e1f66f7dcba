#include <doctest.h>

#include "rfl/smt.hpp"

using namespace rfl;

namespace {

LinAtom atom(std::map<std::string, long long> coeffs, LinAtom::Rel rel, long long k) {
  LinAtom a;
  a.coeffs = std::move(coeffs);
  a.rel = rel;
  a.k = k;
  return a;
}

const auto LE = LinAtom::Rel::Le;
const auto LT = LinAtom::Rel::Lt;
const auto EQ = LinAtom::Rel::Eq;

bool feasible(const std::vector<LinAtom>& atoms) {
  auto r = liaDecide(atoms);
  REQUIRE(r.kind != LiaResult::Kind::Unknown);
  if (r.kind == LiaResult::Kind::Feasible) {
    // replay the model against every atom
    for (const auto& a : atoms) {
      long long sum = 0;
      for (const auto& [v, c] : a.coeffs) sum += c * r.model.at(v);
      switch (a.rel) {
        case EQ: CHECK(sum == a.k); break;
        case LE: CHECK(sum <= a.k); break;
        case LT: CHECK(sum < a.k); break;
      }
    }
    return true;
  }
  return false;
}

}  // namespace

TEST_CASE("lia: bounds and contradictions") {
  // 1. x >= 1 && x <= 0
  CHECK(!feasible({atom({{"x", -1}}, LE, -1), atom({{"x", 1}}, LE, 0)}));
  // 2. x >= 1 && x <= 1
  CHECK(feasible({atom({{"x", -1}}, LE, -1), atom({{"x", 1}}, LE, 1)}));
  // 3. x < 1 && x > -1 forces x = 0
  CHECK(feasible({atom({{"x", 1}}, LT, 1), atom({{"x", -1}}, LT, 1)}));
  // 4. x < 0 && x > 0
  CHECK(!feasible({atom({{"x", 1}}, LT, 0), atom({{"x", -1}}, LT, 0)}));
  // 5. x = 5 && x <= 4
  CHECK(!feasible({atom({{"x", 1}}, EQ, 5), atom({{"x", 1}}, LE, 4)}));
  // 6. equalities chain: x = y, y = 3, x = 3
  CHECK(feasible({atom({{"x", 1}, {"y", -1}}, EQ, 0), atom({{"y", 1}}, EQ, 3),
                  atom({{"x", 1}}, EQ, 3)}));
  // 7. x = y, y = 3, x = 4
  CHECK(!feasible({atom({{"x", 1}, {"y", -1}}, EQ, 0), atom({{"y", 1}}, EQ, 3),
                   atom({{"x", 1}}, EQ, 4)}));
}

TEST_CASE("lia: sums and certificates") {
  // 8. x+y <= 5, x >= 3, y >= 3 with a nonnegative combination certificate
  auto r = liaDecide({atom({{"x", 1}, {"y", 1}}, LE, 5), atom({{"x", -1}}, LE, -3),
                      atom({{"y", -1}}, LE, -3)});
  REQUIRE(r.kind == LiaResult::Kind::Infeasible);
  // summing all three with the reported multipliers contradicts 0 <= -1
  REQUIRE(!r.certificate.empty());
  for (const auto& [idx, m] : r.certificate) {
    CHECK(idx >= 0);
    CHECK(idx < 3);
    CHECK(Rat(0) < m);
  }
  // 9. same system relaxed is feasible
  CHECK(feasible({atom({{"x", 1}, {"y", 1}}, LE, 6), atom({{"x", -1}}, LE, -3),
                  atom({{"y", -1}}, LE, -3)}));
  // 10. three-variable cycle: x<y, y<z, z<x
  CHECK(!feasible({atom({{"x", 1}, {"y", -1}}, LT, 0),
                   atom({{"y", 1}, {"z", -1}}, LT, 0),
                   atom({{"z", 1}, {"x", -1}}, LT, 0)}));
  // 11. difference chain that just fits: x<y<z with z<=x+2
  CHECK(feasible({atom({{"x", 1}, {"y", -1}}, LT, 0),
                  atom({{"y", 1}, {"z", -1}}, LT, 0),
                  atom({{"z", 1}, {"x", -1}}, LE, 2)}));
  // 12. and breaks with z <= x+1
  CHECK(!feasible({atom({{"x", 1}, {"y", -1}}, LT, 0),
                   atom({{"y", 1}, {"z", -1}}, LT, 0),
                   atom({{"z", 1}, {"x", -1}}, LE, 1)}));
}

TEST_CASE("lia: integrality cuts") {
  // 13. 2x = 3
  CHECK(!feasible({atom({{"x", 2}}, EQ, 3)}));
  // 14. 2x = 4
  CHECK(feasible({atom({{"x", 2}}, EQ, 4)}));
  // 15. 2x + 2y = 1
  CHECK(!feasible({atom({{"x", 2}, {"y", 2}}, EQ, 1)}));
  // 16. 3x = 5
  CHECK(!feasible({atom({{"x", 3}}, EQ, 5)}));
  // 17. rationally feasible band with no integer point: 3 < 2x < 5 means x=2
  CHECK(feasible({atom({{"x", -2}}, LT, -3), atom({{"x", 2}}, LT, 5)}));
  // 18. 1 < 2x < 3 has no integer solution
  CHECK(!feasible({atom({{"x", -2}}, LT, -1), atom({{"x", 2}}, LT, 3)}));
  // 19. parity via two equations: x = 2y and x = 2z+1
  CHECK(!feasible({atom({{"x", 1}, {"y", -2}}, EQ, 0),
                   atom({{"x", 1}, {"z", -2}}, EQ, 1)}));
  // 20. 5x + 3y = 1 has integer solutions (e.g. x=2, y=-3)
  CHECK(feasible({atom({{"x", 5}, {"y", 3}}, EQ, 1)}));
}

TEST_CASE("lia: corpus-shaped guard reasoning") {
  // 21. 0<=n, n!=0 pre-split as 0<n: then 1<=n
  CHECK(!feasible({atom({{"n", -1}}, LE, 0), atom({{"n", -1}}, LT, 0),
                   atom({{"n", 1}}, LT, 1)}));
  // 22. 0<=n, n>=2 consistent with n-1>=1
  CHECK(feasible({atom({{"n", -1}}, LE, 0), atom({{"n", -1}}, LE, -2),
                  atom({{"n", -1}}, LE, -1)}));
  // 23. metric decrease: 0 <= n-1 < n under 0<n
  CHECK(feasible({atom({{"n", -1}}, LT, 0)}));
  // 24. a non-decreasing "metric": m = n-1 together with m >= n
  CHECK(!feasible({atom({{"m", 1}, {"n", -1}}, EQ, -1),
                   atom({{"n", 1}, {"m", -1}}, LE, 0)}));
  // 25. x+1 = y && y-1 != x (as y-1 < x) is infeasible
  CHECK(!feasible({atom({{"x", 1}, {"y", -1}}, EQ, -1),
                   atom({{"y", 1}, {"x", -1}}, LT, 1),
                   atom({{"x", 1}, {"y", -1}}, LT, -1)}));
  // 26. widening: 0<=x<=10, 0<=y<=10, x+y=20 forces both at 10
  CHECK(feasible({atom({{"x", 1}}, LE, 10), atom({{"x", -1}}, LE, 0),
                  atom({{"y", 1}}, LE, 10), atom({{"y", -1}}, LE, 0),
                  atom({{"x", 1}, {"y", 1}}, EQ, 20)}));
  // 27. and x+y=21 cannot
  CHECK(!feasible({atom({{"x", 1}}, LE, 10), atom({{"x", -1}}, LE, 0),
                   atom({{"y", 1}}, LE, 10), atom({{"y", -1}}, LE, 0),
                   atom({{"x", 1}, {"y", 1}}, EQ, 21)}));
}

TEST_CASE("lia: misc shapes") {
  // 28. empty system
  CHECK(feasible({}));
  // 29. ground false
  CHECK(!feasible({atom({}, LT, 0)}));
  // 30. ground true
  CHECK(feasible({atom({}, LE, 0)}));
  // 31. coefficients with gcd reduction: 4x <= 6 over ints means x <= 1
  CHECK(!feasible({atom({{"x", 4}}, LE, 6), atom({{"x", -1}}, LE, -2)}));
  // 32. negative coefficients: -3x <= -9 means x >= 3
  CHECK(feasible({atom({{"x", -3}}, LE, -9), atom({{"x", 1}}, LE, 3)}));
  // 33. redundant constraints keep a model
  CHECK(feasible({atom({{"x", 1}}, LE, 5), atom({{"x", 2}}, LE, 10),
                  atom({{"x", 3}}, LE, 15)}));
  // 34. equality with slack interplay: x+y=4, x-y=2 -> x=3,y=1
  CHECK(feasible({atom({{"x", 1}, {"y", 1}}, EQ, 4),
                  atom({{"x", 1}, {"y", -1}}, EQ, 2)}));
  // 35. same but odd difference forces fractional halves
  CHECK(!feasible({atom({{"x", 1}, {"y", 1}}, EQ, 4),
                   atom({{"x", 1}, {"y", -1}}, EQ, 1)}));
}
