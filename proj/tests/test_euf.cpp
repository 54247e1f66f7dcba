#include <doctest.h>

#include "rfl/smt.hpp"

using namespace rfl;

namespace {

GTerm v(const char* x) { return GTerm::var(x); }
GTerm f1(const char* f, GTerm a) { return GTerm::app(f, {std::move(a)}); }
GTerm f2(const char* f, GTerm a, GTerm b) {
  return GTerm::app(f, {std::move(a), std::move(b)});
}

bool consistent(std::vector<std::pair<GTerm, GTerm>> eqs,
                std::vector<std::pair<GTerm, GTerm>> diseqs) {
  return congruenceClose(eqs, diseqs).consistent;
}

}  // namespace

// Hand-derived congruence-closure verdicts.
TEST_CASE("euf: basic congruence chains") {
  // 1. empty input is consistent
  CHECK(consistent({}, {}));
  // 2. a=b, f b = c, f a != c  -> conflict
  CHECK(!consistent({{v("a"), v("b")}, {f1("f", v("b")), v("c")}},
                    {{f1("f", v("a")), v("c")}}));
  // 3. same without the disequality
  CHECK(consistent({{v("a"), v("b")}, {f1("f", v("b")), v("c")}}, {}));
  // 4. reflexivity: a != a
  CHECK(!consistent({}, {{v("a"), v("a")}}));
  // 5. symmetry: a=b, b!=a
  CHECK(!consistent({{v("a"), v("b")}}, {{v("b"), v("a")}}));
  // 6. transitivity chain of 4
  CHECK(!consistent({{v("a"), v("b")}, {v("b"), v("c")}, {v("c"), v("d")}},
                    {{v("a"), v("d")}}));
  // 7. congruence through two layers: a=b |- g(f a)=g(f b)
  CHECK(!consistent({{v("a"), v("b")}},
                    {{f1("g", f1("f", v("a"))), f1("g", f1("f", v("b")))}}));
  // 8. two-argument congruence
  CHECK(!consistent({{v("a"), v("b")}, {v("c"), v("d")}},
                    {{f2("h", v("a"), v("c")), f2("h", v("b"), v("d"))}}));
  // 9. argument order matters
  CHECK(consistent({{v("a"), v("b")}},
                   {{f2("h", v("a"), v("c")), f2("h", v("c"), v("b"))}}));
  // 10. f(f(f(a)))=a, f(f(f(f(f(a)))))=a |- f(a)=a  (classic)
  GTerm a = v("a");
  GTerm fa = f1("f", a);
  GTerm f2a = f1("f", fa);
  GTerm f3a = f1("f", f2a);
  GTerm f4a = f1("f", f3a);
  GTerm f5a = f1("f", f4a);
  CHECK(!consistent({{f3a, a}, {f5a, a}}, {{fa, a}}));
}

TEST_CASE("euf: numerals and constants") {
  // 11. distinct numerals cannot merge
  CHECK(!consistent({{GTerm::num(3), GTerm::num(5)}}, {}));
  // 12. same numeral is fine
  CHECK(consistent({{GTerm::num(3), GTerm::num(3)}}, {}));
  // 13. x=3, y=3 |- x=y
  CHECK(!consistent({{v("x"), GTerm::num(3)}, {v("y"), GTerm::num(3)}},
                    {{v("x"), v("y")}}));
  // 14. x=3, y=4 consistent with x!=y
  CHECK(consistent({{v("x"), GTerm::num(3)}, {v("y"), GTerm::num(4)}},
                   {{v("x"), v("y")}}));
  // 15. merging through a function: x=3 and f 3 = 1 force f x = 1
  CHECK(!consistent({{v("x"), GTerm::num(3)}, {f1("f", GTerm::num(3)), GTerm::num(1)}},
                    {{f1("f", v("x")), GTerm::num(1)}}));
  // 16. numerals via variables: x=3, x=y, y=5 clash
  CHECK(!consistent(
      {{v("x"), GTerm::num(3)}, {v("x"), v("y")}, {v("y"), GTerm::num(5)}}, {}));
}

TEST_CASE("euf: selector and checker interplay") {
  // 17. xs = C h t with ground instance sel1(C h t) = h merges sel1 xs ~ h
  GTerm cht = f2("C", v("h"), v("t"));
  CHECK(!consistent({{v("xs"), cht}, {f1("sel1", cht), v("h")}},
                    {{f1("sel1", v("xs")), v("h")}}));
  // 18. same for the second field
  CHECK(!consistent({{v("xs"), cht}, {f1("sel2", cht), v("t")}},
                    {{f1("sel2", v("xs")), v("t")}}));
  // 19. checker congruence: xs = ys |- isC xs = isC ys
  CHECK(!consistent({{v("xs"), v("ys")}},
                    {{f1("isC", v("xs")), f1("isC", v("ys"))}}));
  // 20. without the构 equality nothing merges
  CHECK(consistent({{f1("sel1", cht), v("h")}}, {{f1("sel1", v("xs")), v("h")}}));
  // 21. two constructors with merged fields build equal terms
  CHECK(!consistent({{v("h1"), v("h2")}, {v("t1"), v("t2")}},
                    {{f2("C", v("h1"), v("t1")), f2("C", v("h2"), v("t2"))}}));
  // 22. nested constructor equality runs through selectors
  GTerm inner = f2("C", v("x"), v("r"));
  CHECK(!consistent({{v("ys"), f2("C", v("h"), inner)}, {f1("sel2", f2("C", v("h"), inner)), inner}},
                    {{f1("sel2", v("ys")), inner}}));
}

TEST_CASE("euf: justifications") {
  // 23. the conflict explanation names the inputs that caused the merge
  auto r = congruenceClose({{v("a"), v("b")}, {f1("f", v("b")), v("c")}},
                           {{f1("f", v("a")), v("c")}});
  REQUIRE(!r.consistent);
  CHECK(r.violatedDiseq == 0);
  bool sawEq = false;
  for (const auto& j : r.justification)
    if (j.rfind("eq#", 0) == 0) sawEq = true;
  CHECK(sawEq);
  // 24. direct numeric clash reports the offending equation
  auto r2 = congruenceClose({{GTerm::num(1), GTerm::num(2)}}, {});
  REQUIRE(!r2.consistent);
  CHECK(r2.justification.size() >= 1);
}

TEST_CASE("euf: function-valued symbols through apply") {
  // 25. defunctionalized congruence: g=f |- app(g,x)=app(f,x)
  CHECK(!consistent({{v("g"), v("f")}},
                    {{f2("app", v("g"), v("x")), f2("app", v("f"), v("x"))}}));
  // 26. different arguments stay apart
  CHECK(consistent({{v("g"), v("f")}},
                   {{f2("app", v("g"), v("x")), f2("app", v("f"), v("y"))}}));
  // 27. chained apply congruence (curried two-argument function)
  CHECK(!consistent(
      {{v("x"), v("y")}},
      {{f2("app", f2("app", v("add"), v("x")), v("z")),
        f2("app", f2("app", v("add"), v("y")), v("z"))}}));
  // 28. deep: equal arguments two levels down
  CHECK(!consistent(
      {{v("n"), v("m")}},
      {{f1("fib", f2("plus", v("n"), GTerm::num(1))),
        f1("fib", f2("plus", v("m"), GTerm::num(1)))}}));
  // 29. mixed: merge by equation, split by disequality elsewhere stays fine
  CHECK(consistent({{v("a"), v("b")}}, {{v("c"), v("d")}}));
  // 30. three-way congruence collapse
  CHECK(!consistent({{v("a"), v("b")}, {v("b"), v("c")}},
                    {{f1("f", v("a")), f1("f", v("c"))}}));
  // 31. idempotent merges keep consistency
  CHECK(consistent({{v("a"), v("b")}, {v("a"), v("b")}, {v("b"), v("a")}}, {}));
  // 32. disequality between distinct uninterpreted constants is satisfiable
  CHECK(consistent({}, {{f1("f", v("x")), v("x")}}));
}
