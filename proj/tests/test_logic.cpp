#include <doctest.h>

#include "rfl/logic.hpp"

using namespace rfl;

TEST_CASE("sorts render and compare") {
  Sort fii = Sort::mkFun(Sort::mkInt(), Sort::mkInt());
  CHECK(fii.str() == "Fun<Int,Int>");
  CHECK(fii == Sort::mkFun(Sort::mkInt(), Sort::mkInt()));
  CHECK(!(fii == Sort::mkFun(Sort::mkInt(), Sort::mkBool())));
  Sort nested = Sort::mkFun(Sort::mkUniv(), fii);
  CHECK(nested.str() == "Fun<Univ,Fun<Int,Int>>");
  Sort parsedArg;
  CHECK(isLamSymbol(lamSymbol(nested, Sort::mkBool()), &parsedArg));
  CHECK(parsedArg == nested);
}

TEST_CASE("maxlam follows the binder pool discipline") {
  Sort s = Sort::mkUniv();
  Sort fun = Sort::mkFun(s, s);
  auto lam = [&](int i, Pred body) {
    return pApp(lamSymbol(s, s), {poolVar(s, i), std::move(body)}, fun);
  };
  Pred w = pVar("w", s);
  // lam x2 (lam x1 w) has maxlam 2
  CHECK(maxlam(s, lam(2, lam(1, w))) == 2);
  // a lambda-free arithmetic term has maxlam 0
  Pred arith = pBin(PredOp::Add, pInt(1), pVar("n", Sort::mkInt()));
  CHECK(maxlam(s, arith) == 0);
  // maxlam distributes through ite as the max of the branches
  Pred ite = pIte(pBool(true), lam(3, w), lam(1, w));
  CHECK(maxlam(s, ite) == 3);
  // binders of a different argument sort do not count
  Sort si = Sort::mkInt();
  Pred lamInt = pApp(lamSymbol(si, si), {poolVar(si, 5), pInt(0)},
                     Sort::mkFun(si, si));
  CHECK(maxlam(s, lamInt) == 0);
  CHECK(maxlam(si, lamInt) == 5);
}

TEST_CASE("pred substitution and equality") {
  Sort I = Sort::mkInt();
  Pred x = pVar("x", I);
  Pred body = pBin(PredOp::Add, x, pInt(1));
  Pred r = substPredVar(body, "x", pInt(5));
  CHECK(printPred(r) == "(+ 5 1)");
  CHECK(predEq(body, pBin(PredOp::Add, pVar("x", I), pInt(1))));
  CHECK(!predEq(body, r));
}

TEST_CASE("VC rendering is stable and lists declarations") {
  auto env = std::make_shared<LogicEnv>();
  Sort I = Sort::mkInt();
  VC vc;
  vc.env = env;
  vc.hypothesis = pBin(PredOp::Le, pInt(0), pVar("n", I));
  vc.goal = pBin(PredOp::Lt, pVar("n", I), pApp("f", {pVar("n", I)}, I));
  vc.instances.push_back(pBool(true));
  std::string r1 = renderVC(vc);
  std::string r2 = renderVC(vc);
  CHECK(r1 == r2);
  CHECK(r1.find("decls:") != std::string::npos);
  CHECK(r1.find("n:Int") != std::string::npos);
  CHECK(r1.find("f/1") != std::string::npos);
  CHECK(r1.find("hyp: (<= 0 n)") != std::string::npos);
  CHECK(r1.find("goal: (< n (f n))") != std::string::npos);
}

TEST_CASE("logic env declares app/lam pairs and pools") {
  LogicEnv env;
  env.lambdaPool = 4;
  env.ensureAppLam(Sort::mkInt(), Sort::mkInt());
  CHECK(env.declared("app<Int,Int>"));
  CHECK(env.declared("lam<Int,Int>"));
  CHECK(env.declared(poolVarName(Sort::mkInt(), 1)));
  CHECK(env.declared(poolVarName(Sort::mkInt(), 4)));
  CHECK(!env.declared(poolVarName(Sort::mkInt(), 5)));
}
