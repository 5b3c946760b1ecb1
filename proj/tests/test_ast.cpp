#include <gtest/gtest.h>

#include "support.hpp"

using namespace pvgr;
using namespace pvgr::test;

TEST(Subst, ValueVariableHit) {
  auto x = fresh_ident("x");
  auto e = subst1(x, vl::unit(), xp::val(vl::var(x)));
  EXPECT_TRUE(same(e, xp::val(vl::unit())));
}

TEST(Subst, ValueVariableMiss) {
  auto x = fresh_ident("x");
  auto y = fresh_ident("y");
  auto e = xp::val(vl::var(y));
  EXPECT_TRUE(same(subst1(x, vl::unit(), e), e));
}

TEST(Subst, DomainIntoChannel) {
  auto t = subst1(I("a"), ty::var(I("d")), T("Chan a"));
  EXPECT_TRUE(same(t, T("Chan d")));
}

TEST(Subst, AvoidsCapture) {
  auto t = T("forall b:Type. (a * b)");
  auto out = subst1(I("a"), ty::chan(ty::var(I("b"))), t);
  EXPECT_EQ(free_vars(out), IdentSet{I("b")});
  EXPECT_TRUE(alpha(out, T("forall c:Type. (Chan b * c)")));
}

TEST(Subst, StopsAtShadowingBinder) {
  auto a = fresh_ident("a");
  auto t = ty::lam(a, ty::shape_one(), ty::chan(ty::var(a)));
  EXPECT_TRUE(same(subst1(a, ty::unit(), t), t));
}

TEST(FreeVars, Examples) {
  EXPECT_EQ(free_vars(T("Chan a")), IdentSet{I("a")});
  EXPECT_TRUE(free_vars(T("\\a:1. Chan a")).empty());
  EXPECT_EQ(free_vars(ty::st_bind(ty::var(I("a")), ty::dual(ty::var(I("b"))))), (IdentSet{I("a"), I("b")}));
}

TEST(FreeVars, ExistentialBindsPostAndResult) {
  auto t = T("[.; Unit -> ex c:Dom(1). {c: s}; Chan c]");
  EXPECT_EQ(free_vars(t), IdentSet{I("s")});
}

TEST(Canonicalize, AlphaVariantsCoincide) {
  auto a = fresh_ident("a"), b = fresh_ident("b");
  auto l = ty::lam(a, ty::shape_one(), ty::var(a));
  auto r = ty::lam(b, ty::shape_one(), ty::var(b));
  EXPECT_FALSE(same(l, r));
  EXPECT_TRUE(same(canonicalize(l), canonicalize(r)));
}

TEST(Canonicalize, KeepsFreeVariables) {
  EXPECT_FALSE(alpha(T("Chan a"), T("Chan b")));
}

TEST(Canonicalize, Idempotent) {
  auto t = T("forall n:Shape. forall a:Dom(n). [.; Chan pi1 a -> ex c:Dom(1), d:Dom(1), c # d. {c: End}; Unit]");
  auto c = canonicalize(t);
  EXPECT_TRUE(same(c, canonicalize(c)));
}

TEST(Canonicalize, ConfigurationBinders) {
  auto p = parse_program("nu (a, b): End. close (chan a) | close (chan b)");
  auto q = parse_program("nu (x, y): End. close (chan x) | close (chan y)");
  auto r = parse_program("nu (x, y): End. close (chan y) | close (chan x)");
  EXPECT_TRUE(alpha(p.config, q.config));
  EXPECT_FALSE(alpha(p.config, r.config));
}

TEST(NodeCount, CountsEveryNode) {
  EXPECT_EQ(node_count(T("End")), 1u);
  EXPECT_EQ(node_count(T("(Unit * Unit)")), 3u);
}
