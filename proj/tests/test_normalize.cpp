#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pvgr/normalize.hpp"
#include "support.hpp"

using namespace pvgr;
using namespace pvgr::test;

TEST(Normalize, DualEnd) { EXPECT_TRUE(same(normalize(T("dual End")), ty::end())); }

TEST(Normalize, DualInvolutionOnVariable) { EXPECT_TRUE(same(normalize(T("dual dual s")), T("s"))); }

TEST(Normalize, DualFlipsMessages) {
  auto n = normalize(T("dual (!{a:Dom(0)}(.; Int).?{b:Dom(0)}(.; Int).s)"));
  EXPECT_TRUE(alpha(n, T("?{a:Dom(0)}(.; Int).!{b:Dom(0)}(.; Int).dual s")));
}

TEST(Normalize, DualFlipsChoice) {
  EXPECT_TRUE(alpha(normalize(T("dual (End +c s)")), T("End +b dual s")));
  EXPECT_TRUE(alpha(normalize(T("dual (End +b s)")), T("End +c dual s")));
}

TEST(Normalize, DualOfStuckApplicationStays) {
  auto t = ty::dual(ty::app(ty::var(I("f")), ty::var(I("d"))));
  auto n = normalize(t);
  EXPECT_EQ(n->tag, TypeTag::Dual);
}

TEST(Normalize, DualLeavesPayloadAlone) {
  auto n = normalize(T("dual (!{a:Dom(1)}({a: !{x:Dom(0)}(.; Unit).End}; Chan a).End)"));
  EXPECT_TRUE(alpha(n, T("?{a:Dom(1)}({a: !{x:Dom(0)}(.; Unit).End}; Chan a).End")));
}

TEST(Normalize, BetaAndProjection) {
  EXPECT_TRUE(same(normalize(T("(\\d:1. Chan d) a")), T("Chan a")));
  EXPECT_TRUE(same(normalize(T("pi2 (a, b)")), T("b")));
  EXPECT_TRUE(same(normalize(T("(\\d:(1*1). Chan pi1 d) (a, b)")), T("Chan a")));
}

TEST(Normalize, StatesFlattenedWithoutUnits) {
  auto n = normalize(T("forall S:State. (., ({a: End}, .), S)"));
  auto body = n->body();
  auto atoms = state_atoms(body);
  EXPECT_EQ(atoms.size(), 2u);
  for (const auto& a : atoms) EXPECT_NE(a->tag, TypeTag::StEmpty);
}

TEST(Normalize, StateOrderIsCanonical) {
  EXPECT_TRUE(same(normalize(T("{a: End, b: End}")), normalize(T("{b: End, a: End}"))));
}

TEST(Normalize, Idempotent) {
  oracle::Rng rng(31);
  for (int i = 0; i < 500; ++i) {
    auto t = oracle::random_closed_type(rng, 4);
    auto n = normalize(t);
    ASSERT_TRUE(is_normal(n)) << pretty(t);
    ASSERT_TRUE(same(n, normalize(n))) << pretty(t);
  }
}

TEST(Normalize, NormalFormInvariants) {
  oracle::Rng rng(32);
  std::function<void(const TypeP&)> walk = [&](const TypeP& t) {
    if (!t) return;
    if (t->tag == TypeTag::App) ASSERT_NE(t->fn()->tag, TypeTag::Lam);
    if (t->tag == TypeTag::DomProj) ASSERT_NE(t->dom()->tag, TypeTag::DomMerge);
    if (t->tag == TypeTag::Dual) ASSERT_TRUE(t->ses()->tag == TypeTag::Var || t->ses()->tag == TypeTag::App);
    for (const auto& k : t->kids) walk(k);
  };
  for (int i = 0; i < 500; ++i) walk(normalize(oracle::random_closed_type(rng, 4)));
}

TEST(AlphaEquiv, Examples) {
  auto a = fresh_ident("a"), b = fresh_ident("b");
  EXPECT_TRUE(alpha_equiv(ty::lam(a, ty::shape_one(), ty::chan(ty::var(a))),
                          ty::lam(b, ty::shape_one(), ty::chan(ty::var(b)))));
  EXPECT_FALSE(alpha_equiv(ty::end(), ty::dual(ty::end())));
  EXPECT_FALSE(alpha_equiv(T("Chan a"), T("Chan b")));
}

TEST(Conv, Examples) {
  EXPECT_TRUE(conv(T("dual dual (!{x:Dom(0)}(.; Unit).End)"), T("!{x:Dom(0)}(.; Unit).End")));
  EXPECT_TRUE(conv(T("{a: End, b: End}"), T("{b: End, a: End}")));
  EXPECT_FALSE(conv(T("Unit"), T("(Unit * Unit)")));
}

TEST(Conv, ExistentialOrderAndConstraintSymmetry) {
  EXPECT_TRUE(conv(T("[.; Unit -> ex c:Dom(1), d:Dom(1), c # d. {c: End, d: End}; Unit]"),
                   T("[.; Unit -> ex d:Dom(1), c:Dom(1), d # c. {c: End, d: End}; Unit]")));
  EXPECT_TRUE(conv(T("forall a:Dom(1). forall b:Dom(1)[a # b]. Unit"), T("forall a:Dom(1). forall b:Dom(1)[b # a]. Unit")));
}

TEST(Conv, ConstraintsSplitOverMerges) {
  EXPECT_TRUE(conv(T("forall a:Dom(1). forall b:Dom(1). forall c:Dom(1)[(a, b) # c]. Unit"),
                   T("forall a:Dom(1). forall b:Dom(1). forall c:Dom(1)[a # c, b # c]. Unit")));
  EXPECT_TRUE(conv(T("forall c:Dom(1)[{} # c]. Unit"), T("forall c:Dom(1). Unit")));
}

TEST(Conv, DualInvolutionOnRandomSessions) {
  oracle::Rng rng(33);
  for (int i = 0; i < 1000; ++i) {
    auto s = oracle::random_session(rng, 3);
    ASSERT_TRUE(conv(ty::dual(ty::dual(s)), s)) << pretty(s);
  }
}

TEST(Conv, AgreesWithRewriteSearch) {
  oracle::Rng rng(34);
  int positive = 0;
  for (int i = 0; i < 500; ++i) {
    auto [a, b] = oracle::random_conv_pair(rng);
    bool c = conv(a, b);
    ASSERT_EQ(c, oracle::conv_search(a, b, 6)) << pretty(a) << " vs " << pretty(b);
    positive += c;
  }
  EXPECT_GT(positive, 100);
  EXPECT_LT(positive, 400);
}

TEST(Conv, SymmetricAndReflexive) {
  oracle::Rng rng(35);
  for (int i = 0; i < 300; ++i) {
    auto [a, b] = oracle::random_conv_pair(rng);
    ASSERT_TRUE(conv(a, a));
    ASSERT_EQ(conv(a, b), conv(b, a));
  }
}
