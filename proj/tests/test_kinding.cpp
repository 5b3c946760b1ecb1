#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pvgr/kinding.hpp"
#include "pvgr/normalize.hpp"
#include "support.hpp"

using namespace pvgr;
using namespace pvgr::test;

namespace {

Binding dom1(const char* n) { return Binding::type_var(I(n), kd::dom(ty::shape_one())); }

std::string rule_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const KindError& e) {
    return e.rule;
  }
  return "";
}

}  // namespace

TEST(CheckCtx, Empty) { EXPECT_NO_THROW(check_ctx({})); }

TEST(CheckCtx, DomainsThenConstraint) {
  Ctx g{dom1("a"), dom1("b"), Binding::disjoint(ty::var(I("a")), ty::var(I("b")))};
  EXPECT_NO_THROW(check_ctx(g));
}

TEST(CheckCtx, UnboundInConstraint) {
  Ctx g{Binding::disjoint(ty::var(I("a")), ty::var(I("b")))};
  EXPECT_THROW(check_ctx(g), KindError);
}

TEST(CheckCtx, ConstraintMustMentionDomains) {
  Ctx g{Binding::type_var(I("s"), kd::session()), dom1("a"), Binding::disjoint(ty::var(I("s")), ty::var(I("a")))};
  EXPECT_THROW(check_ctx(g), KindError);
}

TEST(CheckKind, Examples) {
  EXPECT_NO_THROW(check_kind({}, kd::type()));
  EXPECT_NO_THROW(check_kind({}, kd::dom(ty::shape_one())));
  EXPECT_THROW(check_kind({}, kd::dom(ty::var(I("n")))), KindError);
  EXPECT_NO_THROW(check_kind({Binding::type_var(I("n"), kd::shape())}, kd::dom(ty::var(I("n")))));
}

TEST(InferKind, Examples) {
  EXPECT_EQ(infer_kind({}, ty::shape_one())->tag, KindTag::Shape);
  EXPECT_EQ(infer_kind({dom1("a")}, T("Chan a"))->tag, KindTag::Type);
  auto gsend = T(
      "forall n:Shape. forall a:Dom(n). forall F:Dom(n) -> State. forall T:Dom(n) -> Type. forall w:Dom(1)[a # w]. "
      "forall s:Session. [.; T a -> .; [F a, {w: !{b:Dom(n)}(F b; T b).s}; Chan w -> {w: s}; Unit]]");
  EXPECT_EQ(infer_kind({}, gsend)->tag, KindTag::Type);
}

TEST(InferKind, ChannelNeedsSingleChannelDomain) {
  Ctx g{Binding::type_var(I("p"), kd::dom(ty::shape_pair(ty::shape_one(), ty::shape_one())))};
  EXPECT_EQ(rule_of([&] { infer_kind(g, T("Chan p")); }), "K-Chan");
  EXPECT_NO_THROW(infer_kind(g, T("Chan pi1 p")));
}

TEST(InferKind, ProjectionNeedsPairShape) {
  EXPECT_EQ(rule_of([&] { infer_kind({dom1("a")}, T("pi1 a")); }), "K-DomProj");
}

TEST(InferKind, MergedStatesMustBeDisjoint) {
  Ctx g{dom1("a"), dom1("b")};
  EXPECT_EQ(rule_of([&] { infer_kind(g, T("{a: End, b: End}")); }), "K-StMerge");
  g.push_back(Binding::disjoint(ty::var(I("a")), ty::var(I("b"))));
  EXPECT_EQ(infer_kind(g, T("{a: End, b: End}"))->tag, KindTag::State);
}

TEST(InferKind, PayloadSeesOnlyItsOwnDomain) {
  Ctx g{dom1("a")};
  EXPECT_THROW(infer_kind(g, T("!{x:Dom(1)}(.; Chan a).End")), KindError);
  EXPECT_NO_THROW(infer_kind(g, T("!{x:Dom(1)}({x: End}; Chan x).End")));
}

TEST(InferKind, ArrowExistentialIsDomainOnly) {
  EXPECT_NO_THROW(infer_kind({}, T("[.; Unit -> ex c:Dom(1). {c: End}; Chan c]")));
  EXPECT_THROW(infer_kind({}, T("[.; Unit -> ex s:Session. .; Unit]")), KindError);
}

TEST(InferKind, LambdaAppliesToMatchingShape) {
  Ctx g{dom1("a"), Binding::type_var(I("z"), kd::dom(ty::shape_zero()))};
  EXPECT_EQ(infer_kind(g, T("(\\d:1. Chan d) a"))->tag, KindTag::Type);
  EXPECT_EQ(rule_of([&] { infer_kind(g, T("(\\d:1. Chan d) z")); }), "K-App");
}

TEST(InferKind, ErrorTrailEndsAtFailingRule) {
  try {
    infer_kind({}, T("forall s:Session. (Unit * Chan s)"));
    FAIL();
  } catch (const KindError& e) {
    ASSERT_FALSE(e.trail.empty());
    EXPECT_EQ(e.trail.back(), e.rule);
    EXPECT_EQ(e.trail.front(), "K-All");
  }
}

TEST(Restrict, Examples) {
  Ctx g{Binding::val_var(I("x"), ty::unit()), dom1("a"), Binding::type_var(I("s"), kd::session())};
  auto nd = restrict_non_dom(g);
  ASSERT_EQ(nd.size(), 1u);
  EXPECT_EQ(nd[0].id, I("s"));
  auto od = restrict_only_dom(g);
  ASSERT_EQ(od.size(), 1u);
  EXPECT_EQ(od[0].id, I("a"));
  EXPECT_TRUE(restrict_non_dom({}).empty());
  EXPECT_TRUE(restrict_only_dom({}).empty());
}

TEST(Restrict, KeepsTypeFunctionsAndShapes) {
  Ctx g{Binding::type_var(I("n"), kd::shape()),
        Binding::type_var(I("F"), kd::arrow(kd::dom(ty::shape_one()), kd::state())),
        Binding::type_var(I("t"), kd::type()), Binding::type_var(I("S"), kd::state())};
  auto nd = restrict_non_dom(g);
  ASSERT_EQ(nd.size(), 2u);
  EXPECT_EQ(nd[0].id, I("n"));
  EXPECT_EQ(nd[1].id, I("F"));
}

TEST(DisjointAppend, Examples) {
  EXPECT_TRUE(disjoint_append({}, {}).empty());

  auto g = disjoint_append({dom1("a")}, {dom1("b")});
  ASSERT_EQ(g.size(), 3u);
  EXPECT_EQ(g[2].tag, BindingTag::Disjoint);
  EXPECT_TRUE(same(g[2].lhs, ty::var(I("a"))));
  EXPECT_TRUE(same(g[2].rhs, ty::var(I("b"))));

  auto h = disjoint_append({Binding::val_var(I("x"), ty::unit())}, {dom1("b"), dom1("c")});
  int cstr = 0;
  for (const auto& b : h) cstr += b.tag == BindingTag::Disjoint;
  EXPECT_EQ(cstr, 1);
}

TEST(DisjointAppend, FormationAgrees) {
  Ctx g1{dom1("a"), Binding::type_var(I("s"), kd::session())};
  Ctx g2{dom1("b"), dom1("c")};
  Ctx cat = g1;
  cat.insert(cat.end(), g2.begin(), g2.end());
  EXPECT_NO_THROW(check_ctx(cat));
  EXPECT_NO_THROW(check_ctx(disjoint_append(g1, g2)));
}

TEST(KindProperties, OutputsAreWellFormedAndStable) {
  oracle::Rng rng(21);
  int checked = 0;
  for (int i = 0; i < 500; ++i) {
    auto t = oracle::random_closed_type(rng, 3);
    KindP k;
    try {
      k = infer_kind({}, t);
    } catch (const KindError&) {
      continue;
    }
    ++checked;
    ASSERT_NO_THROW(check_kind({}, k)) << pretty(t);
    // deterministic
    ASSERT_TRUE(conv_kind(k, infer_kind({}, t)));
    // normalization preserves kinds
    ASSERT_TRUE(conv_kind(k, infer_kind({}, normalize(t)))) << pretty(t);
    // weakening by an unrelated binding
    Ctx g{Binding::type_var(fresh_ident("extra"), kd::session()), dom1("unused")};
    ASSERT_TRUE(conv_kind(k, infer_kind(g, t))) << pretty(t);
  }
  EXPECT_GT(checked, 50);
}
