#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pvgr/runtime.hpp"
#include "support.hpp"

using namespace pvgr;
using namespace pvgr::test;

TEST(Parse, Unit) {
  auto p = parse_program("()");
  ASSERT_TRUE(p.is_expression());
  EXPECT_TRUE(same(p.expression(), xp::val(vl::unit())));
}

TEST(Parse, LetFork) {
  auto e = E("let x = fork (\\[.](y:Unit).y) in x");
  auto let = get_if<ex::Let>(e);
  ASSERT_NE(let, nullptr);
  auto fork = get_if<ex::Fork>(let->bound);
  ASSERT_NE(fork, nullptr);
  auto abs = std::get_if<val::Abs>(&fork->v->node);
  ASSERT_NE(abs, nullptr);
  EXPECT_EQ(abs->pre->tag, TypeTag::StEmpty);
  EXPECT_EQ(abs->param_ty->tag, TypeTag::Unit);
  auto body = get_if<ex::Val>(abs->body);
  ASSERT_NE(body, nullptr);
  EXPECT_EQ(std::get<val::Var>(body->v->node).id, abs->param);
  EXPECT_EQ(std::get<val::Var>(get_if<ex::Val>(let->body)->v->node).id, let->x);
}

TEST(Parse, SendSessionWithIntAlias) {
  auto t = T("!{a:Dom(0)}(.;Int).s");
  ASSERT_EQ(t->tag, TypeTag::Send);
  EXPECT_EQ(t->shape()->tag, TypeTag::ShapeZero);
  EXPECT_EQ(t->state()->tag, TypeTag::StEmpty);
  EXPECT_EQ(t->payload()->tag, TypeTag::Unit);
  EXPECT_TRUE(same(t->cont(), ty::var(I("s"))));
  EXPECT_EQ(t->id.name, "a");
}

TEST(Parse, Types) {
  EXPECT_TRUE(same(T("End"), ty::end()));
  EXPECT_TRUE(same(T("dual End"), ty::dual(ty::end())));
  EXPECT_TRUE(same(T("{a: End, b: dual End}"),
                   ty::st_merge(ty::st_bind(ty::var(I("a")), ty::end()),
                                ty::st_bind(ty::var(I("b")), ty::dual(ty::end())))));
}

TEST(Parse, CategoryDisambiguation) {
  // (1*1) under Dom is a shape, (a, b) under Chan-free context a merge.
  auto k = parse_kind("Dom((1*1))");
  EXPECT_EQ(k->shape->tag, TypeTag::ShapePair);
  EXPECT_EQ(T("(Unit * Unit)")->tag, TypeTag::Pair);
  EXPECT_EQ(T("(a, b)")->tag, TypeTag::DomMerge);
  EXPECT_EQ(T("forall S:State. forall R:State. [S, R; Unit -> .; Unit]")->body()->body()->pre()->tag, TypeTag::StMerge);
}

TEST(Parse, ApplicationChainsAreLetSequenced) {
  auto e = E("f [a] x");
  auto let = get_if<ex::Let>(e);
  ASSERT_NE(let, nullptr);
  EXPECT_NE(get_if<ex::TApp>(let->bound), nullptr);
  EXPECT_NE(get_if<ex::App>(let->body), nullptr);
}

TEST(Parse, ErrorCarriesSpanAndExpectedSet) {
  try {
    parse_program("let x = in x", "t.pvgr");
    FAIL() << "no error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.span.line, 1);
    EXPECT_EQ(e.span.column, 9);
    EXPECT_FALSE(e.expected.empty());
  }
}

TEST(Parse, EmptyInputIsAnError) { EXPECT_THROW(parse_program(""), ParseError); }

TEST(Parse, CommentsAndSpans) {
  auto p = parse_program("-- comment\n  ()\n", "f.pvgr");
  EXPECT_EQ(p.config->span.line, 2);
  EXPECT_EQ(p.config->span.column, 3);
  EXPECT_LE(p.config->span.begin, p.config->span.end);
}

TEST(Parse, UniqueBinders) {
  auto e = E("let x = () in let x = x in x");
  auto outer = get_if<ex::Let>(e);
  auto inner = get_if<ex::Let>(outer->body);
  EXPECT_NE(outer->x, inner->x);
  EXPECT_EQ(std::get<val::Var>(get_if<ex::Val>(inner->bound)->v->node).id, outer->x);
}

TEST(Pretty, Basics) {
  EXPECT_EQ(pretty(ty::end()), "End");
  EXPECT_EQ(pretty(parse_program("()").config), "()");
}

TEST(Pretty, Deterministic) {
  auto t = T("forall s:Session. [.; AP(s) -> ex c:Dom(1). {c: s}; Chan c]");
  EXPECT_EQ(pretty(t), pretty(t));
}

TEST(Pretty, ParallelUnderBinderIsBraced) {
  auto a = fresh_ident("a"), b = fresh_ident("b");
  auto nu = mk_config(cfg::NuChan{a, b, ty::end(), false, mk_config(cfg::Proc{xp::val(vl::unit())})});
  auto par = mk_config(cfg::Par{mk_config(cfg::Par{mk_config(cfg::Proc{xp::val(vl::unit())}), nu}),
                                mk_config(cfg::Proc{xp::val(vl::unit())})});
  EXPECT_TRUE(alpha(par, parse_program(pretty(par)).config));
}

TEST(RoundTrip, RandomTypes) {
  oracle::Rng rng(11);
  for (int i = 0; i < 300; ++i) {
    auto t = oracle::random_closed_type(rng, 4);
    ASSERT_TRUE(alpha(t, parse_type(pretty(t)))) << pretty(t);
  }
}

TEST(RoundTrip, RandomExpressions) {
  oracle::Rng rng(12);
  for (int i = 0; i < 300; ++i) {
    auto e = oracle::random_closed_expr(rng, 4);
    ASSERT_TRUE(alpha(e, parse_expr(pretty(e)))) << pretty(e);
  }
}

TEST(RoundTrip, RandomConfigurations) {
  oracle::Rng rng(13);
  for (int i = 0; i < 300; ++i) {
    auto c = oracle::random_closed_config(rng, 3);
    ASSERT_TRUE(alpha(c, parse_program(pretty(c)).config)) << pretty(c);
  }
}

TEST(Anf, FlattensNestedLet) {
  auto e = anf_transform(E("let x = (let y = () in y) in x"));
  EXPECT_TRUE(alpha(e, E("let y = () in let x = y in x")));
}

TEST(Anf, ValueUnchanged) {
  auto e = E("()");
  EXPECT_TRUE(alpha(anf_transform(e), e));
}

TEST(Anf, HeadersAreNamed) {
  auto e = anf_transform(E("send () (chan a)"));
  EXPECT_TRUE(is_strict_anf(e));
  EXPECT_FALSE(is_strict_anf(E("send () (chan a)")));
  auto let = get_if<ex::Let>(e);
  ASSERT_NE(let, nullptr);
  EXPECT_NE(get_if<ex::Send>(let->bound), nullptr);
}

TEST(Anf, CaseBranchesAndBodies) {
  auto e = anf_transform(E("\\[.](x:Unit). case x {close x; let y = recv x in close x}"));
  EXPECT_TRUE(is_strict_anf(e));
}

TEST(Anf, IdempotentAndStrictOnRandomExpressions) {
  oracle::Rng rng(14);
  for (int i = 0; i < 300; ++i) {
    auto e = anf_transform(oracle::random_closed_expr(rng, 4));
    ASSERT_TRUE(is_strict_anf(e)) << pretty(e);
    ASSERT_TRUE(alpha(e, anf_transform(e))) << pretty(e);
  }
}

TEST(Anf, PreservesEvaluationOrder) {
  // the send must still precede the receive after flattening
  auto e = anf_transform(E("let x = (let y = send () (chan a) in recv (chan b)) in close (chan a)"));
  auto l1 = get_if<ex::Let>(e);
  ASSERT_NE(l1, nullptr);
  EXPECT_NE(get_if<ex::Send>(l1->bound), nullptr);
  auto l2 = get_if<ex::Let>(l1->body);
  ASSERT_NE(l2, nullptr);
  EXPECT_NE(get_if<ex::Recv>(l2->bound), nullptr);
}

TEST(Anf, CorpusIdempotent) {
  for (const auto& entry : std::filesystem::directory_iterator(PVGR_CORPUS_DIR)) {
    if (entry.path().extension() != ".pvgr") continue;
    auto p = parse_program(slurp(entry.path().string()));
    auto a = anf_transform(p.config);
    EXPECT_TRUE(is_strict_anf(a)) << entry.path();
    EXPECT_TRUE(alpha(a, anf_transform(a))) << entry.path();
    EXPECT_TRUE(alpha(p.config, parse_program(pretty(p.config)).config)) << entry.path();
  }
}
