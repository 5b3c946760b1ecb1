#include <gtest/gtest.h>

#include "pvgr/cli.hpp"
#include "pvgr/kinding.hpp"
#include "pvgr/normalize.hpp"
#include "pvgr/typing.hpp"
#include "support.hpp"

using namespace pvgr;
using namespace pvgr::test;

namespace {

Binding dom1(const char* n) { return Binding::type_var(I(n), kd::dom(ty::shape_one())); }
Binding ses(const char* n) { return Binding::type_var(I(n), kd::session()); }

std::string rule_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const TypeError& e) {
    return e.rule;
  }
  return "";
}

ExprTyping typed(const Ctx& g, const char* state, const char* src) {
  return type_expr(g, T(state), anf_transform(E(src)));
}

}  // namespace

TEST(TypeValue, Unit) { EXPECT_TRUE(same(type_value({}, vl::unit()), ty::unit())); }

TEST(TypeValue, Channel) {
  EXPECT_TRUE(same(type_value({dom1("a")}, vl::chan(ty::var(I("a")))), T("Chan a")));
  Ctx g{Binding::type_var(I("p"), kd::dom(ty::shape_pair(ty::shape_one(), ty::shape_one())))};
  EXPECT_THROW(type_value(g, vl::chan(ty::var(I("p")))), std::exception);
}

TEST(TypeValue, Server) {
  auto r = check_file(corpus("server.pvgr"));
  ASSERT_EQ(r.exit, 0);
  EXPECT_TRUE(conv(r.typing->type, T("forall s:Session. forall u:Dom(1). [{u: ?{x:Dom(0)}(.; Int).?{y:Dom(0)}(.; "
                                     "Int).!{z:Dom(0)}(.; Int).s}; Chan u -> {u: s}; Unit]")));
}

TEST(TypeValue, UnboundVariable) { EXPECT_EQ(rule_of([] { type_value({}, vl::var(I("x"))); }), "T-Var"); }

TEST(TypeExpr, ValueThreadsState) {
  auto r = type_expr({}, ty::st_empty(), xp::val(vl::unit()));
  EXPECT_TRUE(r.ex.empty());
  EXPECT_TRUE(state_atoms(normalize(r.post)).empty());
  EXPECT_TRUE(same(r.type, ty::unit()));

  Ctx g{dom1("a")};
  auto s = type_expr(g, T("{a: End}"), xp::val(vl::unit()));
  EXPECT_TRUE(conv(s.post, T("{a: End}")));
}

TEST(TypeExpr, CapturedServerBody) {
  Ctx g{dom1("u"), ses("s")};
  auto r = typed(g, "{u: ?{x:Dom(0)}(.; Int).?{y:Dom(0)}(.; Int).!{z:Dom(0)}(.; Int).s}",
                 "let x = recv (chan u) in let y = recv (chan u) in send () (chan u)");
  EXPECT_TRUE(r.ex.empty());
  EXPECT_TRUE(conv(r.post, T("{u: s}")));
  EXPECT_TRUE(same(r.type, ty::unit()));
}

TEST(TypeExpr, AcceptOpensPackage) {
  Ctx g{ses("s"), Binding::val_var(I("x"), T("AP(s)"))};
  auto r = typed(g, ".", "accept x");
  ASSERT_EQ(r.ex.size(), 1u);
  EXPECT_EQ(r.ex[0].tag, BindingTag::TypeVar);
  auto c = r.ex[0].id;
  EXPECT_TRUE(conv(r.post, ty::st_bind(ty::var(c), T("s"))));
  EXPECT_TRUE(same(r.type, ty::chan(ty::var(c))));
}

TEST(TypeExpr, RequestGetsDual) {
  Ctx g{Binding::val_var(I("x"), T("AP(!{a:Dom(0)}(.; Unit).End)"))};
  auto r = typed(g, ".", "request x");
  ASSERT_EQ(r.ex.size(), 1u);
  EXPECT_TRUE(conv(r.post, ty::st_bind(ty::var(r.ex[0].id), T("?{a:Dom(0)}(.; Unit).End"))));
}

TEST(TypeExpr, SendMissingChannel) {
  Ctx g{dom1("a")};
  EXPECT_EQ(rule_of([&] { typed(g, ".", "send () (chan a)"); }), "T-Send");
}

TEST(TypeExpr, SessionMismatch) {
  Ctx g{dom1("a")};
  EXPECT_THROW(typed(g, "{a: End}", "recv (chan a)"), TypeError);
}

TEST(TypeExpr, ChannelUsedTwiceAfterClose) {
  Ctx g{dom1("a")};
  EXPECT_THROW(typed(g, "{a: End}", "let x = close (chan a) in close (chan a)"), TypeError);
}

TEST(TypeExpr, CaseBranchesMustAgree) {
  Ctx g{dom1("a")};
  EXPECT_NO_THROW(typed(g, "{a: End +b End}", "case (chan a) {close (chan a); close (chan a)}"));
  EXPECT_THROW(typed(g, "{a: End +b (?{x:Dom(0)}(.; Unit).End)}", "case (chan a) {close (chan a); ()}"), TypeError);
}

TEST(TypeExpr, AliasedSendSendRejected) {
  auto r = check_file(corpus("sendsend_aliased.pvgr"));
  ASSERT_EQ(r.exit, 1);
  EXPECT_EQ(r.diagnostics.at(0).code, "T-TApp");
  EXPECT_NE(r.diagnostics.at(0).message.find("entail"), std::string::npos);
}

TEST(TypeExpr, FrameLeavesUnusedBindingAlone) {
  Ctx g{dom1("a"), dom1("b"), Binding::disjoint(T("a"), T("b"))};
  auto small = typed(g, "{a: !{x:Dom(0)}(.; Unit).End}", "send () (chan a)");
  auto big = typed(g, "{a: !{x:Dom(0)}(.; Unit).End, b: End}", "send () (chan a)");
  EXPECT_TRUE(conv(small.post, T("{a: End}")));
  EXPECT_TRUE(conv(big.post, T("{a: End, b: End}")));
  EXPECT_TRUE(conv(small.type, big.type));
}

TEST(TypeExpr, OutputsAreWellFormed) {
  for (const char* f : {"acc.pvgr", "server.pvgr", "gsend.pvgr", "send2.pvgr", "unit.pvgr"}) {
    auto r = check_file(corpus(f));
    ASSERT_EQ(r.exit, 0) << f;
    auto g = disjoint_append({}, r.typing->ex);
    EXPECT_NO_THROW(check_ctx(g)) << f;
    EXPECT_EQ(infer_kind(g, r.typing->post)->tag, KindTag::State) << f;
    EXPECT_EQ(infer_kind(g, r.typing->type)->tag, KindTag::Type) << f;
  }
}

TEST(MatchExistential, NothingToBind) {
  Ctx bound{Binding::type_var(fresh_ident("a"), kd::dom(ty::shape_zero()))};
  auto m = match_existential({}, bound, ty::st_empty(), ty::unit(), ty::st_empty(), ty::unit());
  EXPECT_TRUE(state_atoms(normalize(m.leftover)).empty());
}

TEST(MatchExistential, SingleChannel) {
  auto a = fresh_ident("a");
  Ctx g{dom1("d"), ses("s")};
  Ctx bound{Binding::type_var(a, kd::dom(ty::shape_one()))};
  auto m = match_existential(g, bound, ty::st_bind(ty::var(a), T("s")), ty::chan(ty::var(a)), T("{d: s}"),
                             T("Chan d"));
  ASSERT_EQ(m.rho.map.count(a), 1u);
  EXPECT_TRUE(same(normalize(m.rho.map.at(a)), T("d")));
}

TEST(MatchExistential, HeadMismatch) {
  auto a = fresh_ident("a");
  Ctx bound{Binding::type_var(a, kd::dom(ty::shape_one()))};
  EXPECT_THROW(match_existential({}, bound, ty::st_empty(), ty::chan(ty::var(a)), ty::st_empty(), ty::unit()),
               TypeError);
}

TEST(MatchExistential, PairOfChannels) {
  auto c = fresh_ident("c");
  Ctx g{dom1("a"), dom1("b"), Binding::disjoint(T("a"), T("b"))};
  Ctx bound{Binding::type_var(c, kd::dom(ty::shape_pair(ty::shape_one(), ty::shape_one())))};
  auto cv = ty::var(c);
  auto pat_st = ty::st_merge(ty::st_bind(ty::dom_proj(Label::One, cv), ty::end()),
                             ty::st_bind(ty::dom_proj(Label::Two, cv), ty::end()));
  auto pat_ty = ty::pair(ty::chan(ty::dom_proj(Label::One, cv)), ty::chan(ty::dom_proj(Label::Two, cv)));
  auto m = match_existential(g, bound, pat_st, pat_ty, T("{a: End, b: End}"), T("(Chan a * Chan b)"));
  EXPECT_TRUE(same(normalize(m.rho.map.at(c)), T("(a, b)")));
}

TEST(TypeConfig, Examples) {
  EXPECT_NO_THROW(check_program(mk_config(cfg::Proc{xp::val(vl::unit())})));
  auto x = fresh_ident("x");
  EXPECT_NO_THROW(
      check_program(mk_config(cfg::NuAccess{x, ty::end(), mk_config(cfg::Proc{xp::val(vl::var(x))})})));
  EXPECT_NO_THROW(check_program(parse_program("nu (a, b): closed. () | ()").config));
}

TEST(TypeConfig, OpenSessionMustBeUsed) {
  EXPECT_THROW(check_program(parse_program("nu (a, b): !{x:Dom(0)}(.; Unit).End. () | ()").config), TypeError);
}

TEST(TypeConfig, BothEndsThreaded) {
  auto p = anf_transform(parse_program(
                             "nu (a, b): !{x:Dom(0)}(.; Unit).End.\n"
                             "  let r = send () (chan a) in close (chan a)\n"
                             "| let y = recv (chan b) in close (chan b)")
                             .config);
  EXPECT_NO_THROW(check_program(p));
}

TEST(TypeConfig, EndCannotBeOwnedTwice) {
  auto p = anf_transform(parse_program("nu (a, b): End. close (chan a) | close (chan a)").config);
  EXPECT_THROW(check_program(p), TypeError);
}

TEST(TypeConfig, WholeCorpusAsExpected) {
  for (const auto& entry : std::filesystem::directory_iterator(PVGR_CORPUS_DIR)) {
    if (entry.path().extension() != ".pvgr") continue;
    auto side = slurp(entry.path().string() + ".expected");
    auto r = check_file(entry.path().string());
    if (side.rfind("error:", 0) == 0)
      EXPECT_EQ(r.exit, 1) << entry.path();
    else
      EXPECT_EQ(r.exit, 0) << entry.path();
  }
}
