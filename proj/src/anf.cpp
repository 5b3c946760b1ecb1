#include "pvgr/parser.hpp"

namespace pvgr {

namespace {

ExprP spine(const ExprP& e);
ExprP header(const ExprP& e);

ValueP value(const ValueP& v) {
  return std::visit(
      overloaded{
          [&](const val::Pair& p) { return mk_value(val::Pair{value(p.fst), value(p.snd)}, v->span); },
          [&](const val::Abs& a) {
            return mk_value(val::Abs{a.pre, a.param, a.param_ty, spine(a.body)}, v->span);
          },
          [&](const val::TAbs& a) { return mk_value(val::TAbs{a.binder, a.kind, a.cstr, value(a.body)}, v->span); },
          [&](const auto&) { return v; },
      },
      v->node);
}

ExprP header(const ExprP& e) {
  auto rebuild = [&](auto node) { return mk_expr(std::move(node), e->span); };
  return std::visit(
      overloaded{
          [&](const ex::Val& x) { return rebuild(ex::Val{value(x.v)}); },
          [&](const ex::Let&) { return spine(e); },  // unreachable from spine
          [&](const ex::App& a) { return rebuild(ex::App{value(a.fn), value(a.arg)}); },
          [&](const ex::Proj& p) { return rebuild(ex::Proj{p.l, value(p.v)}); },
          [&](const ex::TApp& a) { return rebuild(ex::TApp{value(a.fn), a.arg}); },
          [&](const ex::Fork& f) { return rebuild(ex::Fork{value(f.v)}); },
          [&](const ex::New&) { return e; },
          [&](const ex::Accept& a) { return rebuild(ex::Accept{value(a.v)}); },
          [&](const ex::Request& r) { return rebuild(ex::Request{value(r.v)}); },
          [&](const ex::Send& s) { return rebuild(ex::Send{value(s.payload), value(s.chan)}); },
          [&](const ex::Recv& r) { return rebuild(ex::Recv{value(r.chan)}); },
          [&](const ex::Select& s) { return rebuild(ex::Select{s.l, value(s.chan)}); },
          [&](const ex::Case& c) { return rebuild(ex::Case{value(c.chan), spine(c.left), spine(c.right)}); },
          [&](const ex::Close& c) { return rebuild(ex::Close{value(c.chan)}); },
      },
      e->node);
}

ExprP spine(const ExprP& e) {
  if (auto l = std::get_if<ex::Let>(&e->node)) {
    // let x = (let y = e1 in e2) in e3  ~>  let y = e1 in let x = e2 in e3
    if (auto inner = std::get_if<ex::Let>(&l->bound->node)) {
      auto rest = mk_expr(ex::Let{l->x, inner->body, l->body}, e->span);
      return spine(mk_expr(ex::Let{inner->x, inner->bound, rest}, e->span));
    }
    return mk_expr(ex::Let{l->x, header(l->bound), spine(l->body)}, e->span);
  }
  if (auto v = std::get_if<ex::Val>(&e->node)) return mk_expr(ex::Val{value(v->v)}, e->span);
  Ident r = fresh_ident("r");
  return mk_expr(ex::Let{r, header(e), mk_expr(ex::Val{vl::var(r)}, e->span)}, e->span);
}

bool value_ok(const ValueP& v);
bool spine_ok(const ExprP& e);

bool header_ok(const ExprP& e) {
  return std::visit(
      overloaded{
          [&](const ex::Val& x) { return value_ok(x.v); },
          [&](const ex::Let&) { return false; },
          [&](const ex::App& a) { return value_ok(a.fn) && value_ok(a.arg); },
          [&](const ex::Proj& p) { return value_ok(p.v); },
          [&](const ex::TApp& a) { return value_ok(a.fn); },
          [&](const ex::Fork& f) { return value_ok(f.v); },
          [&](const ex::New&) { return true; },
          [&](const ex::Accept& a) { return value_ok(a.v); },
          [&](const ex::Request& r) { return value_ok(r.v); },
          [&](const ex::Send& s) { return value_ok(s.payload) && value_ok(s.chan); },
          [&](const ex::Recv& r) { return value_ok(r.chan); },
          [&](const ex::Select& s) { return value_ok(s.chan); },
          [&](const ex::Case& c) { return value_ok(c.chan) && spine_ok(c.left) && spine_ok(c.right); },
          [&](const ex::Close& c) { return value_ok(c.chan); },
      },
      e->node);
}

bool value_ok(const ValueP& v) {
  return std::visit(overloaded{
                        [&](const val::Pair& p) { return value_ok(p.fst) && value_ok(p.snd); },
                        [&](const val::Abs& a) { return spine_ok(a.body); },
                        [&](const val::TAbs& a) { return value_ok(a.body); },
                        [&](const auto&) { return true; },
                    },
                    v->node);
}

bool spine_ok(const ExprP& e) {
  if (auto l = std::get_if<ex::Let>(&e->node)) return header_ok(l->bound) && spine_ok(l->body);
  if (auto v = std::get_if<ex::Val>(&e->node)) return value_ok(v->v);
  return false;
}

}  // namespace

ExprP anf_transform(const ExprP& e) { return spine(e); }
ValueP anf_transform(const ValueP& v) { return value(v); }

ConfigP anf_transform(const ConfigP& c) {
  return std::visit(overloaded{
                        [&](const cfg::Proc& p) { return mk_config(cfg::Proc{spine(p.e)}, c->span); },
                        [&](const cfg::Par& p) {
                          return mk_config(cfg::Par{anf_transform(p.left), anf_transform(p.right)}, c->span);
                        },
                        [&](const cfg::NuChan& n) {
                          return mk_config(cfg::NuChan{n.end1, n.end2, n.ses, n.closed, anf_transform(n.body)},
                                           c->span);
                        },
                        [&](const cfg::NuAccess& n) {
                          return mk_config(cfg::NuAccess{n.x, n.ses, anf_transform(n.body)}, c->span);
                        },
                    },
                    c->node);
}

bool is_strict_anf(const ExprP& e) { return spine_ok(e); }

bool is_strict_anf(const ConfigP& c) {
  return std::visit(overloaded{
                        [&](const cfg::Proc& p) { return spine_ok(p.e); },
                        [&](const cfg::Par& p) { return is_strict_anf(p.left) && is_strict_anf(p.right); },
                        [&](const cfg::NuChan& n) { return is_strict_anf(n.body); },
                        [&](const cfg::NuAccess& n) { return is_strict_anf(n.body); },
                    },
                    c->node);
}

}  // namespace pvgr
