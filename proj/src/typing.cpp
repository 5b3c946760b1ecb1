#include "pvgr/typing.hpp"

#include <algorithm>

#include "pvgr/constraints.hpp"
#include "pvgr/kinding.hpp"
#include "pvgr/normalize.hpp"
#include "pvgr/parser.hpp"

namespace pvgr {

TypeError::TypeError(std::string rule_, std::string message_, SourceSpan span_)
    : std::runtime_error(rule_ + ": " + message_),
      rule(std::move(rule_)),
      message(std::move(message_)),
      span(std::move(span_)) {}

namespace {

using Atoms = std::vector<TypeP>;

Atoms atoms_of(const TypeP& st) { return state_atoms(normalize(st)); }

// Removes one conv-equal occurrence of each atom of `want` from `have`.
std::optional<Atoms> take_atoms(Atoms have, const Atoms& want) {
  for (const auto& w : want) {
    auto it = std::find_if(have.begin(), have.end(), [&](const TypeP& h) { return conv_normal(h, w); });
    if (it == have.end()) return std::nullopt;
    have.erase(it);
  }
  return have;
}

bool binds(const Ctx& g, const Ident& id) {
  for (const auto& b : g)
    if (b.tag != BindingTag::Disjoint && b.id == id) return true;
  return false;
}

// Gives the type variables of `ex` fresh names, renaming `targets` to match.
Ctx freshen(const Ctx& ex, std::vector<TypeP*> targets) {
  Subst s;
  Ctx out;
  for (const auto& b : ex) {
    switch (b.tag) {
      case BindingTag::TypeVar: {
        Ident n = fresh_ident(b.id.name);
        out.push_back(Binding::type_var(n, subst(s, b.kind)));
        s.types[b.id] = ty::var(n);
        break;
      }
      case BindingTag::Disjoint:
        out.push_back(Binding::disjoint(subst(s, b.lhs), subst(s, b.rhs)));
        break;
      case BindingTag::ValVar:
        out.push_back(Binding::val_var(b.id, subst(s, b.type)));
        break;
    }
  }
  for (auto* t : targets) *t = normalize(subst(s, *t));
  return out;
}

// Drops existential domains nothing refers to, with their constraints.
Ctx prune(const Ctx& ex, const TypeP& post, const TypeP& type) {
  IdentSet dead;
  for (const auto& b : ex)
    if (b.tag == BindingTag::TypeVar && !occurs_free(b.id, post) && !occurs_free(b.id, type)) dead.insert(b.id);
  if (dead.empty()) return ex;
  auto alive = [&](const TypeP& t) {
    for (const auto& v : free_vars(t))
      if (dead.contains(v)) return false;
    return true;
  };
  Ctx out;
  for (const auto& b : ex) {
    if (b.tag == BindingTag::TypeVar && dead.contains(b.id)) continue;
    if (b.tag == BindingTag::Disjoint && (!alive(b.lhs) || !alive(b.rhs))) continue;
    out.push_back(b);
  }
  return out;
}

// pi_... pi_ var, as a path.
std::optional<DomPath> as_path(const TypeP& d) {
  if (d->tag == TypeTag::Var) return DomPath{d->id, {}};
  if (d->tag == TypeTag::DomProj) {
    auto inner = as_path(d->dom());
    if (!inner) return std::nullopt;
    inner->projs.push_back(d->label);
    return inner;
  }
  return std::nullopt;
}

// ------------------------------------------------------------ matching

using Assignment = std::map<DomPath, TypeP>;

class Matcher {
 public:
  explicit Matcher(IdentSet bound) : bound_(std::move(bound)) {}

  static constexpr std::size_t kMaxCandidates = 64;

  std::vector<Assignment> unify(const TypeP& p, const TypeP& a, Assignment asg) {
    if (!mentions_bound(p)) {
      if (conv_normal(p, a)) return {std::move(asg)};
      return {};
    }
    if (auto path = as_path(p); path && bound_.contains(path->var)) {
      auto it = asg.find(*path);
      if (it != asg.end()) {
        if (conv_normal(it->second, a)) return {std::move(asg)};
        return {};
      }
      asg[*path] = a;
      return {std::move(asg)};
    }
    if (p->tag != a->tag || p->label != a->label) return {};
    switch (p->tag) {
      case TypeTag::StMerge:
      case TypeTag::StEmpty:
        return unify_state(state_atoms(p), state_atoms(a), std::move(asg), false).first;
      case TypeTag::All: {
        if (!conv_kind(p->kind, a->kind) || p->cstr.size() != a->cstr.size()) return {};
        Subst s;
        s.types[a->id] = ty::var(p->id);
        Constraints ac = subst(s, a->cstr);
        std::vector<Assignment> cur{std::move(asg)};
        for (std::size_t i = 0; i < ac.size(); ++i) {
          cur = each(cur, normalize(p->cstr[i].lhs), normalize(ac[i].lhs));
          cur = each(cur, normalize(p->cstr[i].rhs), normalize(ac[i].rhs));
        }
        return each(cur, p->body(), subst(s, a->body()));
      }
      case TypeTag::Lam: {
        Subst s;
        s.types[a->id] = ty::var(p->id);
        auto cur = unify(p->shape(), a->shape(), std::move(asg));
        return each(cur, p->body(), subst(s, a->body()));
      }
      case TypeTag::Send:
      case TypeTag::Recv: {
        Subst s;
        s.types[a->id] = ty::var(p->id);
        auto cur = unify(p->shape(), a->shape(), std::move(asg));
        cur = each_state(cur, p->state(), subst(s, a->state()));
        cur = each(cur, p->payload(), subst(s, a->payload()));
        return each(cur, p->cont(), a->cont());
      }
      case TypeTag::Arr: {
        if (p->ex.size() != a->ex.size()) return {};
        Subst s;
        std::vector<Assignment> cur{std::move(asg)};
        for (std::size_t i = 0; i < p->ex.size(); ++i) {
          const auto& pb = p->ex[i];
          const auto& ab = a->ex[i];
          if (pb.tag != ab.tag) return {};
          if (pb.tag == BindingTag::TypeVar) {
            if (!conv_kind(pb.kind, subst(s, ab.kind))) return {};
            s.types[ab.id] = ty::var(pb.id);
          } else if (pb.tag == BindingTag::Disjoint) {
            cur = each(cur, normalize(pb.lhs), normalize(subst(s, ab.lhs)));
            cur = each(cur, normalize(pb.rhs), normalize(subst(s, ab.rhs)));
          }
        }
        cur = each_state(cur, p->pre(), a->pre());
        cur = each(cur, p->arg(), a->arg());
        cur = each_state(cur, p->post(), subst(s, a->post()));
        return each(cur, p->ret(), normalize(subst(s, a->ret())));
      }
      default: {
        std::vector<Assignment> cur{std::move(asg)};
        for (std::size_t i = 0; i < p->kids.size(); ++i) cur = each(cur, p->kids[i], a->kids[i]);
        return cur;
      }
    }
  }

  // Matches pattern atoms against actual atoms. With `partial`, actual atoms
  // may remain unclaimed. Returns every assignment found.
  std::pair<std::vector<Assignment>, bool> unify_state(const Atoms& pat, const Atoms& act, Assignment asg,
                                                       bool partial) {
    if (!partial && pat.size() != act.size()) return {{}, false};
    std::vector<Assignment> out;
    std::vector<bool> used(act.size(), false);
    search(pat, act, 0, used, std::move(asg), out);
    return {out, true};
  }

 private:
  bool mentions_bound(const TypeP& t) const {
    for (const auto& v : free_vars(t))
      if (bound_.contains(v)) return true;
    return false;
  }

  std::vector<Assignment> each(const std::vector<Assignment>& in, const TypeP& p, const TypeP& a) {
    std::vector<Assignment> out;
    for (const auto& asg : in) {
      for (auto& r : unify(p, a, asg)) {
        out.push_back(std::move(r));
        if (out.size() >= kMaxCandidates) return out;
      }
    }
    return out;
  }

  std::vector<Assignment> each_state(const std::vector<Assignment>& in, const TypeP& p, const TypeP& a) {
    std::vector<Assignment> out;
    for (const auto& asg : in) {
      for (auto& r : unify_state(state_atoms(normalize(p)), state_atoms(normalize(a)), asg, false).first) {
        out.push_back(std::move(r));
        if (out.size() >= kMaxCandidates) return out;
      }
    }
    return out;
  }

  void search(const Atoms& pat, const Atoms& act, std::size_t i, std::vector<bool>& used, Assignment asg,
              std::vector<Assignment>& out) {
    if (out.size() >= kMaxCandidates) return;
    if (i == pat.size()) {
      out.push_back(std::move(asg));
      return;
    }
    for (std::size_t j = 0; j < act.size(); ++j) {
      if (used[j]) continue;
      used[j] = true;
      for (auto& r : unify(pat[i], act[j], asg)) search(pat, act, i + 1, used, std::move(r), out);
      used[j] = false;
    }
  }

  IdentSet bound_;
};

// Domain for `var` of shape `shape` from the assignments at paths below `at`.
std::optional<TypeP> build_domain(const Assignment& asg, const DomPath& at, const TypeP& shape) {
  if (auto it = asg.find(at); it != asg.end()) return it->second;
  if (shape && shape->tag == TypeTag::ShapePair) {
    std::optional<TypeP> halves[2];
    for (Label l : {Label::One, Label::Two}) {
      DomPath sub = at;
      sub.projs.push_back(l);
      halves[index_of(l)] = build_domain(asg, sub, shape->kids[index_of(l)]);
    }
    if (halves[0] && halves[1]) {
      const auto &a = *halves[0], &b = *halves[1];
      // (pi1 x, pi2 x) is x.
      if (a->tag == TypeTag::DomProj && b->tag == TypeTag::DomProj && a->label == Label::One &&
          b->label == Label::Two && conv_normal(a->dom(), b->dom()))
        return a->dom();
      return normalize(ty::dom_merge(a, b));
    }
  }
  if (shape && shape->tag == TypeTag::ShapeZero) return ty::dom_zero();
  // A projection of the variable was matched against the same projection of
  // some domain x: propose x itself.
  for (const auto& [path, dom] : asg) {
    if (path.var != at.var || path.projs.size() <= at.projs.size()) continue;
    if (!std::equal(at.projs.begin(), at.projs.end(), path.projs.begin())) continue;
    TypeP cur = dom;
    bool ok = true;
    for (std::size_t k = path.projs.size(); k-- > at.projs.size();) {
      if (cur->tag != TypeTag::DomProj || cur->label != path.projs[k]) {
        ok = false;
        break;
      }
      cur = cur->dom();
    }
    if (ok) return cur;
  }
  return std::nullopt;
}

bool mentions(const TypeP& t, const Ident& x) { return occurs_free(x, t); }

// ------------------------------------------------------------- checker

class Checker {
 public:
  [[noreturn]] void fail(const std::string& rule, const std::string& msg, const SourceSpan& span,
                         const Atoms* avail = nullptr, const TypeP& expected = nullptr,
                         const TypeP& found = nullptr) {
    TypeError err(rule, msg, span);
    if (expected) err.expected = pretty(normalize(expected));
    if (found) err.found = pretty(normalize(found));
    if (avail) err.state = pretty(make_state(*avail));
    throw err;
  }

  // Kinding failures inside a typing rule are reported against that rule's span.
  template <class F>
  auto kinded(const SourceSpan& span, F&& f) {
    try {
      return f();
    } catch (KindError& e) {
      if (!e.span.known()) e.span = span;
      throw;
    }
  }

  TypeP value(const Ctx& g, const ValueP& v) {
    return std::visit(
        overloaded{
            [&](const val::Var& x) -> TypeP {
              for (auto it = g.rbegin(); it != g.rend(); ++it)
                if (it->tag == BindingTag::ValVar && it->id == x.id) return normalize(it->type);
              fail("T-Var", "unbound variable " + x.id.name, v->span);
            },
            [&](const val::Chan& c) -> TypeP {
              kinded(v->span, [&] { expect_kind(g, c.dom, kd::dom(ty::shape_one())); });
              return ty::chan(normalize(c.dom));
            },
            [&](const val::Unit&) -> TypeP { return ty::unit(); },
            [&](const val::Pair& p) -> TypeP { return ty::pair(value(g, p.fst), value(g, p.snd)); },
            [&](const val::Abs& a) -> TypeP {
              kinded(v->span, [&] {
                expect_kind(g, a.pre, kd::state());
                expect_kind(g, a.param_ty, kd::type());
              });
              Ident x = a.param;
              ExprP body = a.body;
              if (binds(g, x)) {
                x = fresh_ident(x.name);
                body = subst1(a.param, vl::var(x), body);
              }
              Ctx inner = g;
              inner.push_back(Binding::val_var(x, normalize(a.param_ty)));
              auto r = expr(inner, atoms_of(a.pre), body);
              auto arr = ty::arr(normalize(a.pre), normalize(a.param_ty), r.ex, r.post, r.type);
              kinded(v->span, [&] { expect_kind(g, arr, kd::type()); });
              return normalize(arr);
            },
            [&](const val::TAbs& a) -> TypeP {
              Ident al = a.binder;
              Constraints cs = a.cstr;
              ValueP body = a.body;
              if (binds(g, al)) {
                al = fresh_ident(al.name);
                Subst s;
                s.types[a.binder] = ty::var(al);
                cs = subst(s, cs);
                body = subst(s, body);
              }
              Ctx ext{Binding::type_var(al, a.kind)};
              for (const auto& c : cs) ext.push_back(Binding::disjoint(c.lhs, c.rhs));
              kinded(v->span, [&] { check_ctx_extension(g, ext); });
              Ctx inner = g;
              inner.insert(inner.end(), ext.begin(), ext.end());
              return ty::all(al, normalize(a.kind), normalize(cs), value(inner, body));
            },
        },
        v->node);
  }

  // Finds the state entry for the channel a value of type Chan d refers to.
  std::pair<TypeP, Atoms> channel(const Ctx& g, const Atoms& avail, const ValueP& chan, const char* rule,
                                  const SourceSpan& span, TypeP* dom_out) {
    auto cty = value(g, chan);
    if (cty->tag != TypeTag::Chan) fail(rule, "expected a channel", span, &avail, nullptr, cty);
    auto d = normalize(cty->dom());
    for (std::size_t i = 0; i < avail.size(); ++i) {
      const auto& a = avail[i];
      if (a->tag == TypeTag::StBind && conv_normal(a->dom(), d)) {
        Atoms rest = avail;
        rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(i));
        *dom_out = a->dom();
        return {a->ses(), rest};
      }
    }
    fail(rule, "no state entry for channel " + pretty(d), span, &avail);
  }

  ExprTyping expr(const Ctx& g, const Atoms& avail, const ExprP& e) {
    const auto& span = e->span;
    auto done = [](Ctx ex, Atoms post, TypeP t) { return ExprTyping{std::move(ex), make_state(std::move(post)), t}; };
    return std::visit(
        overloaded{
            [&](const ex::Val& x) -> ExprTyping { return done({}, avail, value(g, x.v)); },
            [&](const ex::Let& l) -> ExprTyping {
              auto h = expr(g, avail, l.bound);
              TypeP post = h.post, t1 = h.type;
              Ctx ex2 = freshen(h.ex, {&post, &t1});
              Ctx g2 = disjoint_append(g, ex2);
              kinded(span, [&] { expect_kind(g2, post, kd::state()); });
              Ident x = l.x;
              ExprP body = l.body;
              if (binds(g2, x)) {
                x = fresh_ident(x.name);
                body = subst1(l.x, vl::var(x), body);
              }
              g2.push_back(Binding::val_var(x, t1));
              auto r = expr(g2, state_atoms(post), body);
              Ctx ex = ex2;
              ex.insert(ex.end(), r.ex.begin(), r.ex.end());
              return ExprTyping{prune(ex, r.post, r.type), r.post, r.type};
            },
            [&](const ex::App& a) -> ExprTyping {
              auto f = value(g, a.fn);
              if (f->tag != TypeTag::Arr) fail("T-App", "applying a non-function", span, &avail, nullptr, f);
              auto at = value(g, a.arg);
              if (!conv_normal(f->arg(), at)) fail("T-App", "argument type mismatch", span, &avail, f->arg(), at);
              auto rest = take_atoms(avail, state_atoms(f->pre()));
              if (!rest) fail("T-App", "state does not provide the function's pre-state", span, &avail, f->pre());
              TypeP post = f->post(), ret = f->ret();
              Ctx ex = freshen(f->ex, {&post, &ret});
              Atoms out = *rest;
              for (const auto& p : state_atoms(post)) out.push_back(p);
              return done(ex, out, ret);
            },
            [&](const ex::Proj& p) -> ExprTyping {
              auto t = value(g, p.v);
              if (t->tag != TypeTag::Pair) fail("T-Proj", "projection from a non-pair", span, &avail, nullptr, t);
              return done({}, avail, t->kids[index_of(p.l)]);
            },
            [&](const ex::TApp& a) -> ExprTyping {
              auto f = value(g, a.fn);
              if (f->tag != TypeTag::All)
                fail("T-TApp", "type application of a non-polymorphic value", span, &avail, nullptr, f);
              kinded(span, [&] { expect_kind(g, a.arg, f->kind); });
              Subst s;
              s.types[f->id] = a.arg;
              auto cs = subst(s, f->cstr);
              if (!entails(g, cs)) fail("T-TApp", "constraints not entailed: " + pretty(normalize(cs)), span, &avail);
              return done({}, avail, normalize(subst(s, f->body())));
            },
            [&](const ex::Fork& f) -> ExprTyping {
              auto t = value(g, f.v);
              if (t->tag != TypeTag::Arr || t->arg()->tag != TypeTag::Unit || t->ret()->tag != TypeTag::Unit ||
                  !t->ex.empty() || !state_atoms(t->post()).empty())
                fail("T-Fork", "fork needs a function [S; Unit -> .; Unit]", span, &avail, nullptr, t);
              auto rest = take_atoms(avail, state_atoms(t->pre()));
              if (!rest) fail("T-Fork", "state does not provide the forked function's pre-state", span, &avail, t->pre());
              return done({}, *rest, ty::unit());
            },
            [&](const ex::New& n) -> ExprTyping {
              kinded(span, [&] { expect_kind(g, n.ses, kd::session()); });
              return done({}, avail, ty::access_point(normalize(n.ses)));
            },
            [&](const ex::Accept& a) -> ExprTyping { return connect(g, avail, a.v, span, false); },
            [&](const ex::Request& r) -> ExprTyping { return connect(g, avail, r.v, span, true); },
            [&](const ex::Send& s) -> ExprTyping {
              TypeP d;
              auto [ses, rest] = channel(g, avail, s.chan, "T-Send", span, &d);
              if (ses->tag != TypeTag::Send) fail("T-Send", "channel is not ready to send", span, &avail, nullptr, ses);
              auto pt = value(g, s.payload);
              Ctx bound{Binding::type_var(ses->id, kd::dom(ses->shape()))};
              ExistentialMatch m;
              try {
                m = match_existential(g, bound, ses->state(), ses->payload(), make_state(rest), pt);
              } catch (TypeError& err) {
                err.span = span;
                err.state = pretty(make_state(avail));
                throw;
              }
              Atoms out = state_atoms(m.leftover);
              out.push_back(ty::st_bind(d, ses->cont()));
              return done({}, out, ty::unit());
            },
            [&](const ex::Recv& r) -> ExprTyping {
              TypeP d;
              auto [ses, rest] = channel(g, avail, r.chan, "T-Recv", span, &d);
              if (ses->tag != TypeTag::Recv)
                fail("T-Recv", "channel is not ready to receive", span, &avail, nullptr, ses);
              Ident fresh = fresh_ident(ses->id.name);
              Subst s;
              s.types[ses->id] = ty::var(fresh);
              Atoms out = rest;
              for (const auto& a : atoms_of(subst(s, ses->state()))) out.push_back(a);
              out.push_back(ty::st_bind(d, ses->cont()));
              return done({Binding::type_var(fresh, kd::dom(ses->shape()))}, out, normalize(subst(s, ses->payload())));
            },
            [&](const ex::Select& s) -> ExprTyping {
              TypeP d;
              auto [ses, rest] = channel(g, avail, s.chan, "T-Select", span, &d);
              if (ses->tag != TypeTag::Choice)
                fail("T-Select", "channel does not offer an internal choice", span, &avail, nullptr, ses);
              rest.push_back(ty::st_bind(d, ses->kids[index_of(s.l)]));
              return done({}, rest, ty::unit());
            },
            [&](const ex::Case& c) -> ExprTyping {
              TypeP d;
              auto [ses, rest] = channel(g, avail, c.chan, "T-Case", span, &d);
              if (ses->tag != TypeTag::Branch)
                fail("T-Case", "channel does not offer an external choice", span, &avail, nullptr, ses);
              Atoms s1 = rest, s2 = rest;
              s1.push_back(ty::st_bind(d, ses->left()));
              s2.push_back(ty::st_bind(d, ses->right()));
              auto r1 = expr(g, s1, c.left);
              auto r2 = expr(g, s2, c.right);
              if (!match_packages(g, r1, r2)) {
                TypeError err("T-Case", "branches end in different packages", span);
                err.expected = pretty(ty::arr(ty::st_empty(), ty::unit(), r1.ex, r1.post, r1.type));
                err.found = pretty(ty::arr(ty::st_empty(), ty::unit(), r2.ex, r2.post, r2.type));
                err.state = pretty(make_state(avail));
                throw err;
              }
              return r1;
            },
            [&](const ex::Close& c) -> ExprTyping {
              TypeP d;
              auto [ses, rest] = channel(g, avail, c.chan, "T-Close", span, &d);
              if (ses->tag != TypeTag::End) fail("T-Close", "closing a channel whose session is not End", span, &avail, nullptr, ses);
              return done({}, rest, ty::unit());
            },
        },
        e->node);
  }

  ExprTyping connect(const Ctx& g, const Atoms& avail, const ValueP& ap, const SourceSpan& span, bool request) {
    const char* rule = request ? "T-Request" : "T-Accept";
    auto t = value(g, ap);
    if (t->tag != TypeTag::AccessPoint) fail(rule, "expected an access point", span, &avail, nullptr, t);
    Ident c = fresh_ident("c");
    Atoms out = avail;
    out.push_back(ty::st_bind(ty::var(c), request ? dual_of(t->ses()) : t->ses()));
    return ExprTyping{{Binding::type_var(c, kd::dom(ty::shape_one()))}, make_state(out), ty::chan(ty::var(c))};
  }

  Atoms config(const Ctx& g, const Atoms& avail, const ConfigP& c) {
    return std::visit(
        overloaded{
            [&](const cfg::Proc& p) -> Atoms {
              auto r = expr(g, avail, p.e);
              Atoms post = state_atoms(r.post);
              Atoms owned, unowned;
              for (const auto& a : avail) {
                auto it = std::find_if(post.begin(), post.end(), [&](const TypeP& q) { return conv_normal(a, q); });
                if (it != post.end()) {
                  post.erase(it);
                  unowned.push_back(a);
                } else {
                  owned.push_back(a);
                }
              }
              if (!post.empty())
                fail("T-Exp", "process ends with non-empty state " + pretty(make_state(post)), c->span, &avail);
              auto again = expr(g, owned, p.e);
              if (!state_atoms(again.post).empty())
                fail("T-Exp", "process ends with non-empty state " + pretty(again.post), c->span, &owned);
              return unowned;
            },
            [&](const cfg::Par& p) -> Atoms { return config(g, config(g, avail, p.left), p.right); },
            [&](const cfg::NuChan& n) -> Atoms {
              kinded(c->span, [&] { expect_kind(g, n.ses, kd::session()); });
              Ctx g2 = disjoint_append(g, {Binding::type_var(n.end1, kd::dom(ty::shape_one())),
                                           Binding::type_var(n.end2, kd::dom(ty::shape_one()))});
              auto ses = normalize(n.ses);
              auto closed = [&] { return config(g2, avail, n.body); };
              if (n.closed) return closed();
              try {
                Atoms a = avail;
                a.push_back(ty::st_bind(ty::var(n.end1), ses));
                a.push_back(ty::st_bind(ty::var(n.end2), dual_of(ses)));
                auto left = config(g2, a, n.body);
                for (const auto& l : left)
                  if (mentions(l, n.end1) || mentions(l, n.end2))
                    fail("T-NuChan", "no process owns the channel end " + pretty(l), c->span, &a);
                return left;
              } catch (TypeError&) {
                if (ses->tag != TypeTag::End) throw;
                try {
                  return closed();
                } catch (TypeError&) {
                }
                throw;
              }
            },
            [&](const cfg::NuAccess& n) -> Atoms {
              kinded(c->span, [&] { expect_kind(g, n.ses, kd::session()); });
              Ctx g2 = g;
              g2.push_back(Binding::val_var(n.x, ty::access_point(normalize(n.ses))));
              return config(g2, avail, n.body);
            },
        },
        c->node);
  }
};

}  // namespace

TypeP type_value(const Ctx& g, const ValueP& v) { return Checker().value(g, v); }

ExprTyping type_expr(const Ctx& g, const TypeP& sigma, const ExprP& e) {
  return Checker().expr(g, atoms_of(sigma), e);
}

ExistentialMatch match_existential(const Ctx& g, const Ctx& bound, const TypeP& pat_state, const TypeP& pat_ty,
                                   const TypeP& act_state, const TypeP& act_ty) {
  IdentSet vars;
  std::map<Ident, TypeP> shapes;
  for (const auto& b : bound) {
    if (b.tag != BindingTag::TypeVar) continue;
    vars.insert(b.id);
    shapes[b.id] = b.kind->tag == KindTag::Dom ? normalize(b.kind->shape) : nullptr;
  }
  auto pst = normalize(pat_state), pty = normalize(pat_ty);
  auto ast = normalize(act_state), aty = normalize(act_ty);
  Atoms act_atoms = state_atoms(ast);

  Matcher m(vars);
  std::vector<Assignment> candidates;
  for (auto& asg : m.unify(pty, aty, {}))
    for (auto& full : m.unify_state(state_atoms(pst), act_atoms, asg, true).first) candidates.push_back(full);

  std::vector<ExistentialMatch> found;
  for (const auto& asg : candidates) {
    Subst s;
    bool ok = true;
    for (const auto& v : vars) {
      bool occurs = occurs_free(v, pst) || occurs_free(v, pty);
      auto d = build_domain(asg, DomPath{v, {}}, shapes[v]);
      if (!d) {
        if (occurs) ok = false;
        continue;
      }
      s.types[v] = *d;
    }
    if (!ok) continue;
    auto inst_ty = normalize(subst(s, pty));
    if (!conv_normal(inst_ty, aty)) continue;
    auto rest = take_atoms(act_atoms, state_atoms(normalize(subst(s, pst))));
    if (!rest) continue;
    bool dup = false;
    for (const auto& f : found) {
      bool same_map = f.rho.map.size() == s.types.size();
      for (const auto& [k, d] : s.types) {
        auto it = f.rho.map.find(k);
        if (it == f.rho.map.end() || !conv_normal(it->second, d)) same_map = false;
      }
      if (same_map) dup = true;
    }
    if (!dup) found.push_back(ExistentialMatch{Renaming{s.types}, make_state(*rest)});
  }
  if (found.empty()) {
    TypeError err("existential-match", "no instantiation of the package matches the state and payload");
    err.expected = pretty(ty::arr(pst, pty, bound, ty::st_empty(), ty::unit()));
    err.found = pretty(ast) + "; " + pretty(aty);
    throw err;
  }
  if (found.size() > 1) {
    std::string alts;
    for (const auto& f : found) {
      if (!alts.empty()) alts += " | ";
      for (const auto& [k, d] : f.rho.map) alts += k.name + " := " + pretty(d) + " ";
    }
    throw TypeError("existential-match", "ambiguous instantiation: " + alts);
  }
  for (const auto& b : bound)
    if (b.tag == BindingTag::TypeVar && found[0].rho.map.contains(b.id))
      expect_kind(g, found[0].rho.map.at(b.id), b.kind);
  return found[0];
}

std::optional<std::map<Ident, Ident>> match_packages(const Ctx& g, const ExprTyping& a, const ExprTyping& b) {
  std::vector<Binding> va, vb;
  for (const auto& x : a.ex)
    if (x.tag == BindingTag::TypeVar) va.push_back(x);
  for (const auto& x : b.ex)
    if (x.tag == BindingTag::TypeVar) vb.push_back(x);
  if (va.size() != vb.size()) return std::nullopt;

  IdentSet vars;
  for (const auto& x : va) vars.insert(x.id);
  Matcher m(vars);
  auto pst = normalize(a.post), pty = normalize(a.type);
  auto bst = normalize(b.post), bty = normalize(b.type);

  auto cstr_key = [](const Ctx& ex, const Subst& s) {
    std::multiset<std::pair<std::string, std::string>> out;
    for (const auto& x : ex) {
      if (x.tag != BindingTag::Disjoint) continue;
      auto l = sort_key(normalize(subst(s, x.lhs))), r = sort_key(normalize(subst(s, x.rhs)));
      out.insert(l < r ? std::pair{l, r} : std::pair{r, l});
    }
    return out;
  };
  auto target_keys = cstr_key(b.ex, Subst{});

  for (auto& asg0 : m.unify(pty, bty, {})) {
    for (auto& asg : m.unify_state(state_atoms(pst), state_atoms(bst), asg0, false).first) {
      std::map<Ident, Ident> rho;
      std::set<Ident> taken;
      bool ok = true;
      for (const auto& x : va) {
        auto d = build_domain(asg, DomPath{x.id, {}}, nullptr);
        if (!d) continue;
        if ((*d)->tag != TypeTag::Var) {
          ok = false;
          break;
        }
        auto it = std::find_if(vb.begin(), vb.end(), [&](const Binding& y) { return y.id == (*d)->id; });
        if (it == vb.end() || taken.contains(it->id) || !conv_kind(x.kind, it->kind)) {
          ok = false;
          break;
        }
        rho[x.id] = it->id;
        taken.insert(it->id);
      }
      if (!ok) continue;
      // Variables that occur nowhere pair up with the remaining ones by kind.
      for (const auto& x : va) {
        if (rho.contains(x.id)) continue;
        auto it = std::find_if(vb.begin(), vb.end(),
                               [&](const Binding& y) { return !taken.contains(y.id) && conv_kind(x.kind, y.kind); });
        if (it == vb.end()) {
          ok = false;
          break;
        }
        rho[x.id] = it->id;
        taken.insert(it->id);
      }
      if (!ok) continue;
      Subst s;
      for (const auto& [k, v] : rho) s.types[k] = ty::var(v);
      if (!conv_normal(normalize(subst(s, pty)), bty)) continue;
      if (!conv(subst(s, pst), bst)) continue;
      if (cstr_key(a.ex, s) != target_keys) continue;
      return rho;
    }
  }
  (void)g;
  return std::nullopt;
}

TypeP type_config(const Ctx& g, const TypeP& sigma, const ConfigP& c) {
  return make_state(Checker().config(g, atoms_of(sigma), c));
}

void check_program(const ConfigP& c) {
  auto left = type_config({}, ty::st_empty(), c);
  if (!state_atoms(left).empty()) throw TypeError("T-Exp", "unowned state at top level: " + pretty(left), c->span);
}

}  // namespace pvgr
