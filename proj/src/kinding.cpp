#include "pvgr/kinding.hpp"

#include "pvgr/constraints.hpp"
#include "pvgr/normalize.hpp"
#include "pvgr/parser.hpp"

namespace pvgr {

KindError::KindError(std::string rule_, std::string message_, TypeP subtree_, KindP expected_, KindP found_,
                     std::vector<std::string> trail_)
    : std::runtime_error(rule_ + ": " + message_),
      rule(std::move(rule_)),
      message(std::move(message_)),
      subtree(std::move(subtree_)),
      expected(std::move(expected_)),
      found(std::move(found_)),
      trail(std::move(trail_)) {}

KindP lookup_kind(const Ctx& g, const Ident& id) {
  for (auto it = g.rbegin(); it != g.rend(); ++it)
    if (it->tag == BindingTag::TypeVar && it->id == id) return it->kind;
  return nullptr;
}

namespace {

bool is_bound(const Ctx& g, const Ident& id) {
  for (const auto& b : g)
    if (b.tag != BindingTag::Disjoint && b.id == id) return true;
  return false;
}

class Kinder {
 public:
  struct Rule {
    Kinder& k;
    Rule(Kinder& k, const char* name) : k(k) { k.trail_.push_back(name); }
    ~Rule() { k.trail_.pop_back(); }
  };

  [[noreturn]] void fail(const std::string& msg, const TypeP& at = nullptr, const KindP& expected = nullptr,
                         const KindP& found = nullptr) {
    std::string rule = trail_.empty() ? "kinding" : trail_.back();
    std::string m = msg;
    if (at) m += " in " + pretty(at);
    if (expected && found) m += " (expected " + pretty(expected) + ", found " + pretty(found) + ")";
    throw KindError(rule, m, at, expected, found, trail_);
  }

  void binding(const Ctx& g, const Binding& b) {
    switch (b.tag) {
      case BindingTag::TypeVar: {
        Rule r(*this, "CF-ConsKind");
        if (is_bound(g, b.id)) fail("type variable " + b.id.name + " is already bound");
        kind(g, b.kind);
        return;
      }
      case BindingTag::ValVar: {
        Rule r(*this, "CF-ConsType");
        if (is_bound(g, b.id)) fail("variable " + b.id.name + " is already bound");
        expect(g, b.type, kd::type());
        return;
      }
      case BindingTag::Disjoint: {
        Rule r(*this, "CF-ConsCstr");
        dom_shape(g, b.lhs);
        dom_shape(g, b.rhs);
        return;
      }
    }
  }

  void extension(const Ctx& g, const Ctx& ext) {
    Ctx cur = g;
    for (const auto& b : ext) {
      binding(cur, b);
      cur.push_back(b);
    }
  }

  void kind(const Ctx& g, const KindP& k) {
    switch (k->tag) {
      case KindTag::Type:
      case KindTag::Session:
      case KindTag::State:
      case KindTag::Shape:
        return;
      case KindTag::Dom: {
        Rule r(*this, "KF-Dom");
        expect(g, k->shape, kd::shape());
        return;
      }
      case KindTag::Arrow: {
        Rule r(*this, "KF-Arr");
        if (k->from->tag != KindTag::Dom) fail("type functions must abstract over a domain");
        kind(g, k->from);
        if (k->to->tag != KindTag::Type && k->to->tag != KindTag::State)
          fail("type functions must return Type or State");
        return;
      }
    }
  }

  void expect(const Ctx& g, const TypeP& t, const KindP& want) {
    auto got = infer(g, t);
    if (!conv_kind(got, want)) fail("kind mismatch", t, want, got);
  }

  // Shape of a domain-kinded type, normalized.
  TypeP dom_shape(const Ctx& g, const TypeP& d) {
    auto k = infer(g, d);
    if (k->tag != KindTag::Dom) fail("expected a domain", d, nullptr, k);
    return normalize(k->shape);
  }

  void shape(const Ctx& g, const TypeP& s) { expect(g, s, kd::shape()); }

  KindP infer(const Ctx& g, const TypeP& t) {
    switch (t->tag) {
      case TypeTag::Var: {
        Rule r(*this, "K-Var");
        auto k = lookup_kind(g, t->id);
        if (!k) fail("unbound type variable " + t->id.name, t);
        return k;
      }
      case TypeTag::App: {
        Rule r(*this, "K-App");
        auto fk = infer(g, t->fn());
        if (fk->tag != KindTag::Arrow) fail("applying a type that is not a type function", t, nullptr, fk);
        expect(g, t->arg(), fk->from);
        return fk->to;
      }
      case TypeTag::Lam: {
        Rule r(*this, "K-Lam");
        shape(g, t->shape());
        Ctx inner = restrict_non_dom(g);
        inner.push_back(Binding::type_var(t->id, kd::dom(t->shape())));
        auto bk = infer(inner, t->body());
        if (bk->tag != KindTag::Type && bk->tag != KindTag::State)
          fail("type function body must be a Type or a State", t->body(), nullptr, bk);
        return kd::arrow(kd::dom(t->shape()), bk);
      }
      case TypeTag::All: {
        Rule r(*this, "K-All");
        kind(g, t->kind);
        Ctx inner = g;
        Ctx ext{Binding::type_var(t->id, t->kind)};
        for (const auto& c : t->cstr) ext.push_back(Binding::disjoint(c.lhs, c.rhs));
        extension(inner, ext);
        inner.insert(inner.end(), ext.begin(), ext.end());
        expect(inner, t->body(), kd::type());
        return kd::type();
      }
      case TypeTag::Arr: {
        Rule r(*this, "K-Arr");
        expect(g, t->pre(), kd::state());
        expect(g, t->arg(), kd::type());
        for (const auto& b : t->ex)
          if (b.tag == BindingTag::ValVar || (b.tag == BindingTag::TypeVar && b.kind->tag != KindTag::Dom))
            fail("existential context may only bind domains", t);
        extension(g, t->ex);
        Ctx inner = disjoint_append(g, t->ex);
        expect(inner, t->post(), kd::state());
        expect(inner, t->ret(), kd::type());
        return kd::type();
      }
      case TypeTag::Chan: {
        Rule r(*this, "K-Chan");
        expect(g, t->dom(), kd::dom(ty::shape_one()));
        return kd::type();
      }
      case TypeTag::AccessPoint: {
        Rule r(*this, "K-AccessPoint");
        expect(g, t->ses(), kd::session());
        return kd::type();
      }
      case TypeTag::Unit:
        return kd::type();
      case TypeTag::Pair: {
        Rule r(*this, "K-Pair");
        expect(g, t->left(), kd::type());
        expect(g, t->right(), kd::type());
        return kd::type();
      }
      case TypeTag::Send:
      case TypeTag::Recv: {
        Rule r(*this, t->tag == TypeTag::Send ? "K-Send" : "K-Recv");
        shape(g, t->shape());
        Ctx inner = restrict_non_dom(g);
        inner.push_back(Binding::type_var(t->id, kd::dom(t->shape())));
        expect(inner, t->state(), kd::state());
        expect(inner, t->payload(), kd::type());
        expect(g, t->cont(), kd::session());
        return kd::session();
      }
      case TypeTag::Choice:
      case TypeTag::Branch: {
        Rule r(*this, t->tag == TypeTag::Choice ? "K-Choice" : "K-Branch");
        expect(g, t->left(), kd::session());
        expect(g, t->right(), kd::session());
        return kd::session();
      }
      case TypeTag::End:
        return kd::session();
      case TypeTag::Dual: {
        Rule r(*this, "K-Dual");
        expect(g, t->ses(), kd::session());
        return kd::session();
      }
      case TypeTag::ShapeZero:
      case TypeTag::ShapeOne:
        return kd::shape();
      case TypeTag::ShapePair: {
        Rule r(*this, "K-ShapePair");
        shape(g, t->left());
        shape(g, t->right());
        return kd::shape();
      }
      case TypeTag::DomZero:
        return kd::dom(ty::shape_zero());
      case TypeTag::DomMerge: {
        Rule r(*this, "K-DomMerge");
        auto s1 = dom_shape(g, t->left());
        auto s2 = dom_shape(g, t->right());
        if (!entails(g, t->left(), t->right()))
          fail("components are not known to be disjoint", t);
        return kd::dom(ty::shape_pair(s1, s2));
      }
      case TypeTag::DomProj: {
        Rule r(*this, "K-DomProj");
        auto s = dom_shape(g, t->dom());
        if (s->tag != TypeTag::ShapePair) fail("projection from a domain whose shape is not a pair", t);
        return kd::dom(s->kids[index_of(t->label)]);
      }
      case TypeTag::StEmpty:
        return kd::state();
      case TypeTag::StBind: {
        Rule r(*this, "K-StChan");
        expect(g, t->dom(), kd::dom(ty::shape_one()));
        expect(g, t->ses(), kd::session());
        return kd::state();
      }
      case TypeTag::StMerge: {
        Rule r(*this, "K-StMerge");
        expect(g, t->left(), kd::state());
        expect(g, t->right(), kd::state());
        auto l = state_domains(g, t->left());
        auto rr = state_domains(g, t->right());
        if ((!l && rr && !rr->empty()) || (!rr && l && !l->empty()) || (!l && !rr))
          fail("cannot show disjointness of an abstract state", t);
        if (l && rr) {
          Constraints c;
          for (const auto& a : *l)
            for (const auto& b : *rr) c.push_back(Disjoint{a, b});
          if (!entails(g, c)) fail("merged states are not known to have disjoint domains", t);
        }
        return kd::state();
      }
    }
    fail("unknown type form", t);
  }

  // Domains a state owns, or nullopt when it contains an abstract state.
  std::optional<std::vector<TypeP>> state_domains(const Ctx& g, const TypeP& st) {
    std::vector<TypeP> out;
    for (const auto& a : state_atoms(normalize(st))) {
      if (a->tag == TypeTag::StBind) {
        out.push_back(a->dom());
      } else if (a->tag == TypeTag::App && a->fn()->tag == TypeTag::Var) {
        auto k = lookup_kind(g, a->fn()->id);
        if (!k || k->tag != KindTag::Arrow) return std::nullopt;
        out.push_back(a->arg());
      } else {
        return std::nullopt;
      }
    }
    return out;
  }

 private:
  std::vector<std::string> trail_;
};

}  // namespace

void check_ctx(const Ctx& g) { Kinder().extension({}, g); }
void check_ctx_extension(const Ctx& g, const Ctx& ext) { Kinder().extension(g, ext); }
void check_kind(const Ctx& g, const KindP& k) { Kinder().kind(g, k); }
KindP infer_kind(const Ctx& g, const TypeP& t) { return Kinder().infer(g, t); }
void expect_kind(const Ctx& g, const TypeP& t, const KindP& want) { Kinder().expect(g, t, want); }

Ctx restrict_non_dom(const Ctx& g) {
  Ctx out;
  for (const auto& b : g) {
    if (b.tag != BindingTag::TypeVar) continue;
    auto t = b.kind->tag;
    if (t == KindTag::Shape || t == KindTag::Session || t == KindTag::Arrow) out.push_back(b);
  }
  return out;
}

Ctx restrict_only_dom(const Ctx& g) {
  Ctx out;
  for (const auto& b : g)
    if (b.tag == BindingTag::TypeVar && b.kind->tag == KindTag::Dom) out.push_back(b);
  return out;
}

Ctx disjoint_append(const Ctx& g1, const Ctx& g2) {
  Ctx out = g1;
  out.insert(out.end(), g2.begin(), g2.end());
  auto d1 = restrict_only_dom(g1);
  auto d2 = restrict_only_dom(g2);
  for (std::size_t i = 0; i < d2.size(); ++i)
    for (std::size_t j = i + 1; j < d2.size(); ++j)
      out.push_back(Binding::disjoint(ty::var(d2[i].id), ty::var(d2[j].id)));
  for (const auto& a : d1)
    for (const auto& b : d2) out.push_back(Binding::disjoint(ty::var(a.id), ty::var(b.id)));
  return out;
}

}  // namespace pvgr
