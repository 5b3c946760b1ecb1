#include "pvgr/normalize.hpp"

#include <algorithm>
#include <functional>

namespace pvgr {

namespace {

void key_into(const TypeP& t, std::string& out);

void key_kind(const KindP& k, std::string& out) {
  if (!k) return;
  switch (k->tag) {
    case KindTag::Type: out += "T"; break;
    case KindTag::Session: out += "S"; break;
    case KindTag::State: out += "St"; break;
    case KindTag::Shape: out += "Sh"; break;
    case KindTag::Dom:
      out += "D(";
      key_into(k->shape, out);
      out += ")";
      break;
    case KindTag::Arrow:
      out += "(";
      key_kind(k->from, out);
      out += ">";
      key_kind(k->to, out);
      out += ")";
      break;
  }
}

void key_into(const TypeP& t, std::string& out) {
  if (!t) return;
  out += std::to_string(static_cast<int>(t->tag));
  if (t->tag == TypeTag::Var || t->tag == TypeTag::Lam || t->tag == TypeTag::All ||
      is_message(t->tag))
    out += ":" + debug_name(t->id);
  if (t->tag == TypeTag::DomProj) out += t->label == Label::One ? "/1" : "/2";
  if (t->kind) key_kind(t->kind, out);
  for (const auto& d : t->cstr) {
    out += "#";
    key_into(d.lhs, out);
    key_into(d.rhs, out);
  }
  for (const auto& b : t->ex) {
    out += "^";
    if (b.tag == BindingTag::TypeVar) {
      out += debug_name(b.id);
      key_kind(b.kind, out);
    } else if (b.tag == BindingTag::Disjoint) {
      key_into(b.lhs, out);
      key_into(b.rhs, out);
    }
  }
  out += "(";
  for (const auto& k : t->kids) {
    key_into(k, out);
    out += ",";
  }
  out += ")";
}

void flatten_into(const TypeP& s, std::vector<TypeP>& out) {
  if (s->tag == TypeTag::StEmpty) return;
  if (s->tag == TypeTag::StMerge) {
    flatten_into(s->left(), out);
    flatten_into(s->right(), out);
    return;
  }
  out.push_back(s);
}

TypeP nf(const TypeP& t);

Constraints nf_cstr(const Constraints& c) {
  Constraints out;
  out.reserve(c.size());
  for (const auto& d : c) out.push_back(Disjoint{nf(d.lhs), nf(d.rhs)});
  return out;
}

Ctx nf_ctx(const Ctx& g) {
  Ctx out;
  out.reserve(g.size());
  for (const auto& b : g) {
    switch (b.tag) {
      case BindingTag::TypeVar:
        out.push_back(Binding::type_var(b.id, normalize(b.kind)));
        break;
      case BindingTag::ValVar:
        out.push_back(Binding::val_var(b.id, nf(b.type)));
        break;
      case BindingTag::Disjoint:
        out.push_back(Binding::disjoint(nf(b.lhs), nf(b.rhs)));
        break;
    }
  }
  return out;
}

TypeP nf(const TypeP& t) {
  switch (t->tag) {
    case TypeTag::Var:
    case TypeTag::Unit:
    case TypeTag::End:
    case TypeTag::ShapeZero:
    case TypeTag::ShapeOne:
    case TypeTag::DomZero:
    case TypeTag::StEmpty:
      return t;
    case TypeTag::App: {
      auto f = nf(t->fn());
      auto a = nf(t->arg());
      // Arguments are domains in kinded terms, never abstractions; refusing
      // to contract on an abstraction argument keeps untyped input terminating.
      if (f->tag == TypeTag::Lam && a->tag != TypeTag::Lam)
        return nf(subst1(f->id, a, f->body()));
      return ty::app(f, a);
    }
    case TypeTag::Lam:
      return ty::lam(t->id, nf(t->shape()), nf(t->body()));
    case TypeTag::All:
      return ty::all(t->id, normalize(t->kind), nf_cstr(t->cstr), nf(t->body()));
    case TypeTag::Arr:
      return ty::arr(nf(t->pre()), nf(t->arg()), nf_ctx(t->ex), nf(t->post()), nf(t->ret()));
    case TypeTag::Send:
    case TypeTag::Recv:
      return ty::message(t->tag, t->id, nf(t->shape()), nf(t->state()), nf(t->payload()),
                         nf(t->cont()));
    case TypeTag::Dual:
      return dual_of(nf(t->ses()));
    case TypeTag::DomProj: {
      auto d = nf(t->dom());
      if (d->tag == TypeTag::DomMerge) return d->kids[index_of(t->label)];
      return ty::dom_proj(t->label, d);
    }
    case TypeTag::StMerge: {
      std::vector<TypeP> atoms;
      flatten_into(nf(t->left()), atoms);
      flatten_into(nf(t->right()), atoms);
      return make_state(std::move(atoms));
    }
    default: {
      std::vector<TypeP> kids;
      kids.reserve(t->kids.size());
      for (const auto& k : t->kids) kids.push_back(nf(k));
      return ty::with_kids(*t, std::move(kids));
    }
  }
}

// ------------------------------------------------------------ comparison

class Equiv {
 public:
  bool type(const TypeP& a, const TypeP& b) {
    if (a->tag != b->tag) return false;
    switch (a->tag) {
      case TypeTag::Var:
        return var(a->id, b->id);
      case TypeTag::Lam: {
        if (!type(a->shape(), b->shape())) return false;
        Bind bind(*this, a->id, b->id);
        return type(a->body(), b->body());
      }
      case TypeTag::All: {
        if (!kind(a->kind, b->kind)) return false;
        Bind bind(*this, a->id, b->id);
        return cstr(a->cstr, b->cstr) && type(a->body(), b->body());
      }
      case TypeTag::Arr:
        return type(a->pre(), b->pre()) && type(a->arg(), b->arg()) && arrow_tail(*a, *b);
      case TypeTag::Send:
      case TypeTag::Recv: {
        if (!type(a->shape(), b->shape()) || !type(a->cont(), b->cont())) return false;
        Bind bind(*this, a->id, b->id);
        return type(a->state(), b->state()) && type(a->payload(), b->payload());
      }
      case TypeTag::DomProj:
        return a->label == b->label && type(a->dom(), b->dom());
      case TypeTag::StMerge:
        return states(a, b);
      default:
        if (a->kids.size() != b->kids.size()) return false;
        for (std::size_t i = 0; i < a->kids.size(); ++i)
          if (!type(a->kids[i], b->kids[i])) return false;
        return true;
    }
  }

  bool kind(const KindP& a, const KindP& b) {
    if (a->tag != b->tag) return false;
    if (a->tag == KindTag::Dom) return type(a->shape, b->shape);
    if (a->tag == KindTag::Arrow) return kind(a->from, b->from) && kind(a->to, b->to);
    return true;
  }

 private:
  struct Bind {
    Bind(Equiv& e, const Ident& l, const Ident& r) : e(e), l(l), r(r) {
      e.left_[l].push_back(r);
      e.right_[r].push_back(l);
    }
    ~Bind() {
      pop(e.left_, l);
      pop(e.right_, r);
    }
    static void pop(std::map<Ident, std::vector<Ident>>& m, const Ident& k) {
      auto it = m.find(k);
      it->second.pop_back();
      if (it->second.empty()) m.erase(it);
    }
    Bind(const Bind&) = delete;
    Bind& operator=(const Bind&) = delete;
    Equiv& e;
    Ident l, r;
  };

  bool var(const Ident& a, const Ident& b) {
    auto la = left_.find(a);
    auto rb = right_.find(b);
    if (la == left_.end() && rb == right_.end()) return a == b;
    if (la == left_.end() || rb == right_.end()) return false;
    return la->second.back() == b && rb->second.back() == a;
  }

  bool disjoint(const Disjoint& x, const Disjoint& y) {
    return (type(x.lhs, y.lhs) && type(x.rhs, y.rhs)) || (type(x.lhs, y.rhs) && type(x.rhs, y.lhs));
  }

  // Multiset comparison; greedy suffices because the relation is an equivalence.
  template <class T, class Eq>
  static bool multiset(const std::vector<T>& xs, const std::vector<T>& ys, Eq eq) {
    if (xs.size() != ys.size()) return false;
    std::vector<bool> used(ys.size(), false);
    for (const auto& x : xs) {
      bool found = false;
      for (std::size_t j = 0; j < ys.size() && !found; ++j) {
        if (!used[j] && eq(x, ys[j])) {
          used[j] = true;
          found = true;
        }
      }
      if (!found) return false;
    }
    return true;
  }

  // Merged domains split into their components and empty domains drop out,
  // so (a, b) # c and a # c, b # c, {} # c compare equal.
  static void dom_parts(const TypeP& d, std::vector<TypeP>& out) {
    if (d->tag == TypeTag::DomZero) return;
    if (d->tag == TypeTag::DomMerge) {
      dom_parts(d->left(), out);
      dom_parts(d->right(), out);
      return;
    }
    out.push_back(d);
  }

  static Constraints split(const Constraints& c) {
    Constraints out;
    for (const auto& d : c) {
      std::vector<TypeP> l, r;
      dom_parts(d.lhs, l);
      dom_parts(d.rhs, r);
      for (const auto& x : l)
        for (const auto& y : r) out.push_back(Disjoint{x, y});
    }
    return out;
  }

  bool cstr(const Constraints& a, const Constraints& b) {
    return multiset(split(a), split(b), [&](const Disjoint& x, const Disjoint& y) { return disjoint(x, y); });
  }

  bool states(const TypeP& a, const TypeP& b) {
    std::vector<TypeP> xs, ys;
    flatten_into(a, xs);
    flatten_into(b, ys);
    return multiset(xs, ys, [&](const TypeP& x, const TypeP& y) { return type(x, y); });
  }

  // Existential bindings are matched up to permutation.
  bool arrow_tail(const Type& a, const Type& b) {
    std::vector<const Binding*> av, bv;
    Constraints ac, bc;
    for (const auto& x : a.ex) {
      if (x.tag == BindingTag::Disjoint)
        ac.push_back(Disjoint{x.lhs, x.rhs});
      else
        av.push_back(&x);
    }
    for (const auto& x : b.ex) {
      if (x.tag == BindingTag::Disjoint)
        bc.push_back(Disjoint{x.lhs, x.rhs});
      else
        bv.push_back(&x);
    }
    if (av.size() != bv.size()) return false;
    std::vector<bool> used(bv.size(), false);
    std::function<bool(std::size_t)> go = [&](std::size_t i) -> bool {
      if (i == av.size())
        return cstr(ac, bc) && type(a.post(), b.post()) && type(a.ret(), b.ret());
      for (std::size_t j = 0; j < bv.size(); ++j) {
        if (used[j] || av[i]->tag != bv[j]->tag) continue;
        bool head = av[i]->tag == BindingTag::TypeVar ? kind(av[i]->kind, bv[j]->kind)
                                                      : type(av[i]->type, bv[j]->type);
        if (!head) continue;
        used[j] = true;
        Bind bind(*this, av[i]->id, bv[j]->id);
        if (go(i + 1)) return true;
        used[j] = false;
      }
      return false;
    };
    return go(0);
  }

  std::map<Ident, std::vector<Ident>> left_, right_;
};

}  // namespace

std::string sort_key(const TypeP& t) {
  std::string out;
  key_into(t, out);
  return out;
}

std::vector<TypeP> state_atoms(const TypeP& s) {
  std::vector<TypeP> out;
  flatten_into(s, out);
  return out;
}

TypeP make_state(std::vector<TypeP> atoms) {
  if (atoms.empty()) return ty::st_empty();
  std::vector<std::pair<std::string, TypeP>> keyed;
  keyed.reserve(atoms.size());
  for (auto& a : atoms) keyed.emplace_back(sort_key(a), std::move(a));
  std::stable_sort(keyed.begin(), keyed.end(),
                   [](const auto& x, const auto& y) { return x.first < y.first; });
  TypeP out = keyed.back().second;
  for (std::size_t i = keyed.size() - 1; i-- > 0;) out = ty::st_merge(keyed[i].second, out);
  return out;
}

TypeP dual_of(const TypeP& s) {
  switch (s->tag) {
    case TypeTag::End:
      return s;
    case TypeTag::Dual:
      return s->ses();
    case TypeTag::Send:
    case TypeTag::Recv:
      return ty::message(s->tag == TypeTag::Send ? TypeTag::Recv : TypeTag::Send, s->id, s->shape(),
                         s->state(), s->payload(), dual_of(s->cont()));
    case TypeTag::Choice:
      return ty::branch(dual_of(s->left()), dual_of(s->right()));
    case TypeTag::Branch:
      return ty::choice(dual_of(s->left()), dual_of(s->right()));
    default:
      return ty::dual(s);
  }
}

TypeP normalize(const TypeP& t) { return t ? nf(t) : t; }

KindP normalize(const KindP& k) {
  if (!k) return k;
  if (k->tag == KindTag::Dom) return kd::dom(nf(k->shape));
  if (k->tag == KindTag::Arrow) return kd::arrow(normalize(k->from), normalize(k->to));
  return k;
}

Ctx normalize(const Ctx& g) { return nf_ctx(g); }
Constraints normalize(const Constraints& c) { return nf_cstr(c); }

bool is_normal(const TypeP& t) { return same(normalize(t), t); }

bool alpha_equiv(const TypeP& a, const TypeP& b) { return same(canonicalize(a), canonicalize(b)); }

bool conv_normal(const TypeP& a, const TypeP& b) { return Equiv().type(a, b); }

bool conv(const TypeP& a, const TypeP& b) { return Equiv().type(normalize(a), normalize(b)); }

bool conv_kind(const KindP& a, const KindP& b) { return Equiv().kind(normalize(a), normalize(b)); }

}  // namespace pvgr
