#include "pvgr/ast.hpp"

#include <atomic>

namespace pvgr {

namespace {
std::atomic<std::uint64_t> next_uid{1};
}

Ident fresh_ident(std::string_view base) {
  return Ident{std::string(base), next_uid.fetch_add(1, std::memory_order_relaxed)};
}

std::string debug_name(const Ident& id) {
  return id.uid == 0 ? id.name : id.name + "#" + std::to_string(id.uid);
}

// ---------------------------------------------------------------- kinds

namespace kd {
KindP type() {
  static const KindP k = std::make_shared<Kind>(Kind{KindTag::Type, nullptr, nullptr, nullptr});
  return k;
}
KindP session() {
  static const KindP k = std::make_shared<Kind>(Kind{KindTag::Session, nullptr, nullptr, nullptr});
  return k;
}
KindP state() {
  static const KindP k = std::make_shared<Kind>(Kind{KindTag::State, nullptr, nullptr, nullptr});
  return k;
}
KindP shape() {
  static const KindP k = std::make_shared<Kind>(Kind{KindTag::Shape, nullptr, nullptr, nullptr});
  return k;
}
KindP dom(TypeP shape) {
  return std::make_shared<Kind>(Kind{KindTag::Dom, std::move(shape), nullptr, nullptr});
}
KindP arrow(KindP from, KindP to) {
  return std::make_shared<Kind>(Kind{KindTag::Arrow, nullptr, std::move(from), std::move(to)});
}
}  // namespace kd

Binding Binding::type_var(Ident id, KindP kind) {
  return Binding{BindingTag::TypeVar, std::move(id), std::move(kind), nullptr, nullptr, nullptr};
}
Binding Binding::val_var(Ident id, TypeP type) {
  return Binding{BindingTag::ValVar, std::move(id), nullptr, std::move(type), nullptr, nullptr};
}
Binding Binding::disjoint(TypeP lhs, TypeP rhs) {
  return Binding{BindingTag::Disjoint, Ident{}, nullptr, nullptr, std::move(lhs), std::move(rhs)};
}

Ctx constraints_to_ctx(const Constraints& c) {
  Ctx g;
  for (const auto& d : c) g.push_back(Binding::disjoint(d.lhs, d.rhs));
  return g;
}

// ---------------------------------------------------------------- types

bool is_binary(TypeTag tag) {
  switch (tag) {
    case TypeTag::Pair:
    case TypeTag::Choice:
    case TypeTag::Branch:
    case TypeTag::ShapePair:
    case TypeTag::DomMerge:
    case TypeTag::StMerge:
      return true;
    default:
      return false;
  }
}

bool is_message(TypeTag tag) { return tag == TypeTag::Send || tag == TypeTag::Recv; }

namespace ty {
namespace {
TypeP node(TypeTag tag, std::vector<TypeP> kids = {}) {
  auto t = std::make_shared<Type>();
  t->tag = tag;
  t->kids = std::move(kids);
  return t;
}
TypeP leaf(TypeTag tag) { return node(tag); }
}  // namespace

TypeP var(Ident id) {
  auto t = std::make_shared<Type>();
  t->tag = TypeTag::Var;
  t->id = std::move(id);
  return t;
}
TypeP app(TypeP fn, TypeP arg) { return node(TypeTag::App, {std::move(fn), std::move(arg)}); }
TypeP lam(Ident binder, TypeP shape, TypeP body) {
  auto t = std::make_shared<Type>();
  t->tag = TypeTag::Lam;
  t->id = std::move(binder);
  t->kids = {std::move(shape), std::move(body)};
  return t;
}
TypeP all(Ident binder, KindP kind, Constraints cstr, TypeP body) {
  auto t = std::make_shared<Type>();
  t->tag = TypeTag::All;
  t->id = std::move(binder);
  t->kind = std::move(kind);
  t->cstr = std::move(cstr);
  t->kids = {std::move(body)};
  return t;
}
TypeP arr(TypeP pre, TypeP arg, Ctx ex, TypeP post, TypeP ret) {
  auto t = std::make_shared<Type>();
  t->tag = TypeTag::Arr;
  t->ex = std::move(ex);
  t->kids = {std::move(pre), std::move(arg), std::move(post), std::move(ret)};
  return t;
}
TypeP chan(TypeP dom) { return node(TypeTag::Chan, {std::move(dom)}); }
TypeP access_point(TypeP ses) { return node(TypeTag::AccessPoint, {std::move(ses)}); }
TypeP unit() {
  static const TypeP u = leaf(TypeTag::Unit);
  return u;
}
TypeP pair(TypeP a, TypeP b) { return node(TypeTag::Pair, {std::move(a), std::move(b)}); }
TypeP message(TypeTag tag, Ident binder, TypeP shape, TypeP state, TypeP payload, TypeP cont) {
  auto t = std::make_shared<Type>();
  t->tag = tag;
  t->id = std::move(binder);
  t->kids = {std::move(shape), std::move(state), std::move(payload), std::move(cont)};
  return t;
}
TypeP send(Ident binder, TypeP shape, TypeP state, TypeP payload, TypeP cont) {
  return message(TypeTag::Send, std::move(binder), std::move(shape), std::move(state),
                 std::move(payload), std::move(cont));
}
TypeP recv(Ident binder, TypeP shape, TypeP state, TypeP payload, TypeP cont) {
  return message(TypeTag::Recv, std::move(binder), std::move(shape), std::move(state),
                 std::move(payload), std::move(cont));
}
TypeP choice(TypeP a, TypeP b) { return node(TypeTag::Choice, {std::move(a), std::move(b)}); }
TypeP branch(TypeP a, TypeP b) { return node(TypeTag::Branch, {std::move(a), std::move(b)}); }
TypeP end() {
  static const TypeP e = leaf(TypeTag::End);
  return e;
}
TypeP dual(TypeP s) { return node(TypeTag::Dual, {std::move(s)}); }
TypeP shape_zero() {
  static const TypeP z = leaf(TypeTag::ShapeZero);
  return z;
}
TypeP shape_one() {
  static const TypeP o = leaf(TypeTag::ShapeOne);
  return o;
}
TypeP shape_pair(TypeP a, TypeP b) { return node(TypeTag::ShapePair, {std::move(a), std::move(b)}); }
TypeP dom_zero() {
  static const TypeP z = leaf(TypeTag::DomZero);
  return z;
}
TypeP dom_merge(TypeP a, TypeP b) { return node(TypeTag::DomMerge, {std::move(a), std::move(b)}); }
TypeP dom_proj(Label l, TypeP d) {
  auto t = std::make_shared<Type>();
  t->tag = TypeTag::DomProj;
  t->label = l;
  t->kids = {std::move(d)};
  return t;
}
TypeP st_empty() {
  static const TypeP e = leaf(TypeTag::StEmpty);
  return e;
}
TypeP st_bind(TypeP dom, TypeP ses) { return node(TypeTag::StBind, {std::move(dom), std::move(ses)}); }
TypeP st_merge(TypeP a, TypeP b) { return node(TypeTag::StMerge, {std::move(a), std::move(b)}); }
TypeP binary(TypeTag tag, TypeP a, TypeP b) { return node(tag, {std::move(a), std::move(b)}); }

TypeP with_kids(const Type& n, std::vector<TypeP> kids) {
  auto t = std::make_shared<Type>(n);
  t->kids = std::move(kids);
  return t;
}
}  // namespace ty

// ---------------------------------------------------------------- terms

ValueP mk_value(decltype(Value::node) node, SourceSpan span) {
  return std::make_shared<Value>(Value{std::move(node), std::move(span)});
}
ExprP mk_expr(decltype(Expr::node) node, SourceSpan span) {
  return std::make_shared<Expr>(Expr{std::move(node), std::move(span)});
}
ConfigP mk_config(decltype(Config::node) node, SourceSpan span) {
  return std::make_shared<Config>(Config{std::move(node), std::move(span)});
}

namespace vl {
ValueP var(Ident id) { return mk_value(val::Var{std::move(id)}); }
ValueP chan(TypeP dom) { return mk_value(val::Chan{std::move(dom)}); }
ValueP unit() { return mk_value(val::Unit{}); }
ValueP pair(ValueP a, ValueP b) { return mk_value(val::Pair{std::move(a), std::move(b)}); }
ValueP abs(TypeP pre, Ident param, TypeP param_ty, ExprP body) {
  return mk_value(val::Abs{std::move(pre), std::move(param), std::move(param_ty), std::move(body)});
}
ValueP tabs(Ident binder, KindP kind, Constraints cstr, ValueP body) {
  return mk_value(val::TAbs{std::move(binder), std::move(kind), std::move(cstr), std::move(body)});
}
}  // namespace vl

namespace xp {
ExprP val(ValueP v) { return mk_expr(ex::Val{std::move(v)}); }
ExprP let(Ident x, ExprP bound, ExprP body) {
  return mk_expr(ex::Let{std::move(x), std::move(bound), std::move(body)});
}
}  // namespace xp

// --------------------------------------------------- free variables

namespace {

struct FreeVars {
  IdentSet out;
  std::map<Ident, int> bound;

  void bind(const Ident& x) { ++bound[x]; }
  void unbind(const Ident& x) {
    if (--bound[x] == 0) bound.erase(x);
  }
  void use(const Ident& x) {
    if (!bound.contains(x)) out.insert(x);
  }

  void kind(const KindP& k) {
    if (!k) return;
    if (k->tag == KindTag::Dom) type(k->shape);
    if (k->tag == KindTag::Arrow) {
      kind(k->from);
      kind(k->to);
    }
  }

  void cstr(const Constraints& c) {
    for (const auto& d : c) {
      type(d.lhs);
      type(d.rhs);
    }
  }

  // Visits the telescope, leaving its binders bound; returns them for unbinding.
  std::vector<Ident> tele(const Ctx& g) {
    std::vector<Ident> introduced;
    for (const auto& b : g) {
      switch (b.tag) {
        case BindingTag::TypeVar:
          kind(b.kind);
          bind(b.id);
          introduced.push_back(b.id);
          break;
        case BindingTag::ValVar:
          type(b.type);
          bind(b.id);
          introduced.push_back(b.id);
          break;
        case BindingTag::Disjoint:
          type(b.lhs);
          type(b.rhs);
          break;
      }
    }
    return introduced;
  }

  void type(const TypeP& t) {
    if (!t) return;
    switch (t->tag) {
      case TypeTag::Var:
        use(t->id);
        return;
      case TypeTag::Lam:
        type(t->shape());
        bind(t->id);
        type(t->body());
        unbind(t->id);
        return;
      case TypeTag::All:
        kind(t->kind);
        bind(t->id);
        cstr(t->cstr);
        type(t->body());
        unbind(t->id);
        return;
      case TypeTag::Arr: {
        type(t->pre());
        type(t->arg());
        auto introduced = tele(t->ex);
        type(t->post());
        type(t->ret());
        for (const auto& x : introduced) unbind(x);
        return;
      }
      case TypeTag::Send:
      case TypeTag::Recv:
        type(t->shape());
        type(t->cont());
        bind(t->id);
        type(t->state());
        type(t->payload());
        unbind(t->id);
        return;
      default:
        for (const auto& k : t->kids) type(k);
    }
  }

  void value(const ValueP& v) {
    std::visit(overloaded{
                   [&](const val::Var& x) { use(x.id); },
                   [&](const val::Chan& c) { type(c.dom); },
                   [&](const val::Unit&) {},
                   [&](const val::Pair& p) {
                     value(p.fst);
                     value(p.snd);
                   },
                   [&](const val::Abs& a) {
                     type(a.pre);
                     type(a.param_ty);
                     bind(a.param);
                     expr(a.body);
                     unbind(a.param);
                   },
                   [&](const val::TAbs& a) {
                     kind(a.kind);
                     bind(a.binder);
                     cstr(a.cstr);
                     value(a.body);
                     unbind(a.binder);
                   },
               },
               v->node);
  }

  void expr(const ExprP& e) {
    std::visit(overloaded{
                   [&](const ex::Val& x) { value(x.v); },
                   [&](const ex::Let& x) {
                     expr(x.bound);
                     bind(x.x);
                     expr(x.body);
                     unbind(x.x);
                   },
                   [&](const ex::App& x) {
                     value(x.fn);
                     value(x.arg);
                   },
                   [&](const ex::Proj& x) { value(x.v); },
                   [&](const ex::TApp& x) {
                     value(x.fn);
                     type(x.arg);
                   },
                   [&](const ex::Fork& x) { value(x.v); },
                   [&](const ex::New& x) { type(x.ses); },
                   [&](const ex::Accept& x) { value(x.v); },
                   [&](const ex::Request& x) { value(x.v); },
                   [&](const ex::Send& x) {
                     value(x.payload);
                     value(x.chan);
                   },
                   [&](const ex::Recv& x) { value(x.chan); },
                   [&](const ex::Select& x) { value(x.chan); },
                   [&](const ex::Case& x) {
                     value(x.chan);
                     expr(x.left);
                     expr(x.right);
                   },
                   [&](const ex::Close& x) { value(x.chan); },
               },
               e->node);
  }

  void config(const ConfigP& c) {
    std::visit(overloaded{
                   [&](const cfg::Proc& p) { expr(p.e); },
                   [&](const cfg::Par& p) {
                     config(p.left);
                     config(p.right);
                   },
                   [&](const cfg::NuChan& n) {
                     type(n.ses);
                     bind(n.end1);
                     bind(n.end2);
                     config(n.body);
                     unbind(n.end1);
                     unbind(n.end2);
                   },
                   [&](const cfg::NuAccess& n) {
                     type(n.ses);
                     bind(n.x);
                     config(n.body);
                     unbind(n.x);
                   },
               },
               c->node);
  }
};

}  // namespace

IdentSet free_vars(const TypeP& t) {
  FreeVars fv;
  fv.type(t);
  return std::move(fv.out);
}
IdentSet free_vars(const KindP& k) {
  FreeVars fv;
  fv.kind(k);
  return std::move(fv.out);
}
IdentSet free_vars(const Ctx& g) {
  FreeVars fv;
  fv.tele(g);
  return std::move(fv.out);
}
IdentSet free_vars(const ValueP& v) {
  FreeVars fv;
  fv.value(v);
  return std::move(fv.out);
}
IdentSet free_vars(const ExprP& e) {
  FreeVars fv;
  fv.expr(e);
  return std::move(fv.out);
}
IdentSet free_vars(const ConfigP& c) {
  FreeVars fv;
  fv.config(c);
  return std::move(fv.out);
}

bool occurs_free(const Ident& x, const TypeP& t) { return free_vars(t).contains(x); }

IdentSet bound_by(const Ctx& g) {
  IdentSet out;
  for (const auto& b : g)
    if (b.tag != BindingTag::Disjoint) out.insert(b.id);
  return out;
}

// ------------------------------------------------------- substitution

namespace {

// Capture-avoiding: a binder is renamed only when it would capture a free
// variable of the substituted range, or when it shadows a substituted name.
class Substituter {
 public:
  explicit Substituter(const Subst& s) : s_(s) {
    for (const auto& [_, t] : s_.types) {
      auto fv = free_vars(t);
      range_fv_.insert(fv.begin(), fv.end());
    }
    for (const auto& [_, v] : s_.values) {
      auto fv = free_vars(v);
      range_fv_.insert(fv.begin(), fv.end());
    }
  }

  TypeP type(const TypeP& t) {
    if (!t || s_.empty()) return t;
    switch (t->tag) {
      case TypeTag::Var: {
        auto it = s_.types.find(t->id);
        return it == s_.types.end() ? t : it->second;
      }
      case TypeTag::Lam: {
        auto shape = type(t->shape());
        Scope sc(*this);
        auto b = sc.enter_type(t->id);
        auto body = type(t->body());
        return ty::lam(b, shape, body);
      }
      case TypeTag::All: {
        auto k = kind(t->kind);
        Scope sc(*this);
        auto b = sc.enter_type(t->id);
        auto c = cstr(t->cstr);
        auto body = type(t->body());
        return ty::all(b, k, c, body);
      }
      case TypeTag::Arr: {
        auto pre = type(t->pre());
        auto arg = type(t->arg());
        Scope sc(*this);
        auto g = tele(t->ex, sc);
        auto post = type(t->post());
        auto ret = type(t->ret());
        return ty::arr(pre, arg, g, post, ret);
      }
      case TypeTag::Send:
      case TypeTag::Recv: {
        auto shape = type(t->shape());
        auto cont = type(t->cont());
        Scope sc(*this);
        auto b = sc.enter_type(t->id);
        auto st = type(t->state());
        auto pl = type(t->payload());
        return ty::message(t->tag, b, shape, st, pl, cont);
      }
      default: {
        if (t->kids.empty()) return t;
        std::vector<TypeP> kids;
        kids.reserve(t->kids.size());
        bool changed = false;
        for (const auto& k : t->kids) {
          kids.push_back(type(k));
          changed |= kids.back() != k;
        }
        return changed ? ty::with_kids(*t, std::move(kids)) : t;
      }
    }
  }

  KindP kind(const KindP& k) {
    if (!k || s_.empty()) return k;
    switch (k->tag) {
      case KindTag::Dom: {
        auto sh = type(k->shape);
        return sh == k->shape ? k : kd::dom(sh);
      }
      case KindTag::Arrow: {
        auto f = kind(k->from);
        auto t = kind(k->to);
        return (f == k->from && t == k->to) ? k : kd::arrow(f, t);
      }
      default:
        return k;
    }
  }

  Constraints cstr(const Constraints& c) {
    Constraints out;
    out.reserve(c.size());
    for (const auto& d : c) out.push_back(Disjoint{type(d.lhs), type(d.rhs)});
    return out;
  }

  class Scope;

  Ctx tele(const Ctx& g, Scope& sc);

  ValueP value(const ValueP& v) {
    if (s_.empty()) return v;
    return std::visit(
        overloaded{
            [&](const val::Var& x) -> ValueP {
              auto it = s_.values.find(x.id);
              return it == s_.values.end() ? v : it->second;
            },
            [&](const val::Chan& c) -> ValueP { return mk_value(val::Chan{type(c.dom)}, v->span); },
            [&](const val::Unit&) -> ValueP { return v; },
            [&](const val::Pair& p) -> ValueP {
              return mk_value(val::Pair{value(p.fst), value(p.snd)}, v->span);
            },
            [&](const val::Abs& a) -> ValueP {
              auto pre = type(a.pre);
              auto pty = type(a.param_ty);
              Scope sc(*this);
              auto x = sc.enter_value(a.param);
              auto body = expr(a.body);
              return mk_value(val::Abs{pre, x, pty, body}, v->span);
            },
            [&](const val::TAbs& a) -> ValueP {
              auto k = kind(a.kind);
              Scope sc(*this);
              auto b = sc.enter_type(a.binder);
              auto c = cstr(a.cstr);
              auto body = value(a.body);
              return mk_value(val::TAbs{b, k, c, body}, v->span);
            },
        },
        v->node);
  }

  ExprP expr(const ExprP& e) {
    if (s_.empty()) return e;
    auto sp = e->span;
    return std::visit(
        overloaded{
            [&](const ex::Val& x) { return mk_expr(ex::Val{value(x.v)}, sp); },
            [&](const ex::Let& x) {
              auto bound = expr(x.bound);
              Scope sc(*this);
              auto b = sc.enter_value(x.x);
              auto body = expr(x.body);
              return mk_expr(ex::Let{b, bound, body}, sp);
            },
            [&](const ex::App& x) { return mk_expr(ex::App{value(x.fn), value(x.arg)}, sp); },
            [&](const ex::Proj& x) { return mk_expr(ex::Proj{x.l, value(x.v)}, sp); },
            [&](const ex::TApp& x) { return mk_expr(ex::TApp{value(x.fn), type(x.arg)}, sp); },
            [&](const ex::Fork& x) { return mk_expr(ex::Fork{value(x.v)}, sp); },
            [&](const ex::New& x) { return mk_expr(ex::New{type(x.ses)}, sp); },
            [&](const ex::Accept& x) { return mk_expr(ex::Accept{value(x.v)}, sp); },
            [&](const ex::Request& x) { return mk_expr(ex::Request{value(x.v)}, sp); },
            [&](const ex::Send& x) { return mk_expr(ex::Send{value(x.payload), value(x.chan)}, sp); },
            [&](const ex::Recv& x) { return mk_expr(ex::Recv{value(x.chan)}, sp); },
            [&](const ex::Select& x) { return mk_expr(ex::Select{x.l, value(x.chan)}, sp); },
            [&](const ex::Case& x) {
              return mk_expr(ex::Case{value(x.chan), expr(x.left), expr(x.right)}, sp);
            },
            [&](const ex::Close& x) { return mk_expr(ex::Close{value(x.chan)}, sp); },
        },
        e->node);
  }

  ConfigP config(const ConfigP& c) {
    if (s_.empty()) return c;
    auto sp = c->span;
    return std::visit(overloaded{
                          [&](const cfg::Proc& p) { return mk_config(cfg::Proc{expr(p.e)}, sp); },
                          [&](const cfg::Par& p) {
                            return mk_config(cfg::Par{config(p.left), config(p.right)}, sp);
                          },
                          [&](const cfg::NuChan& n) {
                            auto ses = type(n.ses);
                            Scope sc(*this);
                            auto a = sc.enter_type(n.end1);
                            auto b = sc.enter_type(n.end2);
                            return mk_config(cfg::NuChan{a, b, ses, n.closed, config(n.body)}, sp);
                          },
                          [&](const cfg::NuAccess& n) {
                            auto ses = type(n.ses);
                            Scope sc(*this);
                            auto x = sc.enter_value(n.x);
                            return mk_config(cfg::NuAccess{x, ses, config(n.body)}, sp);
                          },
                      },
                      c->node);
  }

  // Restores the substitution when a binder goes out of scope.
  class Scope {
   public:
    explicit Scope(Substituter& owner) : owner_(owner), saved_(owner.s_) {}
    ~Scope() { owner_.s_ = std::move(saved_); }
    Scope(const Scope&) = delete;
    Scope& operator=(const Scope&) = delete;

    Ident enter_type(const Ident& b) {
      owner_.s_.types.erase(b);
      owner_.s_.values.erase(b);
      if (!owner_.range_fv_.contains(b)) return b;
      auto nb = fresh_ident(b.name);
      owner_.s_.types[b] = ty::var(nb);
      return nb;
    }
    Ident enter_value(const Ident& b) {
      owner_.s_.types.erase(b);
      owner_.s_.values.erase(b);
      if (!owner_.range_fv_.contains(b)) return b;
      auto nb = fresh_ident(b.name);
      owner_.s_.values[b] = vl::var(nb);
      return nb;
    }

   private:
    Substituter& owner_;
    Subst saved_;
  };

 private:
  Subst s_;
  IdentSet range_fv_;
};

Ctx Substituter::tele(const Ctx& g, Scope& sc) {
  Ctx out;
  out.reserve(g.size());
  for (const auto& b : g) {
    switch (b.tag) {
      case BindingTag::TypeVar: {
        auto k = kind(b.kind);
        out.push_back(Binding::type_var(sc.enter_type(b.id), k));
        break;
      }
      case BindingTag::ValVar: {
        auto t = type(b.type);
        out.push_back(Binding::val_var(sc.enter_value(b.id), t));
        break;
      }
      case BindingTag::Disjoint:
        out.push_back(Binding::disjoint(type(b.lhs), type(b.rhs)));
        break;
    }
  }
  return out;
}

}  // namespace

TypeP subst(const Subst& s, const TypeP& t) { return Substituter(s).type(t); }
KindP subst(const Subst& s, const KindP& k) { return Substituter(s).kind(k); }
Ctx subst(const Subst& s, const Ctx& g) {
  Substituter sub(s);
  Substituter::Scope sc(sub);
  return sub.tele(g, sc);
}
Constraints subst(const Subst& s, const Constraints& c) { return Substituter(s).cstr(c); }
ValueP subst(const Subst& s, const ValueP& v) { return Substituter(s).value(v); }
ExprP subst(const Subst& s, const ExprP& e) { return Substituter(s).expr(e); }
ConfigP subst(const Subst& s, const ConfigP& c) { return Substituter(s).config(c); }

TypeP subst1(const Ident& x, const TypeP& by, const TypeP& t) {
  Subst s;
  s.types[x] = by;
  return subst(s, t);
}

ExprP subst1(const Ident& x, const ValueP& by, const ExprP& e) {
  Subst s;
  s.values[x] = by;
  return subst(s, e);
}

// --------------------------------------------------- canonical forms

namespace {

class Canon {
 public:
  TypeP type(const TypeP& t) {
    if (!t) return t;
    switch (t->tag) {
      case TypeTag::Var: {
        auto it = env_.find(t->id);
        return it == env_.end() ? t : ty::var(it->second.back());
      }
      case TypeTag::Lam: {
        auto shape = type(t->shape());
        auto b = bind(t->id);
        auto body = type(t->body());
        unbind(t->id);
        return ty::lam(b, shape, body);
      }
      case TypeTag::All: {
        auto k = kind(t->kind);
        auto b = bind(t->id);
        auto c = cstr(t->cstr);
        auto body = type(t->body());
        unbind(t->id);
        return ty::all(b, k, c, body);
      }
      case TypeTag::Arr: {
        auto pre = type(t->pre());
        auto arg = type(t->arg());
        std::vector<Ident> introduced;
        auto g = tele(t->ex, introduced);
        auto post = type(t->post());
        auto ret = type(t->ret());
        for (const auto& x : introduced) unbind(x);
        return ty::arr(pre, arg, g, post, ret);
      }
      case TypeTag::Send:
      case TypeTag::Recv: {
        auto shape = type(t->shape());
        auto b = bind(t->id);
        auto st = type(t->state());
        auto pl = type(t->payload());
        unbind(t->id);
        auto cont = type(t->cont());
        return ty::message(t->tag, b, shape, st, pl, cont);
      }
      default: {
        std::vector<TypeP> kids;
        for (const auto& k : t->kids) kids.push_back(type(k));
        return ty::with_kids(*t, std::move(kids));
      }
    }
  }

  KindP kind(const KindP& k) {
    if (!k) return k;
    if (k->tag == KindTag::Dom) return kd::dom(type(k->shape));
    if (k->tag == KindTag::Arrow) {
      auto f = kind(k->from);
      return kd::arrow(f, kind(k->to));
    }
    return k;
  }

  Constraints cstr(const Constraints& c) {
    Constraints out;
    for (const auto& d : c) {
      auto l = type(d.lhs);
      out.push_back(Disjoint{l, type(d.rhs)});
    }
    return out;
  }

  Ctx tele(const Ctx& g, std::vector<Ident>& introduced) {
    Ctx out;
    for (const auto& b : g) {
      switch (b.tag) {
        case BindingTag::TypeVar: {
          auto k = kind(b.kind);
          out.push_back(Binding::type_var(bind(b.id), k));
          introduced.push_back(b.id);
          break;
        }
        case BindingTag::ValVar: {
          auto t = type(b.type);
          out.push_back(Binding::val_var(bind(b.id), t));
          introduced.push_back(b.id);
          break;
        }
        case BindingTag::Disjoint: {
          auto l = type(b.lhs);
          out.push_back(Binding::disjoint(l, type(b.rhs)));
          break;
        }
      }
    }
    return out;
  }

  ValueP value(const ValueP& v) {
    return std::visit(
        overloaded{
            [&](const val::Var& x) -> ValueP {
              auto it = env_.find(x.id);
              return it == env_.end() ? v : vl::var(it->second.back());
            },
            [&](const val::Chan& c) -> ValueP { return vl::chan(type(c.dom)); },
            [&](const val::Unit&) -> ValueP { return vl::unit(); },
            [&](const val::Pair& p) -> ValueP {
              auto a = value(p.fst);
              return vl::pair(a, value(p.snd));
            },
            [&](const val::Abs& a) -> ValueP {
              auto pre = type(a.pre);
              auto pty = type(a.param_ty);
              auto x = bind(a.param);
              auto body = expr(a.body);
              unbind(a.param);
              return vl::abs(pre, x, pty, body);
            },
            [&](const val::TAbs& a) -> ValueP {
              auto k = kind(a.kind);
              auto b = bind(a.binder);
              auto c = cstr(a.cstr);
              auto body = value(a.body);
              unbind(a.binder);
              return vl::tabs(b, k, c, body);
            },
        },
        v->node);
  }

  ExprP expr(const ExprP& e) {
    return std::visit(
        overloaded{
            [&](const ex::Val& x) { return mk_expr(ex::Val{value(x.v)}); },
            [&](const ex::Let& x) {
              auto bound = expr(x.bound);
              auto b = bind(x.x);
              auto body = expr(x.body);
              unbind(x.x);
              return mk_expr(ex::Let{b, bound, body});
            },
            [&](const ex::App& x) {
              auto f = value(x.fn);
              return mk_expr(ex::App{f, value(x.arg)});
            },
            [&](const ex::Proj& x) { return mk_expr(ex::Proj{x.l, value(x.v)}); },
            [&](const ex::TApp& x) {
              auto f = value(x.fn);
              return mk_expr(ex::TApp{f, type(x.arg)});
            },
            [&](const ex::Fork& x) { return mk_expr(ex::Fork{value(x.v)}); },
            [&](const ex::New& x) { return mk_expr(ex::New{type(x.ses)}); },
            [&](const ex::Accept& x) { return mk_expr(ex::Accept{value(x.v)}); },
            [&](const ex::Request& x) { return mk_expr(ex::Request{value(x.v)}); },
            [&](const ex::Send& x) {
              auto p = value(x.payload);
              return mk_expr(ex::Send{p, value(x.chan)});
            },
            [&](const ex::Recv& x) { return mk_expr(ex::Recv{value(x.chan)}); },
            [&](const ex::Select& x) { return mk_expr(ex::Select{x.l, value(x.chan)}); },
            [&](const ex::Case& x) {
              auto c = value(x.chan);
              auto l = expr(x.left);
              return mk_expr(ex::Case{c, l, expr(x.right)});
            },
            [&](const ex::Close& x) { return mk_expr(ex::Close{value(x.chan)}); },
        },
        e->node);
  }

  ConfigP config(const ConfigP& c) {
    return std::visit(overloaded{
                          [&](const cfg::Proc& p) { return mk_config(cfg::Proc{expr(p.e)}); },
                          [&](const cfg::Par& p) {
                            auto l = config(p.left);
                            return mk_config(cfg::Par{l, config(p.right)});
                          },
                          [&](const cfg::NuChan& n) {
                            auto ses = type(n.ses);
                            auto a = bind(n.end1);
                            auto b = bind(n.end2);
                            auto body = config(n.body);
                            unbind(n.end1);
                            unbind(n.end2);
                            return mk_config(cfg::NuChan{a, b, ses, n.closed, body});
                          },
                          [&](const cfg::NuAccess& n) {
                            auto ses = type(n.ses);
                            auto x = bind(n.x);
                            auto body = config(n.body);
                            unbind(n.x);
                            return mk_config(cfg::NuAccess{x, ses, body});
                          },
                      },
                      c->node);
  }

 private:
  Ident bind(const Ident& x) {
    Ident c{"#", ++counter_};
    env_[x].push_back(c);
    return c;
  }
  void unbind(const Ident& x) {
    auto it = env_.find(x);
    it->second.pop_back();
    if (it->second.empty()) env_.erase(it);
  }

  std::map<Ident, std::vector<Ident>> env_;
  std::uint64_t counter_ = 0;
};

}  // namespace

TypeP canonicalize(const TypeP& t) { return Canon().type(t); }
KindP canonicalize(const KindP& k) { return Canon().kind(k); }
ValueP canonicalize(const ValueP& v) { return Canon().value(v); }
ExprP canonicalize(const ExprP& e) { return Canon().expr(e); }
ConfigP canonicalize(const ConfigP& c) { return Canon().config(c); }

// ----------------------------------------------------- structural equality

bool same(const KindP& a, const KindP& b) {
  if (a == b) return true;
  if (!a || !b || a->tag != b->tag) return false;
  switch (a->tag) {
    case KindTag::Dom:
      return same(a->shape, b->shape);
    case KindTag::Arrow:
      return same(a->from, b->from) && same(a->to, b->to);
    default:
      return true;
  }
}

bool same(const Constraints& a, const Constraints& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!same(a[i].lhs, b[i].lhs) || !same(a[i].rhs, b[i].rhs)) return false;
  return true;
}

bool same(const Ctx& a, const Ctx& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& x = a[i];
    const auto& y = b[i];
    if (x.tag != y.tag) return false;
    switch (x.tag) {
      case BindingTag::TypeVar:
        if (x.id != y.id || !same(x.kind, y.kind)) return false;
        break;
      case BindingTag::ValVar:
        if (x.id != y.id || !same(x.type, y.type)) return false;
        break;
      case BindingTag::Disjoint:
        if (!same(x.lhs, y.lhs) || !same(x.rhs, y.rhs)) return false;
        break;
    }
  }
  return true;
}

bool same(const TypeP& a, const TypeP& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->tag != b->tag || a->id != b->id || a->label != b->label) return false;
  if (a->kids.size() != b->kids.size()) return false;
  if (!same(a->kind, b->kind) || !same(a->cstr, b->cstr) || !same(a->ex, b->ex)) return false;
  for (std::size_t i = 0; i < a->kids.size(); ++i)
    if (!same(a->kids[i], b->kids[i])) return false;
  return true;
}

bool same(const ValueP& a, const ValueP& b) {
  if (a == b) return true;
  if (!a || !b || a->node.index() != b->node.index()) return false;
  return std::visit(
      overloaded{
          [&](const val::Var& x) { return x.id == std::get<val::Var>(b->node).id; },
          [&](const val::Chan& x) { return same(x.dom, std::get<val::Chan>(b->node).dom); },
          [&](const val::Unit&) { return true; },
          [&](const val::Pair& x) {
            const auto& y = std::get<val::Pair>(b->node);
            return same(x.fst, y.fst) && same(x.snd, y.snd);
          },
          [&](const val::Abs& x) {
            const auto& y = std::get<val::Abs>(b->node);
            return x.param == y.param && same(x.pre, y.pre) && same(x.param_ty, y.param_ty) &&
                   same(x.body, y.body);
          },
          [&](const val::TAbs& x) {
            const auto& y = std::get<val::TAbs>(b->node);
            return x.binder == y.binder && same(x.kind, y.kind) && same(x.cstr, y.cstr) &&
                   same(x.body, y.body);
          },
      },
      a->node);
}

bool same(const ExprP& a, const ExprP& b) {
  if (a == b) return true;
  if (!a || !b || a->node.index() != b->node.index()) return false;
  return std::visit(
      overloaded{
          [&](const ex::Val& x) { return same(x.v, std::get<ex::Val>(b->node).v); },
          [&](const ex::Let& x) {
            const auto& y = std::get<ex::Let>(b->node);
            return x.x == y.x && same(x.bound, y.bound) && same(x.body, y.body);
          },
          [&](const ex::App& x) {
            const auto& y = std::get<ex::App>(b->node);
            return same(x.fn, y.fn) && same(x.arg, y.arg);
          },
          [&](const ex::Proj& x) {
            const auto& y = std::get<ex::Proj>(b->node);
            return x.l == y.l && same(x.v, y.v);
          },
          [&](const ex::TApp& x) {
            const auto& y = std::get<ex::TApp>(b->node);
            return same(x.fn, y.fn) && same(x.arg, y.arg);
          },
          [&](const ex::Fork& x) { return same(x.v, std::get<ex::Fork>(b->node).v); },
          [&](const ex::New& x) { return same(x.ses, std::get<ex::New>(b->node).ses); },
          [&](const ex::Accept& x) { return same(x.v, std::get<ex::Accept>(b->node).v); },
          [&](const ex::Request& x) { return same(x.v, std::get<ex::Request>(b->node).v); },
          [&](const ex::Send& x) {
            const auto& y = std::get<ex::Send>(b->node);
            return same(x.payload, y.payload) && same(x.chan, y.chan);
          },
          [&](const ex::Recv& x) { return same(x.chan, std::get<ex::Recv>(b->node).chan); },
          [&](const ex::Select& x) {
            const auto& y = std::get<ex::Select>(b->node);
            return x.l == y.l && same(x.chan, y.chan);
          },
          [&](const ex::Case& x) {
            const auto& y = std::get<ex::Case>(b->node);
            return same(x.chan, y.chan) && same(x.left, y.left) && same(x.right, y.right);
          },
          [&](const ex::Close& x) { return same(x.chan, std::get<ex::Close>(b->node).chan); },
      },
      a->node);
}

bool same(const ConfigP& a, const ConfigP& b) {
  if (a == b) return true;
  if (!a || !b || a->node.index() != b->node.index()) return false;
  return std::visit(overloaded{
                        [&](const cfg::Proc& x) { return same(x.e, std::get<cfg::Proc>(b->node).e); },
                        [&](const cfg::Par& x) {
                          const auto& y = std::get<cfg::Par>(b->node);
                          return same(x.left, y.left) && same(x.right, y.right);
                        },
                        [&](const cfg::NuChan& x) {
                          const auto& y = std::get<cfg::NuChan>(b->node);
                          return x.end1 == y.end1 && x.end2 == y.end2 && x.closed == y.closed &&
                                 same(x.ses, y.ses) && same(x.body, y.body);
                        },
                        [&](const cfg::NuAccess& x) {
                          const auto& y = std::get<cfg::NuAccess>(b->node);
                          return x.x == y.x && same(x.ses, y.ses) && same(x.body, y.body);
                        },
                    },
                    a->node);
}

std::size_t node_count(const TypeP& t) {
  if (!t) return 0;
  std::size_t n = 1;
  for (const auto& k : t->kids) n += node_count(k);
  for (const auto& d : t->cstr) n += node_count(d.lhs) + node_count(d.rhs);
  for (const auto& b : t->ex) {
    if (b.tag == BindingTag::Disjoint) n += node_count(b.lhs) + node_count(b.rhs);
    if (b.tag == BindingTag::ValVar) n += node_count(b.type);
  }
  return n;
}

}  // namespace pvgr
