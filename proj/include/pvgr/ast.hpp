#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace pvgr {

// Parsed binders get a nonzero uid; uid 0 marks a name that was never bound.
struct Ident {
  std::string name;
  std::uint64_t uid = 0;

  bool operator==(const Ident&) const = default;
  auto operator<=>(const Ident&) const = default;
};

Ident fresh_ident(std::string_view base);
std::string debug_name(const Ident& id);

enum class Label : std::uint8_t { One = 1, Two = 2 };

inline Label other(Label l) { return l == Label::One ? Label::Two : Label::One; }
inline int index_of(Label l) { return l == Label::One ? 0 : 1; }

struct SourceSpan {
  std::shared_ptr<const std::string> file;
  std::size_t begin = 0;
  std::size_t end = 0;
  int line = 0;
  int column = 0;

  bool known() const { return line > 0; }
};

struct Type;
struct Kind;
struct Value;
struct Expr;
struct Config;
using TypeP = std::shared_ptr<const Type>;
using KindP = std::shared_ptr<const Kind>;
using ValueP = std::shared_ptr<const Value>;
using ExprP = std::shared_ptr<const Expr>;
using ConfigP = std::shared_ptr<const Config>;

// ---------------------------------------------------------------- kinds

enum class KindTag { Type, Session, State, Shape, Dom, Arrow };

struct Kind {
  KindTag tag;
  TypeP shape;  // Dom
  KindP from;   // Arrow
  KindP to;     // Arrow
};

namespace kd {
KindP type();
KindP session();
KindP state();
KindP shape();
KindP dom(TypeP shape);
KindP arrow(KindP from, KindP to);
}  // namespace kd

// ------------------------------------------------------------- contexts

struct Disjoint {
  TypeP lhs;
  TypeP rhs;
};
using Constraints = std::vector<Disjoint>;

enum class BindingTag { TypeVar, ValVar, Disjoint };

struct Binding {
  BindingTag tag;
  Ident id;     // TypeVar, ValVar
  KindP kind;   // TypeVar
  TypeP type;   // ValVar
  TypeP lhs;    // Disjoint
  TypeP rhs;    // Disjoint

  static Binding type_var(Ident id, KindP kind);
  static Binding val_var(Ident id, TypeP type);
  static Binding disjoint(TypeP lhs, TypeP rhs);
};
using Ctx = std::vector<Binding>;

Ctx constraints_to_ctx(const Constraints& c);

// ---------------------------------------------------------------- types

enum class TypeTag {
  Var, App, Lam, All, Arr, Chan, AccessPoint, Unit, Pair,
  Send, Recv, Choice, Branch, End, Dual,
  ShapeZero, ShapeOne, ShapePair,
  DomZero, DomMerge, DomProj,
  StEmpty, StBind, StMerge
};

// One node type for every type-level category; kinding tells them apart.
// Child layout per tag:
//   App         fn, arg
//   Lam         shape, body          (id binds in body)
//   All         body                 (id binds in cstr and body)
//   Arr         pre, arg, post, ret  (ex binds in post and ret)
//   Send/Recv   shape, state, payload, cont   (id binds in state and payload)
//   Chan        dom
//   AccessPoint ses
//   Dual        ses
//   DomProj     dom
//   StBind      dom, ses
//   binary      left, right          (Pair Choice Branch ShapePair DomMerge StMerge)
struct Type {
  TypeTag tag;
  Ident id;
  Label label = Label::One;
  KindP kind;
  Constraints cstr;
  Ctx ex;
  std::vector<TypeP> kids;

  const TypeP& left() const { return kids[0]; }
  const TypeP& right() const { return kids[1]; }
  const TypeP& fn() const { return kids[0]; }
  const TypeP& arg() const { return kids[1]; }
  const TypeP& shape() const { return kids[0]; }
  const TypeP& body() const { return tag == TypeTag::All ? kids[0] : kids[1]; }
  const TypeP& pre() const { return kids[0]; }
  const TypeP& post() const { return kids[2]; }
  const TypeP& ret() const { return kids[3]; }
  const TypeP& state() const { return kids[1]; }
  const TypeP& payload() const { return kids[2]; }
  const TypeP& cont() const { return kids[3]; }
  const TypeP& dom() const { return kids[0]; }
  const TypeP& ses() const { return tag == TypeTag::StBind ? kids[1] : kids[0]; }
};

bool is_binary(TypeTag tag);
bool is_message(TypeTag tag);  // Send or Recv

namespace ty {
TypeP var(Ident id);
TypeP app(TypeP fn, TypeP arg);
TypeP lam(Ident binder, TypeP shape, TypeP body);
TypeP all(Ident binder, KindP kind, Constraints cstr, TypeP body);
TypeP arr(TypeP pre, TypeP arg, Ctx ex, TypeP post, TypeP ret);
TypeP chan(TypeP dom);
TypeP access_point(TypeP ses);
TypeP unit();
TypeP pair(TypeP a, TypeP b);
TypeP send(Ident binder, TypeP shape, TypeP state, TypeP payload, TypeP cont);
TypeP recv(Ident binder, TypeP shape, TypeP state, TypeP payload, TypeP cont);
TypeP message(TypeTag tag, Ident binder, TypeP shape, TypeP state, TypeP payload, TypeP cont);
TypeP choice(TypeP a, TypeP b);
TypeP branch(TypeP a, TypeP b);
TypeP end();
TypeP dual(TypeP s);
TypeP shape_zero();
TypeP shape_one();
TypeP shape_pair(TypeP a, TypeP b);
TypeP dom_zero();
TypeP dom_merge(TypeP a, TypeP b);
TypeP dom_proj(Label l, TypeP d);
TypeP st_empty();
TypeP st_bind(TypeP dom, TypeP ses);
TypeP st_merge(TypeP a, TypeP b);
TypeP binary(TypeTag tag, TypeP a, TypeP b);
TypeP with_kids(const Type& node, std::vector<TypeP> kids);
}  // namespace ty

// ---------------------------------------------------------- terms

namespace val {
struct Var { Ident id; };
struct Chan { TypeP dom; };
struct Unit {};
struct Pair { ValueP fst, snd; };
struct Abs { TypeP pre; Ident param; TypeP param_ty; ExprP body; };
struct TAbs { Ident binder; KindP kind; Constraints cstr; ValueP body; };
}  // namespace val

struct Value {
  std::variant<val::Var, val::Chan, val::Unit, val::Pair, val::Abs, val::TAbs> node;
  SourceSpan span;
};

namespace ex {
struct Val { ValueP v; };
struct Let { Ident x; ExprP bound, body; };
struct App { ValueP fn, arg; };
struct Proj { Label l; ValueP v; };
struct TApp { ValueP fn; TypeP arg; };
struct Fork { ValueP v; };
struct New { TypeP ses; };
struct Accept { ValueP v; };
struct Request { ValueP v; };
struct Send { ValueP payload, chan; };
struct Recv { ValueP chan; };
struct Select { Label l; ValueP chan; };
struct Case { ValueP chan; ExprP left, right; };
struct Close { ValueP chan; };
}  // namespace ex

struct Expr {
  std::variant<ex::Val, ex::Let, ex::App, ex::Proj, ex::TApp, ex::Fork, ex::New, ex::Accept,
               ex::Request, ex::Send, ex::Recv, ex::Select, ex::Case, ex::Close>
      node;
  SourceSpan span;
};

namespace cfg {
struct Proc { ExprP e; };
struct Par { ConfigP left, right; };
struct NuChan { Ident end1, end2; TypeP ses; bool closed = false; ConfigP body; };
struct NuAccess { Ident x; TypeP ses; ConfigP body; };
}  // namespace cfg

struct Config {
  std::variant<cfg::Proc, cfg::Par, cfg::NuChan, cfg::NuAccess> node;
  SourceSpan span;
};

template <class... Fs>
struct overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

template <class T, class P>
const T* get_if(const P& p) {
  return std::get_if<T>(&p->node);
}

ValueP mk_value(decltype(Value::node) node, SourceSpan span = {});
ExprP mk_expr(decltype(Expr::node) node, SourceSpan span = {});
ConfigP mk_config(decltype(Config::node) node, SourceSpan span = {});

namespace vl {
ValueP var(Ident id);
ValueP chan(TypeP dom);
ValueP unit();
ValueP pair(ValueP a, ValueP b);
ValueP abs(TypeP pre, Ident param, TypeP param_ty, ExprP body);
ValueP tabs(Ident binder, KindP kind, Constraints cstr, ValueP body);
}  // namespace vl

namespace xp {
ExprP val(ValueP v);
ExprP let(Ident x, ExprP bound, ExprP body);
}  // namespace xp

// ------------------------------------------------------- substitution

struct Subst {
  std::map<Ident, TypeP> types;
  std::map<Ident, ValueP> values;

  bool empty() const { return types.empty() && values.empty(); }
};

TypeP subst(const Subst& s, const TypeP& t);
KindP subst(const Subst& s, const KindP& k);
Ctx subst(const Subst& s, const Ctx& g);
Constraints subst(const Subst& s, const Constraints& c);
ValueP subst(const Subst& s, const ValueP& v);
ExprP subst(const Subst& s, const ExprP& e);
ConfigP subst(const Subst& s, const ConfigP& c);

TypeP subst1(const Ident& x, const TypeP& by, const TypeP& t);
ExprP subst1(const Ident& x, const ValueP& by, const ExprP& e);

// --------------------------------------------------- free variables

using IdentSet = std::set<Ident>;

IdentSet free_vars(const TypeP& t);
IdentSet free_vars(const KindP& k);
IdentSet free_vars(const Ctx& g);
IdentSet free_vars(const ValueP& v);
IdentSet free_vars(const ExprP& e);
IdentSet free_vars(const ConfigP& c);

bool occurs_free(const Ident& x, const TypeP& t);

// Ctx binds in order; returns the identifiers it introduces.
IdentSet bound_by(const Ctx& g);

// --------------------------------------------------- canonical forms

TypeP canonicalize(const TypeP& t);
KindP canonicalize(const KindP& k);
ValueP canonicalize(const ValueP& v);
ExprP canonicalize(const ExprP& e);
ConfigP canonicalize(const ConfigP& c);

bool same(const TypeP& a, const TypeP& b);
bool same(const KindP& a, const KindP& b);
bool same(const Ctx& a, const Ctx& b);
bool same(const Constraints& a, const Constraints& b);
bool same(const ValueP& a, const ValueP& b);
bool same(const ExprP& a, const ExprP& b);
bool same(const ConfigP& a, const ConfigP& b);

std::size_t node_count(const TypeP& t);

}  // namespace pvgr
