#include "pvgr/constraints.hpp"

#include <deque>

#include "pvgr/normalize.hpp"

namespace pvgr {

namespace {

void collect_paths(const TypeP& d, std::vector<DomPath>& out) {
  switch (d->tag) {
    case TypeTag::DomZero:
      return;
    case TypeTag::DomMerge:
      collect_paths(d->left(), out);
      collect_paths(d->right(), out);
      return;
    case TypeTag::Var:
      out.push_back(DomPath{d->id, {}});
      return;
    case TypeTag::DomProj: {
      std::vector<DomPath> inner;
      collect_paths(d->dom(), inner);
      if (inner.size() != 1 || d->dom()->tag == TypeTag::DomMerge || d->dom()->tag == TypeTag::DomZero)
        throw ConstraintError("projection of a non-variable domain survives normalization: " +
                              sort_key(d));
      inner.front().projs.push_back(d->label);
      out.push_back(std::move(inner.front()));
      return;
    }
    default:
      throw ConstraintError("not a domain: " + sort_key(d));
  }
}

void add_atoms(const TypeP& lhs, const TypeP& rhs, AtomSet& out) {
  auto ls = domain_paths(normalize(lhs));
  auto rs = domain_paths(normalize(rhs));
  for (const auto& l : ls)
    for (const auto& r : rs) out.insert(AtomicConstraint{l, r});
}

void pair_paths(const DomPath& at, const TypeP& shape, std::vector<DomPath>& out) {
  if (shape->tag != TypeTag::ShapePair) return;
  out.push_back(at);
  for (Label l : {Label::One, Label::Two}) {
    DomPath sub = at;
    sub.projs.push_back(l);
    pair_paths(sub, shape->kids[index_of(l)], out);
  }
}

}  // namespace

ShapeEnv shape_env(const Ctx& g) {
  ShapeEnv env;
  for (const auto& b : g)
    if (b.tag == BindingTag::TypeVar && b.kind->tag == KindTag::Dom)
      env[b.id] = normalize(b.kind->shape);
  return env;
}

std::vector<DomPath> domain_paths(const TypeP& dom) {
  std::vector<DomPath> out;
  collect_paths(dom, out);
  return out;
}

AtomSet atomize(const Constraints& c) {
  AtomSet out;
  for (const auto& d : c) add_atoms(d.lhs, d.rhs, out);
  return out;
}

AtomSet atomize(const Ctx& g) {
  AtomSet out;
  for (const auto& b : g)
    if (b.tag == BindingTag::Disjoint) add_atoms(b.lhs, b.rhs, out);
  return out;
}

std::optional<TypeP> path_shape(const TypeP& root, const std::vector<Label>& projs) {
  TypeP cur = root;
  for (Label l : projs) {
    if (!cur || cur->tag != TypeTag::ShapePair) return std::nullopt;
    cur = cur->kids[index_of(l)];
  }
  if (!cur) return std::nullopt;
  return cur;
}

AtomSet close(const AtomSet& atoms, const ShapeEnv& shapes) {
  AtomSet out;
  std::deque<AtomicConstraint> work(atoms.begin(), atoms.end());
  for (const auto& [var, shape] : shapes) {
    std::vector<DomPath> pairs;
    pair_paths(DomPath{var, {}}, shape, pairs);
    for (const auto& p : pairs) {
      DomPath a = p, b = p;
      a.projs.push_back(Label::One);
      b.projs.push_back(Label::Two);
      work.push_back(AtomicConstraint{a, b});
    }
  }
  auto shape_of = [&](const DomPath& p) -> std::optional<TypeP> {
    auto it = shapes.find(p.var);
    if (it == shapes.end()) return std::nullopt;
    return path_shape(it->second, p.projs);
  };
  while (!work.empty()) {
    auto a = work.front();
    work.pop_front();
    if (!out.insert(a).second) continue;
    work.push_back(AtomicConstraint{a.right, a.left});
    auto sh = shape_of(a.left);
    if (sh && (*sh)->tag == TypeTag::ShapePair) {
      for (Label l : {Label::One, Label::Two}) {
        DomPath sub = a.left;
        sub.projs.push_back(l);
        work.push_back(AtomicConstraint{sub, a.right});
      }
    }
  }
  return out;
}

bool entails(const Ctx& g, const Constraints& c) {
  auto goal = atomize(c);
  if (goal.empty()) return true;
  auto closed = close(atomize(g), shape_env(g));
  for (const auto& a : goal)
    if (!closed.contains(a)) return false;
  return true;
}

bool entails(const Ctx& g, const TypeP& d1, const TypeP& d2) {
  return entails(g, Constraints{Disjoint{d1, d2}});
}

TypeP path_to_type(const DomPath& p) {
  TypeP t = ty::var(p.var);
  for (Label l : p.projs) t = ty::dom_proj(l, t);
  return t;
}

std::string show_path(const DomPath& p) {
  std::string s = p.var.name;
  for (Label l : p.projs) s = (l == Label::One ? "pi1 " : "pi2 ") + s;
  return s;
}

}  // namespace pvgr
