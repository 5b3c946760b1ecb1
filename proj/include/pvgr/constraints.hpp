#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "pvgr/ast.hpp"

namespace pvgr {

// pi_{projs.back()} ... pi_{projs.front()} var
struct DomPath {
  Ident var;
  std::vector<Label> projs;

  auto operator<=>(const DomPath&) const = default;
  bool operator==(const DomPath&) const = default;
};

struct AtomicConstraint {
  DomPath left;
  DomPath right;

  auto operator<=>(const AtomicConstraint&) const = default;
  bool operator==(const AtomicConstraint&) const = default;
};

using AtomSet = std::set<AtomicConstraint>;

// Normalized shapes of the domain variables a context binds; a variable
// bound at an abstract shape maps to nullopt.
using ShapeEnv = std::map<Ident, TypeP>;

struct ConstraintError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

ShapeEnv shape_env(const Ctx& g);

// Leaf paths of a normalized domain; DomZero contributes nothing.
std::vector<DomPath> domain_paths(const TypeP& dom);

AtomSet atomize(const Constraints& c);
AtomSet atomize(const Ctx& g);

// Least set containing `atoms` closed under symmetry, projection of a
// disjoint pair-shaped domain onto its halves, and disjointness of the two
// halves of every pair-shaped variable in `shapes`.
AtomSet close(const AtomSet& atoms, const ShapeEnv& shapes);

bool entails(const Ctx& g, const Constraints& c);
bool entails(const Ctx& g, const TypeP& d1, const TypeP& d2);

// Shape reached by following `projs` from a variable of shape `root`.
std::optional<TypeP> path_shape(const TypeP& root, const std::vector<Label>& projs);

TypeP path_to_type(const DomPath& p);
std::string show_path(const DomPath& p);

}  // namespace pvgr
