#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "pvgr/ast.hpp"

namespace pvgr {

struct KindError : std::runtime_error {
  KindError(std::string rule, std::string message, TypeP subtree, KindP expected, KindP found,
            std::vector<std::string> trail);

  std::string rule;
  std::string message;
  TypeP subtree;
  KindP expected;
  KindP found;
  std::vector<std::string> trail;  // rules from the root down to `rule`
  SourceSpan span;
};

void check_ctx(const Ctx& g);
void check_kind(const Ctx& g, const KindP& k);
KindP infer_kind(const Ctx& g, const TypeP& t);

// Throws unless `t` has a kind convertible to `want`.
void expect_kind(const Ctx& g, const TypeP& t, const KindP& want);

// Type variables of kind Shape, Session, or Dom(η) -> κ.
Ctx restrict_non_dom(const Ctx& g);
// Type variables of kind Dom(η).
Ctx restrict_only_dom(const Ctx& g);

// g1, g2, then pairwise disjointness among the domains of g2, then every
// domain of g1 against every domain of g2.
Ctx disjoint_append(const Ctx& g1, const Ctx& g2);

// Checks each binding of `ext` against `g` extended with the bindings before it.
void check_ctx_extension(const Ctx& g, const Ctx& ext);

// The kind `g` assigns to a type variable, or null.
KindP lookup_kind(const Ctx& g, const Ident& id);

}  // namespace pvgr
