#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pvgr/ast.hpp"

namespace pvgr {

// Γ;Σ ⊢ e : ∃Γ'.Σ';T, where Σ' is the whole outgoing state: whatever the
// expression left alone plus whatever it produced.
struct ExprTyping {
  Ctx ex;
  TypeP post;
  TypeP type;
};

// Bound variable of an existential package mapped to the domain it stands for.
struct Renaming {
  std::map<Ident, TypeP> map;
};

struct ExistentialMatch {
  Renaming rho;
  TypeP leftover;  // part of the actual state the pattern did not claim
};

struct TypeError : std::runtime_error {
  TypeError(std::string rule, std::string message, SourceSpan span = {});

  std::string rule;
  std::string message;
  std::string expected;
  std::string found;
  std::string state;  // incoming state at the failing rule, pretty-printed
  SourceSpan span;
};

TypeP type_value(const Ctx& g, const ValueP& v);
ExprTyping type_expr(const Ctx& g, const TypeP& sigma, const ExprP& e);

// Finds domains for the variables of `bound` that make the pattern state a
// sub-multiset of `act_state` and the pattern type convertible to `act_ty`.
// Ambiguity and failure are both errors.
ExistentialMatch match_existential(const Ctx& g, const Ctx& bound, const TypeP& pat_state, const TypeP& pat_ty,
                                   const TypeP& act_state, const TypeP& act_ty);

// A renaming of the type variables of ex1 onto those of ex2 identifying the
// two packages, if one exists.
std::optional<std::map<Ident, Ident>> match_packages(const Ctx& g, const ExprTyping& a, const ExprTyping& b);

// Returns the part of `sigma` the configuration does not own.
TypeP type_config(const Ctx& g, const TypeP& sigma, const ConfigP& c);

// Closed program: empty context, empty state, nothing left over.
void check_program(const ConfigP& c);

}  // namespace pvgr
