#pragma once

#include <string>
#include <vector>

#include "pvgr/ast.hpp"

namespace pvgr {

// Fully applies type-level beta, projection of merges and dual pushing;
// states come out flattened, without empty units, in canonical order.
TypeP normalize(const TypeP& t);
KindP normalize(const KindP& k);
Ctx normalize(const Ctx& g);
Constraints normalize(const Constraints& c);

// Dual of an already normalized session type.
TypeP dual_of(const TypeP& ses);

bool is_normal(const TypeP& t);

// Order-sensitive: canonicalize both sides and compare structurally.
bool alpha_equiv(const TypeP& a, const TypeP& b);

// Conversion: normal forms agree up to renaming of bound variables and
// reordering of state entries, existential bindings and constraints.
bool conv(const TypeP& a, const TypeP& b);
bool conv_kind(const KindP& a, const KindP& b);

// Both arguments must already be normal.
bool conv_normal(const TypeP& a, const TypeP& b);

// A normal state as a list of entries (StBind or opaque State-kinded terms).
std::vector<TypeP> state_atoms(const TypeP& normal_state);
TypeP make_state(std::vector<TypeP> atoms);

// Stable textual key, used for canonical state order.
std::string sort_key(const TypeP& t);

}  // namespace pvgr
