// Pretty printing for types, patterns and expressions.
//
// Type output round-trips through the parser for every surface-expressible
// form.  Precedence, loosest to tightest: quantifiers, arrows, `|`, `*`,
// application, `@`/atoms.  Structural fields with singleton types print as
// `f == y`; adopts clauses are omitted when they are bottom.

#pragma once

#include <string>

#include "mezzo/syntax.hpp"

namespace mezzo {

std::string pretty(const Type& t);
std::string pretty(const Pattern& p);
std::string pretty(const Expr& e);

// An anchored atom `x @ t` rendered for permission dumps and diagnostics.
std::string pretty_atom(const std::string& var, const Type& t);

}  // namespace mezzo
