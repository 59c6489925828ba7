// Translation from surface types to internal form.
//
// Three constructs disappear here: name introductions become singletons
// paired with anchored permissions, `consumes` annotations are interpreted,
// and surface function arrows become universally quantified internal
// arrows.  A surface arrow
//
//     t1 -> t2
//
// turns into
//
//     forall (names bound by t1) forall (r: term)
//       (=r | r @ t1-with-consumes-erased)
//         -> (t2 | r @ t1-with-consumed-parts-removed)
//
// followed by equivalence-preserving cleanup (dropping vacuous conjuncts
// such as r @ unknown, and merging the argument name into r when the
// domain introduces exactly one) so the common cases read the way they
// were written.

#pragma once

#include "mezzo/kindcheck.hpp"
#include "mezzo/syntax.hpp"

namespace mezzo {

// The ordinary translation.
Type translate_type(const ProgramEnv& prog, const Type& t);

// The extended translation: existentially binds the names the type
// introduces, then translates.
Type translate_type_extended(const ProgramEnv& prog, const Type& t);

Expr translate_expr(const ProgramEnv& prog, const Expr& e);

// Reads a surface domain type as a binding pattern (names introduced by the
// type become pattern variables; anonymous positions become wildcards).
Pattern type_to_pattern(const Type& t);

// Translates every type in the program: data definitions, adopts clauses,
// signatures, and expressions.
Program desugar_program(const ProgramEnv& prog, const Program& p);

// True if any surface-only construct remains (external arrow, consumes,
// name introduction, surface fun).
bool has_surface_nodes(const Type& t);
bool has_surface_nodes(const Expr& e);

}  // namespace mezzo
