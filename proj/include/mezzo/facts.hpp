// Facts: conditional mode information for types.
//
// A fact is a total table with one row per mode; the row for mode m holds
// the weakest hypothesis under which the type admits m.  A hypothesis is
// either unsatisfiable or one mode bound per type parameter (Affine = no
// constraint).  Facts for recursive data definitions are computed by a
// fixed point that starts from the most permissive table (every row
// satisfiable) and weakens through branch joins until stable; this yields
// the strongest fact consistent with the definitions, e.g. a list is
// duplicable exactly when its element type is.

#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "mezzo/kindcheck.hpp"
#include "mezzo/syntax.hpp"

namespace mezzo {

struct Hyp {
  bool is_false = false;
  std::vector<Mode> req;  // per-parameter upper bound; Affine = unconstrained

  static Hyp truth(size_t n) { return {false, std::vector<Mode>(n, Mode::Affine)}; }
  static Hyp falsity(size_t n) { return {true, std::vector<Mode>(n, Mode::Affine)}; }

  bool operator==(const Hyp& o) const {
    if (is_false || o.is_false) return is_false == o.is_false;
    return req == o.req;
  }
};

// Conjunction: false absorbs; clauses combine by mode meet.
Hyp hyp_conj(const Hyp& a, const Hyp& b);
// a implies b.
bool hyp_implies(const Hyp& a, const Hyp& b);
bool hyp_trivial(const Hyp& h);  // satisfied by any arguments

struct Fact {
  // Indexed by conclusion mode; rows[m] = hypothesis under which the type
  // admits mode m.  All rows share one clause-vector length.
  std::array<Hyp, 4> rows;

  size_t arity() const { return rows[0].req.size(); }
  const Hyp& row(Mode m) const { return rows[static_cast<size_t>(m)]; }
  Hyp& row(Mode m) { return rows[static_cast<size_t>(m)]; }
  bool operator==(const Fact& o) const { return rows == o.rows; }
};

Fact fact_constant(Mode m, size_t arity);
Fact fact_parameter(size_t index, size_t arity);
Fact fact_join(const Fact& a, const Fact& b);
// Meet where one side is the constant fact for m.
Fact fact_meet_constant(Mode m, const Fact& f);
// Fact of an application: substitutes each argument's rows into the head
// fact's clauses.
Fact fact_compose(const Fact& head, const std::vector<Fact>& args);
bool fact_leq(const Fact& a, const Fact& b);
// Adjusts a clause-free fact to another arity.
Fact fact_resize(const Fact& f, size_t arity);

struct FactEnv {
  std::map<std::string, Fact> types;  // per type name, arity = its parameters
  std::map<std::string, Fact> vars;   // in-scope type variables (arity 0 outside inference)
};

// Fact for a type; free variables resolve through env.vars (affine when
// absent).  `ambient` is the clause-vector length of the result.
Fact infer_fact(const ProgramEnv& prog, const FactEnv& env, const Type& t, size_t ambient);

bool is_duplicable(const ProgramEnv& prog, const FactEnv& env, const Type& t);
bool is_exclusive(const ProgramEnv& prog, const FactEnv& env, const Type& t);

// Runs the fixed point over all data definitions, assigns declared facts to
// abstract types, and checks declared facts against inferred ones.
// Throws FactError on a mismatch.
FactEnv compute_facts(const ProgramEnv& prog, const Program& p);

// One line per user-declared type: `fact <name>: [<clauses> => ]<mode>`.
std::string dump_facts(const ProgramEnv& prog, const FactEnv& env);

}  // namespace mezzo
