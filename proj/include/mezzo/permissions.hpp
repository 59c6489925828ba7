// The permission environment: a conjunction of atomic permissions `x @ t`
// over an equivalence relation on program variables.
//
// Environments are values: every operation returns a new environment, so
// the checker can branch, backtrack, and join freely.
//
// Atoms are kept in expanded form: the fields of tuples and concrete
// (structural) blocks are always singletons, with the ownership of each
// component held by a separate atom.  In that form a tuple or immutable
// block skeleton is duplicable by construction, and each variable holds at
// most one structural atom; a second exclusive claim on the same variable
// marks the whole environment inconsistent (unreachable code).
//
// Subsumption is a goal-directed backtracking search.  For an atom goal it
// tries, in order: a direct match against a held atom, folding a structural
// block into its nominal type, unfolding a held single-branch nominal
// atom, and instantiating a held polymorphic atom.  A `dynamic` goal is
// also satisfied by merely holding an exclusive permission.  The search
// depth is budgeted; the default budget is 8.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mezzo/facts.hpp"
#include "mezzo/kindcheck.hpp"
#include "mezzo/syntax.hpp"

namespace mezzo {

struct PermCtx {
  const ProgramEnv& prog;
  const FactEnv& facts;
  int budget = 8;
};

// Branch type with parameters instantiated; includes the definition-level
// adopts clause.
Type instantiate_branch(const DataDef& def, const DataBranch& br, const std::vector<Type>& args);

class PermissionEnv {
 public:
  bool inconsistent = false;

  // Equivalence on variables.
  std::string find(const std::string& x) const;
  bool equal(const std::string& x, const std::string& y) const;

  // x @ t, decomposed into expanded form.
  PermissionEnv add(const PermCtx& ctx, const std::string& x, const Type& t) const;
  // A permission (kind perm).
  PermissionEnv add_perm(const PermCtx& ctx, const Type& p) const;
  // Learn x == y.
  PermissionEnv equate(const PermCtx& ctx, const std::string& x, const std::string& y) const;

  // Proves a permission, consuming the non-duplicable atoms it covers.
  // Returns the leftover environment, or nullopt with `missing` lines.
  std::optional<PermissionEnv> subsume(const PermCtx& ctx, const Type& goal,
                                       std::vector<std::string>* missing = nullptr) const;
  std::optional<PermissionEnv> subsume_atom(const PermCtx& ctx, const std::string& x,
                                            const Type& t,
                                            std::vector<std::string>* missing = nullptr) const;

  // Flexible variables (instantiation unknowns).
  PermissionEnv introduce_flex(const std::string& name, Kind k) const;
  bool is_flex(const std::string& name) const;
  Type solution(const std::string& name) const;  // null when unsolved
  std::vector<std::string> unsolved_flex() const;
  // Rewrites solved flexible variables away.
  Type resolve(const Type& t) const;

  // All atoms held by x's class (resolved).
  std::vector<Type> atoms_of(const std::string& x) const;
  // The unique structural atom of x, unfolding a held single-branch nominal
  // atom if needed.  Returns the new env and the structural type.
  std::optional<std::pair<PermissionEnv, Type>> structural_atom(const PermCtx& ctx,
                                                                const std::string& x) const;
  // Replaces x's structural atom (strong update).
  PermissionEnv set_structural(const PermCtx& ctx, const std::string& x, const Type& t) const;
  // Removes one atom alpha-equal to t from x's class.
  PermissionEnv drop_atom(const std::string& x, const Type& t) const;

  // Keeps only duplicable atoms and the equivalence relation: the fragment a
  // closure may capture.
  PermissionEnv duplicable_part(const PermCtx& ctx) const;

  // Deterministic rendering, one "x @ t" (or "P") line per atom, sorted.
  std::vector<std::string> render(const PermCtx& ctx) const;

  bool atom_is_duplicable(const PermCtx& ctx, const Type& t) const;
  bool atom_is_exclusive(const PermCtx& ctx, const Type& t) const;

 private:
  struct Flex {
    Kind kind;
    Type sol;  // null = unsolved
  };

  std::map<std::string, std::string> parent_;        // non-roots only
  std::map<std::string, std::vector<Type>> atoms_;   // per root
  std::vector<Type> loose_;                          // permission variables
  std::map<std::string, Flex> flex_;

  void union_into(const PermCtx& ctx, const std::string& a, const std::string& b);
  void add_mut(const PermCtx& ctx, const std::string& x, const Type& t);
  void add_perm_mut(const PermCtx& ctx, const Type& p);
  void add_atom_raw(const PermCtx& ctx, const std::string& x, const Type& t);
  void check_structurals(const PermCtx& ctx, const std::string& root);
  friend struct Prover;
  friend struct Unifier;
};

}  // namespace mezzo
