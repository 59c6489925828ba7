// The permission checker.
//
// Programs are first brought into a normal form: binders are made unique,
// every operand becomes a variable, and match/if continuations are pushed
// into the arms, so that every branch checks the rest of the code in tail
// position against the expected type and no join of environments is needed.
//
// Checking then threads a PermissionEnv through the normalized code.  Each
// right-hand side consumes the permissions its rule requires (by
// subsumption) and produces permissions for the variable that names its
// result.  Function bodies start from the duplicable fragment of the
// enclosing environment plus the argument's permissions.

#pragma once

#include <map>
#include <string>
#include <vector>

#include "mezzo/facts.hpp"
#include "mezzo/kindcheck.hpp"
#include "mezzo/permissions.hpp"
#include "mezzo/syntax.hpp"

namespace mezzo {

struct CheckOptions {
  int depth = 8;  // subsumption search budget
};

// Rendered permission atoms at one program point.
struct PermSnapshot {
  Loc loc;
  std::vector<std::string> atoms;
};

struct CheckResult {
  std::vector<PermSnapshot> snapshots;       // in program order
  std::map<std::string, Type> value_types;   // top-level values
};

// Unique binders + administrative normal form + commuting conversions.
// `used` carries names that must not be reused (top-level values).
Expr normalize(const Expr& e, std::set<std::string>& used);

// Checks every top-level value of a desugared program.
// Throws TypeError on the first failure.
CheckResult typecheck_program(const ProgramEnv& prog, const FactEnv& facts,
                              const Program& p, const CheckOptions& opts = {});

}  // namespace mezzo
