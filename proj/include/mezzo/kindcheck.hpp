// Kinds and well-formedness.
//
// The kinding judgment tracks a Side: `consumes` is only legal to the left
// of an external arrow.  Name introductions bind hereditarily through
// "transparent" constructs (tuples, concrete fields, the left of `|`,
// `consumes`, mode constraints); quantifiers, arrows, applications and
// anchors are opaque.  collect_bound_names computes that set, erroring on
// duplicates; environment extension itself masks, so ordinary shadowing is
// legal.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mezzo/error.hpp"
#include "mezzo/syntax.hpp"

namespace mezzo {

enum class Side : uint8_t { Left, Right };

class KindEnv {
 public:
  std::optional<Kind> lookup(const std::string& name) const {
    for (auto it = entries_.rbegin(); it != entries_.rend(); ++it)
      if (it->first == name) return it->second;
    return std::nullopt;
  }
  // Later bindings mask earlier ones.
  void bind(const std::string& name, Kind k) { entries_.emplace_back(name, std::move(k)); }
  size_t size() const { return entries_.size(); }
  void truncate(size_t n) { entries_.resize(n); }
  const std::vector<std::pair<std::string, Kind>>& entries() const { return entries_; }

 private:
  std::vector<std::pair<std::string, Kind>> entries_;
};

// Names introduced by a type into its own scope, in order of appearance.
// Throws KindError on a duplicate introduction within one type.
std::vector<std::pair<std::string, Kind>> collect_bound_names(const Type& t);

// Tables shared by the later stages.
struct ProgramEnv {
  KindEnv kinds;                                    // types, abstracts, vals
  std::map<std::string, DataDef> data;              // includes builtins
  std::map<std::string, std::pair<std::string, size_t>> ctors;  // ctor -> (type, branch)
  std::vector<std::string> abstracts;               // declaration order
  std::vector<std::string> data_order;              // declaration order

  const DataDef* def_of_ctor(const std::string& ctor) const {
    auto it = ctors.find(ctor);
    if (it == ctors.end()) return nullptr;
    return &data.at(it->second.first);
  }
  const DataBranch* branch_of_ctor(const std::string& ctor) const {
    auto it = ctors.find(ctor);
    if (it == ctors.end()) return nullptr;
    return &data.at(it->second.first).branches[it->second.second];
  }
};

// Built-in types: abstract int, bool, ref a; data option a = None | Some.
void install_builtins(ProgramEnv& env);

// Kind of a type; throws KindError when ill-kinded.
Kind kind_of(const ProgramEnv& prog, const KindEnv& env, Side side, const Type& t);

// Kind with the env first extended by the type's own bound names
// (the ▸ form of the judgment); side resets to Right.
Kind kind_of_extended(const ProgramEnv& prog, const KindEnv& env, const Type& t);

// Checks the whole surface program: definitions, signatures, and every type
// embedded in expressions; verifies that value references are bound.
ProgramEnv check_program(const Program& prog);

}  // namespace mezzo
