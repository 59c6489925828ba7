#include "mezzo/driver.hpp"

#include <set>
#include <sstream>

#include "mezzo/desugar.hpp"
#include "mezzo/parser.hpp"

namespace mezzo {

CheckedProgram check_source(const std::string& source, const std::string& filename,
                            int depth, uint64_t seed) {
  names::reset(seed);
  CheckedProgram cp;
  cp.surface = parse_program(source, filename);
  ProgramEnv surface_env = check_program(cp.surface);
  cp.core = desugar_program(surface_env, cp.surface);
  // Rebuild the tables over the translated definitions; this also re-checks
  // kinds on the internal forms.
  cp.env = check_program(cp.core);
  cp.facts = compute_facts(cp.env, cp.core);
  CheckOptions opts;
  opts.depth = depth;
  cp.check = typecheck_program(cp.env, cp.facts, cp.core, opts);
  return cp;
}

std::string render_perm_dump(const CheckedProgram& cp) {
  std::ostringstream out;
  for (const PermSnapshot& s : cp.check.snapshots) {
    out << "at " << s.loc.line << ":" << s.loc.col << "\n";
    for (const std::string& a : s.atoms) out << "  " << a << "\n";
  }
  return out.str();
}

Program normalize_program(const Program& core) {
  Program p = core;
  std::set<std::string> val_names;
  for (auto& item : p.items)
    if (item.tag == ItemTag::Val) val_names.insert(item.val.name);
  for (auto& item : p.items) {
    if (item.tag != ItemTag::Val) continue;
    std::set<std::string> used = val_names;
    item.val.body = normalize(item.val.body, used);
  }
  return p;
}

}  // namespace mezzo
