#include "mezzo/permissions.hpp"

#include <algorithm>
#include <cassert>
#include <functional>
#include <set>
#include <sstream>

#include "mezzo/print.hpp"

namespace mezzo {

namespace {

bool is_structural(const Type& t) {
  return t->tag == TyTag::Tuple || t->tag == TyTag::Concrete;
}

// Class representatives: user-written names beat generated ones, then
// shorter, then lexicographically smaller.
bool rep_better(const std::string& a, const std::string& b) {
  bool ga = names::is_generated(a), gb = names::is_generated(b);
  if (ga != gb) return !ga;
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

bool adopts_equal_mod(const Type& a, const Type& b) {
  bool ba = !a || is_bottom(a), bb = !b || is_bottom(b);
  if (ba || bb) return ba && bb;
  return alpha_equal(a, b);
}

}  // namespace

Type instantiate_branch(const DataDef& def, const DataBranch& br,
                        const std::vector<Type>& args) {
  assert(args.size() == def.params.size());
  std::vector<std::pair<std::string, Type>> subst;
  for (size_t i = 0; i < args.size(); ++i)
    subst.emplace_back(def.params[i].first, args[i]);
  std::vector<std::pair<std::string, Type>> fields;
  for (const auto& [fname, ft] : br.fields)
    fields.emplace_back(fname, substitute_all(ft, subst));
  return t_concrete(br.ctor, std::move(fields), substitute_all(def.adopts, subst), br.loc);
}

// ---------------------------------------------------------------------------
// Equivalence classes

std::string PermissionEnv::find(const std::string& x) const {
  std::string cur = x;
  for (auto it = parent_.find(cur); it != parent_.end(); it = parent_.find(cur))
    cur = it->second;
  return cur;
}

bool PermissionEnv::equal(const std::string& x, const std::string& y) const {
  return find(x) == find(y);
}

void PermissionEnv::union_into(const PermCtx& ctx, const std::string& a,
                               const std::string& b) {
  std::string ra = find(a), rb = find(b);
  if (ra == rb) return;
  if (!rep_better(ra, rb)) std::swap(ra, rb);
  parent_[rb] = ra;
  auto moved = atoms_.find(rb);
  if (moved != atoms_.end()) {
    auto& dst = atoms_[ra];
    dst.insert(dst.end(), moved->second.begin(), moved->second.end());
    atoms_.erase(moved);
  }
  check_structurals(ctx, ra);
}

PermissionEnv PermissionEnv::equate(const PermCtx& ctx, const std::string& x,
                                    const std::string& y) const {
  PermissionEnv e = *this;
  e.union_into(ctx, x, y);
  return e;
}

// Merges duplicate skeletons and detects impossible conjunctions.  Two
// immutable skeletons with the same tag identify their fields; conflicting
// shapes or a second exclusive claim make the environment inconsistent.
void PermissionEnv::check_structurals(const PermCtx& ctx, const std::string& start) {
  if (inconsistent) return;
  for (;;) {
    std::string root = find(start);
    auto it = atoms_.find(root);
    if (it == atoms_.end()) return;
    std::vector<size_t> structurals;
    for (size_t i = 0; i < it->second.size(); ++i)
      if (is_structural(it->second[i])) structurals.push_back(i);
    if (structurals.size() >= 2) {
      size_t i = structurals[0], j = structurals[1];
      Type a = it->second[i], b = it->second[j];
      if (a->tag == TyTag::Tuple && b->tag == TyTag::Tuple &&
          a->kids.size() == b->kids.size()) {
        std::vector<std::pair<std::string, std::string>> eqs;
        for (size_t k = 0; k < a->kids.size(); ++k) {
          assert(a->kids[k]->tag == TyTag::Singleton);
          assert(b->kids[k]->tag == TyTag::Singleton);
          eqs.emplace_back(a->kids[k]->name, b->kids[k]->name);
        }
        it->second.erase(it->second.begin() + j);
        for (auto& [na, nb] : eqs) {
          union_into(ctx, na, nb);
          if (inconsistent) return;
        }
        continue;
      }
      if (a->tag == TyTag::Concrete && b->tag == TyTag::Concrete &&
          a->name == b->name && a->fields.size() == b->fields.size()) {
        const DataDef* def = ctx.prog.def_of_ctor(a->name);
        if (def && def->is_mutable) {
          inconsistent = true;  // two owners of one mutable block
          return;
        }
        std::vector<std::pair<std::string, std::string>> eqs;
        bool ok = true;
        for (const auto& [fname, fa] : a->fields) {
          const Type* fb = nullptr;
          for (const auto& [gname, g] : b->fields)
            if (gname == fname) fb = &g;
          if (!fb) { ok = false; break; }
          assert(fa->tag == TyTag::Singleton && (*fb)->tag == TyTag::Singleton);
          eqs.emplace_back(fa->name, (*fb)->name);
        }
        if (ok) {
          it->second.erase(it->second.begin() + j);
          for (auto& [na, nb] : eqs) {
            union_into(ctx, na, nb);
            if (inconsistent) return;
          }
          continue;
        }
      }
      inconsistent = true;  // a value cannot have two shapes
      return;
    }
    int exclusive_claims = 0;
    for (const Type& a : it->second)
      if (atom_is_exclusive(ctx, resolve(a))) exclusive_claims++;
    if (exclusive_claims >= 2) inconsistent = true;
    return;
  }
}

// ---------------------------------------------------------------------------
// Adding permissions (expansion)

void PermissionEnv::add_atom_raw(const PermCtx& ctx, const std::string& x, const Type& t) {
  if (t->tag == TyTag::Unknown) return;  // carries nothing
  if (t->tag == TyTag::Singleton) {
    union_into(ctx, x, t->name);
    return;
  }
  std::string root = find(x);
  auto& list = atoms_[root];
  for (const Type& a : list)
    if (alpha_equal(resolve(a), resolve(t)) && atom_is_duplicable(ctx, resolve(t)))
      return;  // duplicable atoms are idempotent
  list.push_back(t);
  check_structurals(ctx, root);
}

void PermissionEnv::add_mut(const PermCtx& ctx, const std::string& x, const Type& t0) {
  if (inconsistent) return;
  Type t = resolve(t0);
  switch (t->tag) {
    case TyTag::Singleton:
      union_into(ctx, x, t->name);
      return;
    case TyTag::Bar:
      add_mut(ctx, x, t->kids[0]);
      add_perm_mut(ctx, t->kids[1]);
      return;
    case TyTag::Tuple: {
      std::vector<Type> comps;
      for (const Type& c : t->kids) {
        if (c->tag == TyTag::Singleton) {
          comps.push_back(c);
        } else {
          std::string n = names::fresh("c");
          add_mut(ctx, n, c);
          comps.push_back(t_singleton(n, c->loc));
        }
      }
      add_atom_raw(ctx, x, t_tuple(std::move(comps), t->loc));
      return;
    }
    case TyTag::Concrete: {
      std::vector<std::pair<std::string, Type>> fields;
      for (const auto& [fname, ft] : t->fields) {
        if (ft->tag == TyTag::Singleton) {
          fields.emplace_back(fname, ft);
        } else {
          std::string n = names::fresh(fname);
          add_mut(ctx, n, ft);
          fields.emplace_back(fname, t_singleton(n, ft->loc));
        }
      }
      add_atom_raw(ctx, x, t_concrete(t->name, std::move(fields), t->adopts, t->loc));
      return;
    }
    case TyTag::Exists: {
      // Open with a fresh rigid name.
      std::string n = names::fresh(t->name);
      add_mut(ctx, x, substitute(t->kids[0], t->name, t_var(n, t->loc)));
      return;
    }
    case TyTag::Empty:
      return;
    default:
      add_atom_raw(ctx, x, t);
      return;
  }
}

void PermissionEnv::add_perm_mut(const PermCtx& ctx, const Type& p0) {
  if (inconsistent) return;
  Type p = resolve(p0);
  switch (p->tag) {
    case TyTag::Empty:
      return;
    case TyTag::Star:
      add_perm_mut(ctx, p->kids[0]);
      add_perm_mut(ctx, p->kids[1]);
      return;
    case TyTag::Anchored:
      add_mut(ctx, p->name, p->kids[0]);
      return;
    case TyTag::Exists: {
      std::string n = names::fresh(p->name);
      add_perm_mut(ctx, substitute(p->kids[0], p->name, t_var(n, p->loc)));
      return;
    }
    default:
      loose_.push_back(p);  // abstract permission
      return;
  }
}

PermissionEnv PermissionEnv::add(const PermCtx& ctx, const std::string& x,
                                 const Type& t) const {
  PermissionEnv e = *this;
  e.add_mut(ctx, x, t);
  return e;
}

PermissionEnv PermissionEnv::add_perm(const PermCtx& ctx, const Type& p) const {
  PermissionEnv e = *this;
  e.add_perm_mut(ctx, p);
  return e;
}

// ---------------------------------------------------------------------------
// Flexible variables

PermissionEnv PermissionEnv::introduce_flex(const std::string& name, Kind k) const {
  PermissionEnv e = *this;
  e.flex_[name] = Flex{std::move(k), nullptr};
  return e;
}

bool PermissionEnv::is_flex(const std::string& name) const { return flex_.count(name) != 0; }

Type PermissionEnv::solution(const std::string& name) const {
  auto it = flex_.find(name);
  return it == flex_.end() ? nullptr : it->second.sol;
}

std::vector<std::string> PermissionEnv::unsolved_flex() const {
  std::vector<std::string> out;
  for (const auto& [n, f] : flex_)
    if (!f.sol) out.push_back(n);
  return out;
}

Type PermissionEnv::resolve(const Type& t) const {
  if (!t) return t;
  bool any = false;
  for (const auto& [n, f] : flex_)
    if (f.sol) { any = true; break; }
  if (!any) return t;

  std::function<Type(const Type&)> go = [&](const Type& u) -> Type {
    switch (u->tag) {
      case TyTag::Var: {
        Type s = solution(u->name);
        return s ? go(s) : u;
      }
      case TyTag::Singleton: {
        Type s = solution(u->name);
        if (!s) return u;
        Type r = go(s);
        if (r->tag == TyTag::Singleton || r->tag == TyTag::Var)
          return t_singleton(r->name, u->loc);
        return r;
      }
      case TyTag::Anchored: {
        std::string n = u->name;
        if (Type s = solution(n)) {
          Type r = go(s);
          if (r->tag == TyTag::Singleton || r->tag == TyTag::Var) n = r->name;
        }
        return t_anchored(n, go(u->kids[0]), u->loc);
      }
      case TyTag::Arrow:
        return t_arrow(go(u->kids[0]), go(u->kids[1]), u->loc);
      case TyTag::Tuple: {
        std::vector<Type> ks;
        for (const Type& k : u->kids) ks.push_back(go(k));
        return t_tuple(std::move(ks), u->loc);
      }
      case TyTag::Concrete: {
        std::vector<std::pair<std::string, Type>> fs;
        for (const auto& [fn, ft] : u->fields) fs.emplace_back(fn, go(ft));
        return t_concrete(u->name, std::move(fs), u->adopts ? go(u->adopts) : nullptr,
                          u->loc);
      }
      case TyTag::App: {
        std::vector<Type> ks;
        for (const Type& k : u->kids) ks.push_back(go(k));
        return t_app(u->name, std::move(ks), u->loc);
      }
      case TyTag::Forall:
        return t_forall(u->name, u->binder_kind, go(u->kids[0]), u->loc);
      case TyTag::Exists:
        return t_exists(u->name, u->binder_kind, go(u->kids[0]), u->loc);
      case TyTag::Bar:
        return t_bar(go(u->kids[0]), go(u->kids[1]), u->loc);
      case TyTag::Star:
        return t_star(go(u->kids[0]), go(u->kids[1]), u->loc);
      case TyTag::ModeAnd:
        return t_modeand(u->mode, u->name, go(u->kids[0]), u->loc);
      default:
        return u;
    }
  };
  return go(t);
}

// ---------------------------------------------------------------------------
// Queries

std::vector<Type> PermissionEnv::atoms_of(const std::string& x) const {
  std::vector<Type> out;
  auto it = atoms_.find(find(x));
  if (it == atoms_.end()) return out;
  for (const Type& a : it->second) out.push_back(resolve(a));
  return out;
}

bool PermissionEnv::atom_is_duplicable(const PermCtx& ctx, const Type& t) const {
  return is_duplicable(ctx.prog, ctx.facts, t);
}

bool PermissionEnv::atom_is_exclusive(const PermCtx& ctx, const Type& t) const {
  if (t->tag == TyTag::Concrete) {
    const DataDef* def = ctx.prog.def_of_ctor(t->name);
    return def && def->is_mutable;
  }
  return is_exclusive(ctx.prog, ctx.facts, t);
}

std::optional<std::pair<PermissionEnv, Type>> PermissionEnv::structural_atom(
    const PermCtx& ctx, const std::string& x) const {
  std::string root = find(x);
  auto it = atoms_.find(root);
  if (it != atoms_.end()) {
    for (const Type& a : it->second)
      if (is_structural(a)) return std::make_pair(*this, resolve(a));
    // Auto-unfold a nominal permission when the definition has one branch.
    for (size_t i = 0; i < it->second.size(); ++i) {
      Type a = resolve(it->second[i]);
      if (a->tag != TyTag::Var && a->tag != TyTag::App) continue;
      auto dit = ctx.prog.data.find(a->name);
      if (dit == ctx.prog.data.end()) continue;
      const DataDef& def = dit->second;
      if (def.branches.size() != 1 || def.params.size() != a->kids.size()) continue;
      PermissionEnv e = *this;
      e.atoms_[root].erase(e.atoms_[root].begin() + i);
      e.add_mut(ctx, root, instantiate_branch(def, def.branches[0], a->kids));
      for (const Type& b : e.atoms_[e.find(root)])
        if (is_structural(b)) return std::make_pair(e, e.resolve(b));
    }
  }
  return std::nullopt;
}

PermissionEnv PermissionEnv::set_structural(const PermCtx& ctx, const std::string& x,
                                            const Type& t) const {
  PermissionEnv e = *this;
  std::string root = e.find(x);
  auto it = e.atoms_.find(root);
  if (it != e.atoms_.end())
    for (size_t i = 0; i < it->second.size(); ++i)
      if (is_structural(it->second[i])) {
        it->second.erase(it->second.begin() + i);
        break;
      }
  e.add_mut(ctx, x, t);
  return e;
}

PermissionEnv PermissionEnv::drop_atom(const std::string& x, const Type& t) const {
  PermissionEnv e = *this;
  std::string root = e.find(x);
  auto it = e.atoms_.find(root);
  if (it != e.atoms_.end())
    for (size_t i = 0; i < it->second.size(); ++i)
      if (alpha_equal(resolve(it->second[i]), resolve(t))) {
        it->second.erase(it->second.begin() + i);
        break;
      }
  return e;
}

PermissionEnv PermissionEnv::duplicable_part(const PermCtx& ctx) const {
  PermissionEnv e = *this;
  for (auto& [root, list] : e.atoms_) {
    std::vector<Type> kept;
    for (const Type& a : list)
      if (atom_is_duplicable(ctx, resolve(a))) kept.push_back(a);
    list = std::move(kept);
  }
  e.loose_.clear();  // abstract permissions may be affine
  return e;
}

// Rewrites every term-level name inside a displayed type to its class
// representative, so skeleton fields agree with the atom lines around them.
static Type canon_names(const PermissionEnv& env, const Type& t) {
  if (!t) return t;
  switch (t->tag) {
    case TyTag::Singleton:
      return t_singleton(env.find(t->name), t->loc);
    case TyTag::Anchored:
      return t_anchored(env.find(t->name), canon_names(env, t->kids[0]), t->loc);
    case TyTag::Arrow:
      return t_arrow(canon_names(env, t->kids[0]), canon_names(env, t->kids[1]), t->loc);
    case TyTag::Tuple: {
      std::vector<Type> ks;
      for (const Type& k : t->kids) ks.push_back(canon_names(env, k));
      return t_tuple(std::move(ks), t->loc);
    }
    case TyTag::Concrete: {
      std::vector<std::pair<std::string, Type>> fs;
      for (const auto& [fn, ft] : t->fields) fs.emplace_back(fn, canon_names(env, ft));
      return t_concrete(t->name, std::move(fs),
                        t->adopts ? canon_names(env, t->adopts) : nullptr, t->loc);
    }
    case TyTag::App: {
      std::vector<Type> ks;
      for (const Type& k : t->kids) ks.push_back(canon_names(env, k));
      return t_app(t->name, std::move(ks), t->loc);
    }
    case TyTag::Forall:
      return t_forall(t->name, t->binder_kind, canon_names(env, t->kids[0]), t->loc);
    case TyTag::Exists:
      return t_exists(t->name, t->binder_kind, canon_names(env, t->kids[0]), t->loc);
    case TyTag::Bar:
      return t_bar(canon_names(env, t->kids[0]), canon_names(env, t->kids[1]), t->loc);
    case TyTag::Star:
      return t_star(canon_names(env, t->kids[0]), canon_names(env, t->kids[1]), t->loc);
    case TyTag::ModeAnd:
      return t_modeand(t->mode, t->name, canon_names(env, t->kids[0]), t->loc);
    default:
      return t;
  }
}

std::vector<std::string> PermissionEnv::render(const PermCtx& ctx) const {
  (void)ctx;
  std::vector<std::string> lines;
  for (const auto& [root, list] : atoms_)
    for (const Type& a : list)
      lines.push_back(pretty_atom(find(root), canon_names(*this, resolve(a))));
  for (const auto& [member, _] : parent_) {
    std::string root = find(member);
    if (!names::is_generated(member) && !names::is_generated(root))
      lines.push_back(member + " == " + root);
  }
  for (const Type& p : loose_) lines.push_back(pretty(canon_names(*this, resolve(p))));
  std::sort(lines.begin(), lines.end());
  return lines;
}

// ---------------------------------------------------------------------------
// Unification (matching modulo equations and flexible variables)

struct Unifier {
  const PermCtx& ctx;
  PermissionEnv& env;

  bool flex_unsolved(const std::string& n) const {
    return env.is_flex(n) && !env.solution(n);
  }

  bool solve(const std::string& n, const Type& t) {
    Type r = env.resolve(t);
    if (r->tag == TyTag::Var && r->name == n) return true;
    if (free_names(r).count(n)) return false;  // occurs check
    env.flex_[n].sol = r;
    return true;
  }

  bool unify(const Type& a0, const Type& b0) {
    Type a = env.resolve(a0), b = env.resolve(b0);
    if (a->tag == TyTag::Var && flex_unsolved(a->name)) return solve(a->name, b);
    if (b->tag == TyTag::Var && flex_unsolved(b->name)) return solve(b->name, a);
    if (a->tag == TyTag::Singleton && b->tag == TyTag::Singleton) {
      if (flex_unsolved(a->name)) return solve(a->name, t_singleton(env.find(b->name)));
      if (flex_unsolved(b->name)) return solve(b->name, t_singleton(env.find(a->name)));
      return env.equal(a->name, b->name);
    }
    if (a->tag != b->tag) return false;
    switch (a->tag) {
      case TyTag::Var:
        return a->name == b->name;
      case TyTag::Arrow:
      case TyTag::Bar:
      case TyTag::Star:
        return unify(a->kids[0], b->kids[0]) && unify(a->kids[1], b->kids[1]);
      case TyTag::Tuple: {
        if (a->kids.size() != b->kids.size()) return false;
        for (size_t i = 0; i < a->kids.size(); ++i)
          if (!unify(a->kids[i], b->kids[i])) return false;
        return true;
      }
      case TyTag::Concrete: {
        if (a->name != b->name || a->fields.size() != b->fields.size()) return false;
        for (const auto& [fn, fa] : a->fields) {
          const Type* fb = nullptr;
          for (const auto& [gn, g] : b->fields)
            if (gn == fn) fb = &g;
          if (!fb || !unify(fa, *fb)) return false;
        }
        if (is_bottom(a->adopts) != is_bottom(b->adopts)) return false;
        return is_bottom(a->adopts) || unify(a->adopts, b->adopts);
      }
      case TyTag::App: {
        if (a->name != b->name || a->kids.size() != b->kids.size()) return false;
        for (size_t i = 0; i < a->kids.size(); ++i)
          if (!unify(a->kids[i], b->kids[i])) return false;
        return true;
      }
      case TyTag::Forall:
      case TyTag::Exists: {
        if (a->binder_kind != b->binder_kind) return false;
        std::string r = names::fresh(a->name);
        return unify(substitute(a->kids[0], a->name, t_var(r)),
                     substitute(b->kids[0], b->name, t_var(r)));
      }
      case TyTag::Anchored: {
        if (flex_unsolved(a->name)) {
          if (!solve(a->name, t_singleton(env.find(b->name)))) return false;
        } else if (flex_unsolved(b->name)) {
          if (!solve(b->name, t_singleton(env.find(a->name)))) return false;
        } else if (!env.equal(a->name, b->name)) {
          return false;
        }
        return unify(a->kids[0], b->kids[0]);
      }
      case TyTag::ModeAnd:
        return a->mode == b->mode && a->name == b->name && unify(a->kids[0], b->kids[0]);
      case TyTag::Empty:
      case TyTag::Dynamic:
      case TyTag::Unknown:
        return true;
      default:
        return false;
    }
  }
};

// ---------------------------------------------------------------------------
// Subsumption

struct Prover {
  const PermCtx& ctx;
  std::optional<PermissionEnv> out = std::nullopt;
  std::set<std::string> missing = {};

  bool mode_holds(const PermissionEnv& env, Mode m, const std::string& subject) {
    Type s = env.solution(subject);
    Type t = s ? s : t_var(subject);
    Fact f = infer_fact(ctx.prog, ctx.facts, env.resolve(t), 0);
    return !f.row(m).is_false;
  }

  bool prove(const PermissionEnv& env, const std::vector<Type>& goals, size_t idx,
             int budget) {
    if (env.inconsistent) {
      out = env;
      return true;
    }
    if (idx == goals.size()) {
      out = env;
      return true;
    }
    Type g = env.resolve(goals[idx]);
    switch (g->tag) {
      case TyTag::Empty:
        return prove(env, goals, idx + 1, budget);
      case TyTag::Star: {
        std::vector<Type> gs = goals;
        gs[idx] = g->kids[1];
        gs.insert(gs.begin() + idx, g->kids[0]);
        return prove(env, gs, idx, budget);
      }
      case TyTag::Anchored: {
        std::string x = g->name;
        if (env.is_flex(x)) {
          Type s = env.solution(x);
          if (s && (s->tag == TyTag::Singleton || s->tag == TyTag::Var)) {
            x = s->name;
          } else {
            missing.insert(pretty(g));
            return false;
          }
        }
        return prove_atom(env, env.find(x), g->kids[0], goals, idx, budget);
      }
      case TyTag::Exists: {
        std::string f = names::fresh("?" + g->name);
        PermissionEnv e2 = env.introduce_flex(f, g->binder_kind);
        std::vector<Type> gs = goals;
        gs[idx] = substitute(g->kids[0], g->name, t_var(f, g->loc));
        return prove(e2, gs, idx, budget);
      }
      case TyTag::Forall: {
        std::string r = names::fresh(g->name);
        std::vector<Type> gs = goals;
        gs[idx] = substitute(g->kids[0], g->name, t_var(r, g->loc));
        return prove(env, gs, idx, budget);
      }
      case TyTag::ModeAnd: {
        if (!mode_holds(env, g->mode, g->name)) {
          missing.insert(pretty(g));
          return false;
        }
        std::vector<Type> gs = goals;
        gs[idx] = g->kids[0];
        return prove(env, gs, idx, budget);
      }
      case TyTag::Var: {
        // Abstract permission variable.
        if (env.is_flex(g->name)) {
          for (size_t i = 0; i < env.loose_.size(); ++i) {
            PermissionEnv e2 = env;
            e2.flex_[g->name].sol = e2.loose_[i];
            e2.loose_.erase(e2.loose_.begin() + i);
            if (prove(e2, goals, idx + 1, budget)) return true;
          }
          PermissionEnv e2 = env;
          e2.flex_[g->name].sol = t_empty();
          return prove(e2, goals, idx + 1, budget);
        }
        for (size_t i = 0; i < env.loose_.size(); ++i) {
          if (!alpha_equal(env.resolve(env.loose_[i]), g)) continue;
          PermissionEnv e2 = env;
          e2.loose_.erase(e2.loose_.begin() + i);
          if (prove(e2, goals, idx + 1, budget)) return true;
        }
        missing.insert(pretty(g));
        return false;
      }
      default:
        missing.insert(pretty(g));
        return false;
    }
  }

  // Replaces goals[idx] with `repl` and continues at idx.
  bool continue_with(const PermissionEnv& env, const std::vector<Type>& goals, size_t idx,
                     int budget, const std::vector<Type>& repl) {
    std::vector<Type> gs = goals;
    gs.erase(gs.begin() + idx);
    gs.insert(gs.begin() + idx, repl.begin(), repl.end());
    return prove(env, gs, idx, budget);
  }

  bool prove_atom(const PermissionEnv& env, const std::string& x, const Type& t0,
                  const std::vector<Type>& goals, size_t idx, int budget) {
    Type t = env.resolve(t0);
    auto fail = [&]() {
      missing.insert(pretty_atom(x, t));
      return false;
    };
    switch (t->tag) {
      case TyTag::Unknown:
        return prove(env, goals, idx + 1, budget);
      case TyTag::Singleton: {
        std::string y = t->name;
        if (env.is_flex(y) && !env.solution(y)) {
          PermissionEnv e2 = env;
          e2.flex_[y].sol = t_singleton(x);
          return prove(e2, goals, idx + 1, budget);
        }
        if (env.equal(x, y)) return prove(env, goals, idx + 1, budget);
        return fail();
      }
      case TyTag::Bar:
        return continue_with(env, goals, idx, budget,
                             {t_anchored(x, t->kids[0], t->loc), t->kids[1]});
      case TyTag::Exists: {
        std::string f = names::fresh("?" + t->name);
        PermissionEnv e2 = env.introduce_flex(f, t->binder_kind);
        return continue_with(
            e2, goals, idx, budget,
            {t_anchored(x, substitute(t->kids[0], t->name, t_var(f, t->loc)), t->loc)});
      }
      case TyTag::Forall: {
        std::string r = names::fresh(t->name);
        return continue_with(
            env, goals, idx, budget,
            {t_anchored(x, substitute(t->kids[0], t->name, t_var(r, t->loc)), t->loc)});
      }
      case TyTag::ModeAnd: {
        if (!mode_holds(env, t->mode, t->name)) return fail();
        return continue_with(env, goals, idx, budget, {t_anchored(x, t->kids[0], t->loc)});
      }
      case TyTag::Consumes: {
        // Internal marker: retire a mutable skeleton matched by an earlier
        // goal, now that its field subgoals have been discharged.
        Type victim = env.resolve(t->kids[0]);
        auto it = env.atoms_.find(x);
        if (it != env.atoms_.end()) {
          for (size_t i = 0; i < it->second.size(); ++i) {
            if (!alpha_equal(env.resolve(it->second[i]), victim)) continue;
            PermissionEnv e2 = env;
            e2.atoms_[x].erase(e2.atoms_[x].begin() + i);
            return prove(e2, goals, idx + 1, budget);
          }
        }
        return fail();
      }
      case TyTag::Tuple: {
        auto it = env.atoms_.find(x);
        if (it != env.atoms_.end()) {
          for (const Type& a0 : it->second) {
            Type a = env.resolve(a0);
            if (a->tag != TyTag::Tuple || a->kids.size() != t->kids.size()) continue;
            std::vector<Type> subgoals;
            for (size_t k = 0; k < t->kids.size(); ++k) {
              assert(a->kids[k]->tag == TyTag::Singleton);
              subgoals.push_back(t_anchored(a->kids[k]->name, t->kids[k], t->loc));
            }
            if (continue_with(env, goals, idx, budget, subgoals)) return true;
          }
        }
        return fail();
      }
      case TyTag::Concrete: {
        const DataDef* goal_def = ctx.prog.def_of_ctor(t->name);
        auto it = env.atoms_.find(x);
        if (it != env.atoms_.end()) {
          for (size_t i = 0; i < it->second.size(); ++i) {
            Type a = env.resolve(it->second[i]);
            if (a->tag != TyTag::Concrete || a->name != t->name) continue;
            if (a->fields.size() != t->fields.size()) continue;
            PermissionEnv e2 = env;
            // A block that currently adopts nothing can be folded at any
            // adopts clause; otherwise the clauses must agree.
            bool atom_bot = !a->adopts || is_bottom(a->adopts);
            if (!atom_bot && !adopts_equal_mod(t->adopts, a->adopts)) {
              Unifier u{ctx, e2};
              if (!u.unify(t->adopts, a->adopts)) continue;
            }
            std::vector<Type> subgoals;
            bool ok = true;
            for (const auto& [fname, goal_ft] : t->fields) {
              const Type* af = nullptr;
              for (const auto& [gn, g] : a->fields)
                if (gn == fname) af = &g;
              if (!af) { ok = false; break; }
              assert((*af)->tag == TyTag::Singleton);
              subgoals.push_back(t_anchored((*af)->name, goal_ft, t->loc));
            }
            if (!ok) continue;
            if (goal_def && goal_def->is_mutable) {
              // The skeleton is consumed, but only after the field subgoals
              // are discharged: they may still need it (e.g. a dynamic field
              // witnessed by this very block's exclusive permission).
              subgoals.push_back(t_anchored(x, t_consumes(a, t->loc), t->loc));
            }
            if (continue_with(e2, goals, idx, budget, subgoals)) return true;
          }
          // Unfold a held single-branch nominal permission, then retry.
          if (budget > 0) {
            for (size_t i = 0; i < it->second.size(); ++i) {
              Type a = env.resolve(it->second[i]);
              if (a->tag != TyTag::Var && a->tag != TyTag::App) continue;
              auto dit = ctx.prog.data.find(a->name);
              if (dit == ctx.prog.data.end()) continue;
              const DataDef& def = dit->second;
              if (def.branches.size() != 1 || def.params.size() != a->kids.size())
                continue;
              PermissionEnv e2 = env;
              e2.atoms_[x].erase(e2.atoms_[x].begin() + i);
              e2.add_mut(ctx, x, instantiate_branch(def, def.branches[0], a->kids));
              if (prove_atom(e2, e2.find(x), t, goals, idx, budget - 1)) return true;
            }
          }
        }
        return fail();
      }
      case TyTag::Var:
      case TyTag::App:
      case TyTag::Arrow:
      case TyTag::Dynamic: {
        auto it = env.atoms_.find(x);
        if (t->tag == TyTag::Dynamic && it != env.atoms_.end()) {
          // dynamic is witnessed by holding any exclusive permission.
          for (const Type& a : it->second) {
            Type ra = env.resolve(a);
            if (ra->tag == TyTag::Dynamic || env.atom_is_exclusive(ctx, ra))
              return prove(env, goals, idx + 1, budget);
          }
          return fail();
        }
        // Direct match against a held atom.
        if (it != env.atoms_.end()) {
          for (size_t i = 0; i < it->second.size(); ++i) {
            PermissionEnv e2 = env;
            Unifier u{ctx, e2};
            if (!u.unify(t, it->second[i])) continue;
            if (!e2.atom_is_duplicable(ctx, e2.resolve(t))) {
              auto& list = e2.atoms_[x];
              list.erase(list.begin() + i);
            }
            if (prove(e2, goals, idx + 1, budget)) return true;
          }
        }
        // A flexible goal can also name the subject itself.
        if (t->tag == TyTag::Var && env.is_flex(t->name) && !env.solution(t->name)) {
          PermissionEnv e2 = env;
          e2.flex_[t->name].sol = t_singleton(x);
          if (prove(e2, goals, idx + 1, budget)) return true;
        }
        // Fold: prove one branch of the definition structurally.
        if (budget > 0 && (t->tag == TyTag::Var || t->tag == TyTag::App)) {
          auto dit = ctx.prog.data.find(t->name);
          if (dit != ctx.prog.data.end() &&
              dit->second.params.size() == t->kids.size()) {
            for (const DataBranch& br : dit->second.branches) {
              Type goal = t_anchored(x, instantiate_branch(dit->second, br, t->kids), t->loc);
              if (continue_with(env, goals, idx, budget - 1, {goal})) return true;
            }
          }
        }
        // Instantiate a held polymorphic permission.
        if (budget > 0 && it != env.atoms_.end()) {
          for (size_t i = 0; i < it->second.size(); ++i) {
            Type a = env.resolve(it->second[i]);
            if (a->tag != TyTag::Forall) continue;
            std::string f = names::fresh("?" + a->name);
            PermissionEnv e2 = env.introduce_flex(f, a->binder_kind);
            if (!e2.atom_is_duplicable(ctx, a)) {
              auto& list = e2.atoms_[x];
              list.erase(list.begin() + i);
            }
            e2.add_mut(ctx, x, substitute(a->kids[0], a->name, t_var(f, a->loc)));
            if (prove_atom(e2, e2.find(x), t, goals, idx, budget - 1)) return true;
          }
        }
        return fail();
      }
      default:
        return fail();
    }
  }
};

std::optional<PermissionEnv> PermissionEnv::subsume(const PermCtx& ctx, const Type& goal,
                                                    std::vector<std::string>* missing) const {
  Prover p{ctx};
  std::vector<Type> goals{goal};
  if (p.prove(*this, goals, 0, ctx.budget)) return std::move(p.out);
  if (missing) missing->assign(p.missing.begin(), p.missing.end());
  return std::nullopt;
}

std::optional<PermissionEnv> PermissionEnv::subsume_atom(
    const PermCtx& ctx, const std::string& x, const Type& t,
    std::vector<std::string>* missing) const {
  return subsume(ctx, t_anchored(find(x), t, t->loc), missing);
}

}  // namespace mezzo
