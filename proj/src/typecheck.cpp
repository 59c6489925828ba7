// The type checker.
//
// Expressions are first brought into a-normal form: every intermediate
// result is let-bound, and match/if continuations are pushed into the
// branches, so every branch construct sits in tail position and the checker
// never needs to join permission environments.  Checking then threads one
// PermissionEnv left to right through the normalized program.

#include "mezzo/typecheck.hpp"

#include <algorithm>
#include <cassert>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mezzo/error.hpp"
#include "mezzo/print.hpp"

namespace mezzo {

namespace {

// ---------------------------------------------------------------------------
// Binder uniquification
//
// Let- and match-bound names are made unique program-wide so the permission
// environment can use plain names as keys.  Function binders are recorded
// but kept: they are freshened per use site by the checker when they would
// collide.

Type rename_type(const Type& t, const std::map<std::string, std::string>& ren) {
  if (!t || ren.empty()) return t;
  std::vector<std::pair<std::string, Type>> subst;
  for (auto& [from, to] : ren)
    if (from != to) subst.emplace_back(from, t_var(to, t->loc));
  if (subst.empty()) return t;
  return substitute_all(t, subst);
}

struct Renamer {
  std::set<std::string>& used;

  std::string claim(const std::string& n) {
    if (n == "_") return n;
    if (used.insert(n).second) return n;
    std::string f = names::fresh(n);
    used.insert(f);
    return f;
  }

  Pattern pattern(const Pattern& p, std::map<std::string, std::string>& ren) {
    switch (p->tag) {
      case PatTag::Var: {
        if (p->name == "_") return p;
        std::string n = claim(p->name);
        ren[p->name] = n;
        return n == p->name ? p : p_var(n, p->loc);
      }
      case PatTag::Tuple: {
        std::vector<Pattern> kids;
        for (auto& k : p->kids) kids.push_back(pattern(k, ren));
        return p_tuple(std::move(kids), p->loc);
      }
      case PatTag::Ctor: {
        std::vector<std::pair<std::string, Pattern>> fields;
        for (auto& [f, sub] : p->fields) fields.emplace_back(f, pattern(sub, ren));
        return p_ctor(p->name, std::move(fields), p->loc);
      }
    }
    return p;
  }

  Expr go(const Expr& e, std::map<std::string, std::string> ren) {
    switch (e->tag) {
      case ExTag::Var: {
        auto it = ren.find(e->name);
        return it == ren.end() ? e : e_var(it->second, e->loc);
      }
      case ExTag::IntLit:
      case ExTag::BoolLit:
      case ExTag::FailE:
        return e;
      case ExTag::TupleE: {
        std::vector<Expr> kids;
        for (auto& k : e->kids) kids.push_back(go(k, ren));
        return e_tuple(std::move(kids), e->loc);
      }
      case ExTag::Construct: {
        std::vector<std::pair<std::string, Expr>> inits;
        for (auto& [f, v] : e->field_inits) inits.emplace_back(f, go(v, ren));
        return e_construct(e->name, std::move(inits), rename_type(e->ty0, ren), e->loc);
      }
      case ExTag::Let: {
        Expr rhs = go(e->kids[0], ren);
        std::map<std::string, std::string> inner = ren;
        Pattern p = pattern(e->pat, inner);
        return e_let(p, rhs, go(e->kids[1], inner), e->loc);
      }
      case ExTag::Lambda: {
        std::map<std::string, std::string> inner = ren;
        for (auto& [bn, bk] : e->binders) {
          (void)bk;
          used.insert(bn);
          inner.erase(bn);
        }
        used.insert(e->name);
        inner.erase(e->name);
        return e_lambda(e->binders, e->name, rename_type(e->ty0, inner),
                        rename_type(e->ty1, inner), go(e->kids[0], inner), e->loc);
      }
      case ExTag::TypeApp:
        return e_typeapp(go(e->kids[0], ren), rename_type(e->ty0, ren), e->loc);
      case ExTag::Apply:
        return e_apply(go(e->kids[0], ren), go(e->kids[1], ren), e->loc);
      case ExTag::MatchE: {
        Expr scrut = go(e->kids[0], ren);
        std::vector<std::pair<Pattern, Expr>> arms;
        for (auto& [p, b] : e->arms) {
          std::map<std::string, std::string> inner = ren;
          Pattern p2 = pattern(p, inner);
          arms.emplace_back(p2, go(b, inner));
        }
        return e_match(scrut, std::move(arms), e->loc);
      }
      case ExTag::IfE:
        return e_if(go(e->kids[0], ren), go(e->kids[1], ren), go(e->kids[2], ren), e->loc);
      case ExTag::Read:
        return e_read(go(e->kids[0], ren), e->field, e->loc);
      case ExTag::Write:
        return e_write(go(e->kids[0], ren), e->field, go(e->kids[1], ren), e->loc);
      case ExTag::WriteTag:
        return e_writetag(go(e->kids[0], ren), e->name, e->loc);
      case ExTag::Give:
        return e_give(go(e->kids[0], ren), go(e->kids[1], ren), e->loc);
      case ExTag::Take:
        return e_take(go(e->kids[0], ren), go(e->kids[1], ren), e->loc);
      case ExTag::Binop:
        return e_binop(e->name, go(e->kids[0], ren), go(e->kids[1], ren), e->loc);
      case ExTag::Annot:
        return e_annot(go(e->kids[0], ren), rename_type(e->ty0, ren), e->loc);
      case ExTag::Fun:
      case ExTag::Taking:
        assert(false && "surface forms are eliminated by desugaring");
        return e;
    }
    return e;
  }
};

// ---------------------------------------------------------------------------
// A-normal form

struct Normalizer {
  using K = std::function<Expr(const Expr&)>;
  using KV = std::function<Expr(const std::string&)>;

  std::string hint_for(const Expr& e) {
    switch (e->tag) {
      case ExTag::Read:
        return e->field;
      case ExTag::Apply:
        return "r";
      case ExTag::IntLit:
        return "n";
      case ExTag::BoolLit:
      case ExTag::Binop:
        return "b";
      case ExTag::Lambda:
        return "f";
      case ExTag::TupleE:
        return "t";
      case ExTag::Write:
      case ExTag::WriteTag:
      case ExTag::Give:
      case ExTag::Take:
        return "u";
      default:
        return "v";
    }
  }

  Expr tail(const Expr& e) {
    return norm(e, [](const Expr& flat) { return flat; });
  }

  // Names the value of `e`, binding it if it is not already a variable.
  Expr atomize(const Expr& e, const KV& k) {
    if (e->tag == ExTag::Var) return k(e->name);
    std::string hint = hint_for(e);
    return norm(e, [&](const Expr& flat) {
      if (flat->tag == ExTag::Var) return k(flat->name);
      std::string x = names::fresh(hint);
      return e_let(p_var(x, flat->loc), flat, k(x), flat->loc);
    });
  }

  // Continuations must not close over mutable state: branch constructs
  // invoke them once per arm, so accumulated names travel by value.
  Expr atomize_list(const std::vector<Expr>& es, size_t i, std::vector<std::string> acc,
                    const std::function<Expr(const std::vector<std::string>&)>& done) {
    if (i == es.size()) return done(acc);
    return atomize(es[i], [this, &es, i, acc, &done](const std::string& v) {
      std::vector<std::string> acc2 = acc;
      acc2.push_back(v);
      return atomize_list(es, i + 1, std::move(acc2), done);
    });
  }

  Expr norm(const Expr& e, const K& k) {
    switch (e->tag) {
      case ExTag::Var:
      case ExTag::IntLit:
      case ExTag::BoolLit:
      case ExTag::FailE:
        return k(e);
      case ExTag::TupleE:
        return atomize_list(e->kids, 0, {}, [&](const std::vector<std::string>& vs) {
          std::vector<Expr> kids;
          for (auto& v : vs) kids.push_back(e_var(v, e->loc));
          return k(e_tuple(std::move(kids), e->loc));
        });
      case ExTag::Construct: {
        std::vector<Expr> inits;
        for (auto& [f, v] : e->field_inits) {
          (void)f;
          inits.push_back(v);
        }
        return atomize_list(inits, 0, {}, [&](const std::vector<std::string>& vs) {
          std::vector<std::pair<std::string, Expr>> fields;
          for (size_t i = 0; i < vs.size(); ++i)
            fields.emplace_back(e->field_inits[i].first, e_var(vs[i], e->loc));
          return k(e_construct(e->name, std::move(fields), e->ty0, e->loc));
        });
      }
      case ExTag::Let:
        return norm(e->kids[0], [&](const Expr& flat) {
          return e_let(e->pat, flat, norm(e->kids[1], k), e->loc);
        });
      case ExTag::Lambda:
        return k(e_lambda(e->binders, e->name, e->ty0, e->ty1, tail(e->kids[0]), e->loc));
      case ExTag::TypeApp:
        return atomize(e->kids[0], [&](const std::string& f) {
          return k(e_typeapp(e_var(f, e->loc), e->ty0, e->loc));
        });
      case ExTag::Apply:
        return atomize(e->kids[0], [&](const std::string& f) {
          return atomize(e->kids[1], [&](const std::string& a) {
            return k(e_apply(e_var(f, e->loc), e_var(a, e->loc), e->loc));
          });
        });
      case ExTag::MatchE:
        return atomize(e->kids[0], [&](const std::string& s) {
          std::vector<std::pair<Pattern, Expr>> arms;
          for (auto& [p, b] : e->arms) arms.emplace_back(p, norm(b, k));
          return e_match(e_var(s, e->loc), std::move(arms), e->loc);
        });
      case ExTag::IfE:
        return atomize(e->kids[0], [&](const std::string& c) {
          return e_if(e_var(c, e->loc), norm(e->kids[1], k), norm(e->kids[2], k), e->loc);
        });
      case ExTag::Read:
        return atomize(e->kids[0], [&](const std::string& x) {
          return k(e_read(e_var(x, e->loc), e->field, e->loc));
        });
      case ExTag::Write:
        return atomize(e->kids[0], [&](const std::string& x) {
          return atomize(e->kids[1], [&](const std::string& v) {
            return k(e_write(e_var(x, e->loc), e->field, e_var(v, e->loc), e->loc));
          });
        });
      case ExTag::WriteTag:
        return atomize(e->kids[0], [&](const std::string& x) {
          return k(e_writetag(e_var(x, e->loc), e->name, e->loc));
        });
      case ExTag::Give:
        return atomize(e->kids[0], [&](const std::string& c) {
          return atomize(e->kids[1], [&](const std::string& b) {
            return k(e_give(e_var(c, e->loc), e_var(b, e->loc), e->loc));
          });
        });
      case ExTag::Take:
        return atomize(e->kids[0], [&](const std::string& c) {
          return atomize(e->kids[1], [&](const std::string& b) {
            return k(e_take(e_var(c, e->loc), e_var(b, e->loc), e->loc));
          });
        });
      case ExTag::Binop:
        return atomize(e->kids[0], [&](const std::string& a) {
          return atomize(e->kids[1], [&](const std::string& b) {
            return k(e_binop(e->name, e_var(a, e->loc), e_var(b, e->loc), e->loc));
          });
        });
      case ExTag::Annot:
        return atomize(e->kids[0], [&](const std::string& x) {
          return k(e_annot(e_var(x, e->loc), e->ty0, e->loc));
        });
      case ExTag::Fun:
      case ExTag::Taking:
        assert(false && "surface forms are eliminated by desugaring");
        return e;
    }
    return e;
  }
};

// Replaces a free type-level name inside every type embedded in an
// expression; used when a function binder collides with an enclosing one.
Expr subst_type_in_expr(const Expr& e, const std::string& name, const Type& repl) {
  auto st = [&](const Type& t) { return t ? substitute(t, name, repl) : t; };
  std::vector<Expr> kids;
  for (auto& k : e->kids) kids.push_back(subst_type_in_expr(k, name, repl));
  switch (e->tag) {
    case ExTag::Construct: {
      std::vector<std::pair<std::string, Expr>> inits;
      for (auto& [f, v] : e->field_inits)
        inits.emplace_back(f, subst_type_in_expr(v, name, repl));
      return e_construct(e->name, std::move(inits), st(e->ty0), e->loc);
    }
    case ExTag::Let:
      return e_let(e->pat, kids[0], kids[1], e->loc);
    case ExTag::Lambda: {
      for (auto& [bn, bk] : e->binders) {
        (void)bk;
        if (bn == name) return e;  // shadowed below this point
      }
      return e_lambda(e->binders, e->name, st(e->ty0), st(e->ty1), kids[0], e->loc);
    }
    case ExTag::TypeApp:
      return e_typeapp(kids[0], st(e->ty0), e->loc);
    case ExTag::MatchE: {
      std::vector<std::pair<Pattern, Expr>> arms;
      for (auto& [p, b] : e->arms) arms.emplace_back(p, subst_type_in_expr(b, name, repl));
      return e_match(kids[0], std::move(arms), e->loc);
    }
    case ExTag::Annot:
      return e_annot(kids[0], st(e->ty0), e->loc);
    case ExTag::TupleE:
      return e_tuple(std::move(kids), e->loc);
    case ExTag::Apply:
      return e_apply(kids[0], kids[1], e->loc);
    case ExTag::IfE:
      return e_if(kids[0], kids[1], kids[2], e->loc);
    case ExTag::Read:
      return e_read(kids[0], e->field, e->loc);
    case ExTag::Write:
      return e_write(kids[0], e->field, kids[1], e->loc);
    case ExTag::WriteTag:
      return e_writetag(kids[0], e->name, e->loc);
    case ExTag::Give:
      return e_give(kids[0], kids[1], e->loc);
    case ExTag::Take:
      return e_take(kids[0], kids[1], e->loc);
    case ExTag::Binop:
      return e_binop(e->name, kids[0], kids[1], e->loc);
    default:
      return e;
  }
}

// ---------------------------------------------------------------------------
// The checker

struct Checker {
  const ProgramEnv& prog;
  FactEnv fenv;  // extended with assumptions inside each function body
  CheckOptions opts;
  std::vector<PermSnapshot> snaps;
  std::set<std::string> type_scope;  // function binders currently in scope

  PermCtx ctx() const { return PermCtx{prog, fenv, opts.depth}; }

  [[noreturn]] void err(const Loc& loc, const char* rule, const std::string& msg,
                        std::vector<std::string> missing = {}) {
    throw TypeError(loc, rule, msg, std::move(missing));
  }

  void snapshot(const Loc& loc, const PermissionEnv& env) {
    PermSnapshot s{loc, env.render(ctx())};
    if (!snaps.empty() && snaps.back().loc.line == loc.line &&
        snaps.back().loc.col == loc.col && snaps.back().atoms == s.atoms)
      return;
    snaps.push_back(std::move(s));
  }

  struct Res {
    std::string var;
    PermissionEnv env;
  };

  Res unit_result(PermissionEnv env, const Loc& loc) {
    std::string r = names::fresh("u");
    PermissionEnv e2 = env.add(ctx(), r, t_unit(loc));
    return {r, std::move(e2)};
  }

  // -- patterns -------------------------------------------------------------

  // Refines x's permission to the given constructor.  A branch that is
  // statically impossible comes back marked inconsistent, and is then
  // accepted without further checking.
  PermissionEnv refine(PermissionEnv env, const std::string& x, const std::string& ctor,
                       const Loc& loc) {
    const DataDef* def = prog.def_of_ctor(ctor);
    if (!def) err(loc, "Match", "unknown constructor " + ctor);
    auto sa = env.structural_atom(ctx(), x);
    if (sa) {
      PermissionEnv env2 = sa->first;
      Type sk = sa->second;
      if (sk->tag == TyTag::Concrete) {
        if (sk->name == ctor) return env2;
        env2.inconsistent = true;
        return env2;
      }
      err(loc, "Match", "cannot match a tuple against constructor " + ctor);
    }
    for (const Type& atom : env.atoms_of(x)) {
      if (atom->tag != TyTag::Var && atom->tag != TyTag::App) continue;
      if (atom->name != def->name) continue;
      if (atom->kids.size() != def->params.size()) continue;
      const DataBranch* br = prog.branch_of_ctor(ctor);
      PermissionEnv env2 = env.drop_atom(x, atom);
      return env2.add(ctx(), x, instantiate_branch(*def, *br, atom->kids));
    }
    err(loc, "Match", "no permission to match " + x + " against " + ctor);
  }

  PermissionEnv bind_pattern(PermissionEnv env, const Pattern& p, const std::string& r) {
    if (env.inconsistent) return env;
    switch (p->tag) {
      case PatTag::Var:
        if (p->name == "_") return env;
        return env.equate(ctx(), p->name, r);
      case PatTag::Tuple: {
        auto sa = env.structural_atom(ctx(), r);
        if (!sa || sa->second->tag != TyTag::Tuple)
          err(p->loc, "Match", "pattern requires a tuple permission for " + r);
        PermissionEnv env2 = sa->first;
        Type sk = sa->second;
        if (sk->kids.size() != p->kids.size())
          err(p->loc, "Match", "tuple pattern arity mismatch");
        for (size_t i = 0; i < p->kids.size(); ++i) {
          assert(sk->kids[i]->tag == TyTag::Singleton);
          env2 = bind_pattern(std::move(env2), p->kids[i], sk->kids[i]->name);
        }
        return env2;
      }
      case PatTag::Ctor: {
        PermissionEnv env2 = refine(std::move(env), r, p->name, p->loc);
        if (env2.inconsistent) return env2;
        auto sa = env2.structural_atom(ctx(), r);
        assert(sa && sa->second->tag == TyTag::Concrete);
        PermissionEnv env3 = sa->first;
        Type sk = sa->second;
        for (auto& [fname, sub] : p->fields) {
          const Type* f = nullptr;
          for (auto& [gn, g] : sk->fields)
            if (gn == fname) f = &g;
          if (!f) err(p->loc, "Match", "constructor " + p->name + " has no field " + fname);
          assert((*f)->tag == TyTag::Singleton);
          env3 = bind_pattern(std::move(env3), sub, (*f)->name);
        }
        return env3;
      }
    }
    return env;
  }

  // -- helpers --------------------------------------------------------------

  // Reconstructs a standalone type for x by inlining the expanded atoms;
  // used to type top-level values that carry no signature.
  Type inline_fields(const PermissionEnv& env, const Type& t, int depth) {
    if (depth == 0) return t_unknown();
    switch (t->tag) {
      case TyTag::Tuple: {
        std::vector<Type> comps;
        for (auto& k : t->kids)
          comps.push_back(k->tag == TyTag::Singleton ? type_of(env, k->name, depth - 1)
                                                     : inline_fields(env, k, depth - 1));
        return t_tuple(std::move(comps), t->loc);
      }
      case TyTag::Concrete: {
        std::vector<std::pair<std::string, Type>> fields;
        for (auto& [n, ft] : t->fields)
          fields.emplace_back(n, ft->tag == TyTag::Singleton
                                     ? type_of(env, ft->name, depth - 1)
                                     : inline_fields(env, ft, depth - 1));
        return t_concrete(t->name, std::move(fields), t->adopts, t->loc);
      }
      default:
        return t;
    }
  }

  Type type_of(const PermissionEnv& env, const std::string& x, int depth) {
    std::vector<Type> atoms = env.atoms_of(x);
    if (atoms.empty()) return t_unknown();
    Type pick = atoms.front();
    for (const Type& a : atoms)
      if (a->tag != TyTag::Dynamic) {
        pick = a;
        break;
      }
    return inline_fields(env, pick, depth);
  }

  Type extract_type(const PermissionEnv& env, const std::string& x) {
    return type_of(env, x, 8);
  }

  // The type of values b may adopt, from whichever of b's permissions
  // carries an adopts clause.
  Type adoptee_type(const PermissionEnv& env, const std::string& b, const Loc& loc,
                    const char* rule) {
    for (const Type& atom : env.atoms_of(b)) {
      Type t = env.resolve(atom);
      if (t->tag == TyTag::Concrete && t->adopts && !is_bottom(t->adopts)) return t->adopts;
      if (t->tag != TyTag::Var && t->tag != TyTag::App) continue;
      auto dit = prog.data.find(t->name);
      if (dit == prog.data.end()) continue;
      const DataDef& def = dit->second;
      if (!def.adopts || is_bottom(def.adopts)) continue;
      if (def.params.size() != t->kids.size()) continue;
      std::vector<std::pair<std::string, Type>> subst;
      for (size_t i = 0; i < def.params.size(); ++i)
        subst.emplace_back(def.params[i].first, t->kids[i]);
      return substitute_all(def.adopts, subst);
    }
    err(loc, rule, b + " has no adopts clause in its current permission");
  }

  // -- expression forms -----------------------------------------------------

  Res check_construct(PermissionEnv env, const Expr& e) {
    const DataBranch* br = prog.branch_of_ctor(e->name);
    if (!br) err(e->loc, "New", "unknown constructor " + e->name);
    if (e->field_inits.size() != br->fields.size())
      err(e->loc, "New",
          e->name + " expects " + std::to_string(br->fields.size()) + " fields, got " +
              std::to_string(e->field_inits.size()));
    std::vector<std::pair<std::string, Type>> fields;
    for (auto& [fname, ftype] : br->fields) {
      (void)ftype;
      const Expr* init = nullptr;
      for (auto& [n, v] : e->field_inits)
        if (n == fname) init = &v;
      if (!init) err(e->loc, "New", "missing field " + fname + " in " + e->name);
      assert((*init)->tag == ExTag::Var);
      fields.emplace_back(fname, t_singleton((*init)->name, e->loc));
    }
    std::string r = names::fresh("v");
    // A block of an adopting type is born with its clause; the type
    // parameters it mentions start flexible and are pinned by later goals.
    Type adopts = e->ty0;
    const DataDef* def = prog.def_of_ctor(e->name);
    if (!adopts && def && def->adopts) {
      adopts = def->adopts;
      for (const auto& [p, k] : def->params) {
        std::string fx = names::fresh("?" + p);
        env = env.introduce_flex(fx, Kind{k, {}});
        adopts = substitute(adopts, p, t_var(fx, e->loc));
      }
    }
    PermissionEnv env2 = env.add(ctx(), r, t_concrete(e->name, std::move(fields), adopts, e->loc));
    return {r, std::move(env2)};
  }

  Res check_apply(PermissionEnv env, const Expr& e) {
    const std::string f = e->kids[0]->name;
    const std::string a = e->kids[1]->name;
    std::vector<std::string> all_missing;
    for (const Type& atom : env.atoms_of(f)) {
      PermissionEnv e2 = env;
      Type t = atom;
      std::vector<Type> constraints;
      for (;;) {
        t = e2.resolve(t);
        if (t->tag == TyTag::Forall) {
          std::string fx = names::fresh("?" + t->name);
          e2 = e2.introduce_flex(fx, t->binder_kind);
          t = substitute(t->kids[0], t->name, t_var(fx, t->loc));
        } else if (t->tag == TyTag::ModeAnd) {
          constraints.push_back(t_modeand(t->mode, t->name, t_empty(t->loc), t->loc));
          t = t->kids[0];
        } else {
          break;
        }
      }
      if (t->tag != TyTag::Arrow) continue;
      // The argument goal first: matching it solves the instantiation the
      // mode constraints are then checked at.
      Type goal = t_anchored(a, t->kids[0], e->loc);
      for (auto& c : constraints) goal = t_star(goal, c, e->loc);
      std::vector<std::string> missing;
      auto out = e2.subsume(ctx(), goal, &missing);
      if (!out) {
        for (auto& m : missing) all_missing.push_back(m);
        continue;
      }
      // A flexible that the argument left unsolved stays live in the
      // environment; a later goal may still determine it.
      Type cod = out->resolve(t->kids[1]);
      std::string r = names::fresh("r");
      PermissionEnv env3 = out->add(ctx(), r, cod);
      return {r, std::move(env3)};
    }
    std::sort(all_missing.begin(), all_missing.end());
    all_missing.erase(std::unique(all_missing.begin(), all_missing.end()), all_missing.end());
    err(e->loc, "Application", f + " cannot be applied to " + a, std::move(all_missing));
  }

  Res check_typeapp(PermissionEnv env, const Expr& e) {
    const std::string f = e->kids[0]->name;
    for (const Type& atom : env.atoms_of(f)) {
      Type t = env.resolve(atom);
      if (t->tag != TyTag::Forall) continue;
      Type inst = substitute(t->kids[0], t->name, e->ty0);
      PermissionEnv env2 = env.add(ctx(), f, inst);
      return {f, std::move(env2)};
    }
    err(e->loc, "Instantiation", "type application requires a polymorphic value");
  }

  Res check_read(PermissionEnv env, const Expr& e) {
    const std::string x = e->kids[0]->name;
    auto sa = env.structural_atom(ctx(), x);
    if (!sa) err(e->loc, "Read", "no permission to read a field of " + x);
    PermissionEnv env2 = sa->first;
    Type sk = sa->second;
    if (sk->tag != TyTag::Concrete)
      err(e->loc, "Read", "tuple components are accessed by pattern, not by field");
    for (auto& [fname, ft] : sk->fields)
      if (fname == e->field) {
        assert(ft->tag == TyTag::Singleton);
        return {ft->name, std::move(env2)};
      }
    err(e->loc, "Read", sk->name + " has no field " + e->field);
  }

  Res check_write(PermissionEnv env, const Expr& e) {
    const std::string x = e->kids[0]->name;
    const std::string v = e->kids[1]->name;
    auto sa = env.structural_atom(ctx(), x);
    if (!sa) err(e->loc, "Write", "no permission to write a field of " + x);
    PermissionEnv env2 = sa->first;
    Type sk = sa->second;
    if (sk->tag != TyTag::Concrete) err(e->loc, "Write", "tuples are immutable");
    const DataDef* def = prog.def_of_ctor(sk->name);
    assert(def);
    if (!def->is_mutable)
      err(e->loc, "Write", sk->name + " is a branch of an immutable type");
    bool found = false;
    std::vector<std::pair<std::string, Type>> fields;
    for (auto& [fname, ft] : sk->fields) {
      if (fname == e->field) {
        fields.emplace_back(fname, t_singleton(v, e->loc));
        found = true;
      } else {
        fields.emplace_back(fname, ft);
      }
    }
    if (!found) err(e->loc, "Write", sk->name + " has no field " + e->field);
    PermissionEnv env3 =
        env2.set_structural(ctx(), x, t_concrete(sk->name, std::move(fields), sk->adopts, sk->loc));
    return unit_result(std::move(env3), e->loc);
  }

  Res check_writetag(PermissionEnv env, const Expr& e) {
    const std::string x = e->kids[0]->name;
    auto sa = env.structural_atom(ctx(), x);
    if (!sa) err(e->loc, "WriteTag", "no permission to retag " + x);
    PermissionEnv env2 = sa->first;
    Type sk = sa->second;
    if (sk->tag != TyTag::Concrete) err(e->loc, "WriteTag", "tuples carry no tag");
    const DataDef* old_def = prog.def_of_ctor(sk->name);
    assert(old_def);
    if (!old_def->is_mutable)
      err(e->loc, "WriteTag", sk->name + " is a branch of an immutable type");
    const DataBranch* nb = prog.branch_of_ctor(e->name);
    if (!nb) err(e->loc, "WriteTag", "unknown constructor " + e->name);
    if (nb->fields.size() != sk->fields.size())
      err(e->loc, "WriteTag", "retagging cannot change the number of fields");
    // Fields keep their values position by position and take the new
    // branch's names; the adopts clause of the old permission is kept.
    std::vector<std::pair<std::string, Type>> fields;
    for (size_t i = 0; i < nb->fields.size(); ++i)
      fields.emplace_back(nb->fields[i].first, sk->fields[i].second);
    PermissionEnv env3 =
        env2.set_structural(ctx(), x, t_concrete(e->name, std::move(fields), sk->adopts, e->loc));
    return unit_result(std::move(env3), e->loc);
  }

  Res check_give(PermissionEnv env, const Expr& e) {
    const std::string c = e->kids[0]->name;
    const std::string b = e->kids[1]->name;
    Type u = adoptee_type(env, b, e->loc, "Give");
    if (!is_exclusive(prog, fenv, u))
      err(e->loc, "Give", "adopted values must have exclusive type, not " + pretty(u));
    std::vector<std::string> missing;
    auto out = env.subsume_atom(ctx(), c, u, &missing);
    if (!out) err(e->loc, "Give", "giving " + c + " requires " + pretty_atom(c, u), missing);
    PermissionEnv env2 = out->add(ctx(), c, t_dynamic(e->loc));
    return unit_result(std::move(env2), e->loc);
  }

  Res check_take(PermissionEnv env, const Expr& e) {
    const std::string c = e->kids[0]->name;
    const std::string b = e->kids[1]->name;
    Type u = adoptee_type(env, b, e->loc, "Take");
    std::vector<std::string> missing;
    auto out = env.subsume_atom(ctx(), c, t_dynamic(e->loc), &missing);
    if (!out)
      err(e->loc, "Take", "taking requires " + pretty_atom(c, t_dynamic()), missing);
    PermissionEnv env2 = out->add(ctx(), c, u);
    return unit_result(std::move(env2), e->loc);
  }

  Res check_binop(PermissionEnv env, const Expr& e) {
    const std::string a = e->kids[0]->name;
    const std::string b = e->kids[1]->name;
    bool arith = e->name == "+" || e->name == "-" || e->name == "*";
    if (arith || e->name == "<") {
      for (const std::string& v : {a, b}) {
        std::vector<std::string> missing;
        auto out = env.subsume_atom(ctx(), v, t_var("int", e->loc), &missing);
        if (!out)
          err(e->loc, "Application", "operator " + e->name + " requires int operands",
              missing);
        env = std::move(*out);
      }
    }
    // == is physical comparison; any two values may be compared.
    std::string r = names::fresh(arith ? "n" : "b");
    PermissionEnv env2 = env.add(ctx(), r, t_var(arith ? "int" : "bool", e->loc));
    return {r, std::move(env2)};
  }

  Res check_annot(PermissionEnv env, const Expr& e) {
    const std::string x = e->kids[0]->name;
    std::vector<std::string> missing;
    auto out = env.subsume_atom(ctx(), x, e->ty0, &missing);
    if (!out)
      err(e->loc, "Sub", x + " does not admit the annotated type " + pretty(e->ty0), missing);
    PermissionEnv env2 = out->add(ctx(), x, e->ty0);
    return {x, std::move(env2)};
  }

  // The function rule.  The body starts from the duplicable fragment of the
  // enclosing environment plus the argument's permission; mode constraints
  // on the domain become fact assumptions.
  Res check_lambda(PermissionEnv env, const Expr& e0) {
    Expr e = e0;
    for (auto& [bn, bk] : e0->binders) {
      (void)bk;
      if (!type_scope.count(bn)) continue;
      std::string nb = names::fresh(bn);
      Type repl = t_var(nb, e0->loc);
      std::vector<std::pair<std::string, Kind>> binders;
      for (auto& [n, k] : e->binders) binders.emplace_back(n == bn ? nb : n, k);
      e = e_lambda(std::move(binders), e->name, substitute(e->ty0, bn, repl),
                   substitute(e->ty1, bn, repl), subst_type_in_expr(e->kids[0], bn, repl),
                   e->loc);
    }

    FactEnv saved = fenv;
    std::vector<std::string> scoped;
    for (auto& [bn, bk] : e->binders) {
      if (bk == Kind::type() || bk == Kind::perm())
        fenv.vars[bn] = fact_constant(Mode::Affine, 0);
      if (type_scope.insert(bn).second) scoped.push_back(bn);
    }
    Type dom = e->ty0;
    while (dom->tag == TyTag::ModeAnd) {
      fenv.vars[dom->name] = fact_constant(dom->mode, 0);
      dom = dom->kids[0];
    }
    PermissionEnv inner = env.duplicable_part(ctx());
    inner = inner.add(ctx(), e->name, dom);
    snapshot(e->loc, inner);
    Type cod = e->ty1;
    check(std::move(inner), e->kids[0], &cod);
    for (auto& n : scoped) type_scope.erase(n);
    fenv = std::move(saved);

    // The function's own type: domain constraints hoist back above the
    // arrow, underneath the quantifiers, where callers discharge them.
    Type d2 = e->ty0;
    std::vector<Type> mands;
    while (d2->tag == TyTag::ModeAnd) {
      mands.push_back(d2);
      d2 = d2->kids[0];
    }
    Type fn = t_arrow(d2, e->ty1, e->loc);
    for (auto it = mands.rbegin(); it != mands.rend(); ++it)
      fn = t_modeand((*it)->mode, (*it)->name, fn, (*it)->loc);
    for (auto it = e->binders.rbegin(); it != e->binders.rend(); ++it)
      fn = t_forall(it->first, it->second, fn, e->loc);
    std::string r = names::fresh("f");
    PermissionEnv env2 = env.add(ctx(), r, fn);
    return {r, std::move(env2)};
  }

  Res rhs(PermissionEnv env, const Expr& e) {
    if (env.inconsistent) return {names::fresh("dead"), std::move(env)};
    switch (e->tag) {
      case ExTag::Var:
        return {e->name, std::move(env)};
      case ExTag::IntLit: {
        std::string r = names::fresh("n");
        PermissionEnv env2 = env.add(ctx(), r, t_var("int", e->loc));
        return {r, std::move(env2)};
      }
      case ExTag::BoolLit: {
        std::string r = names::fresh("b");
        PermissionEnv env2 = env.add(ctx(), r, t_var("bool", e->loc));
        return {r, std::move(env2)};
      }
      case ExTag::FailE: {
        PermissionEnv env2 = env;
        env2.inconsistent = true;
        return {names::fresh("dead"), std::move(env2)};
      }
      case ExTag::TupleE: {
        std::vector<Type> comps;
        for (auto& k : e->kids) {
          assert(k->tag == ExTag::Var);
          comps.push_back(t_singleton(k->name, e->loc));
        }
        std::string r = names::fresh("t");
        PermissionEnv env2 = env.add(ctx(), r, t_tuple(std::move(comps), e->loc));
        return {r, std::move(env2)};
      }
      case ExTag::Construct:
        return check_construct(std::move(env), e);
      case ExTag::Apply:
        return check_apply(std::move(env), e);
      case ExTag::TypeApp:
        return check_typeapp(std::move(env), e);
      case ExTag::Read:
        return check_read(std::move(env), e);
      case ExTag::Write:
        return check_write(std::move(env), e);
      case ExTag::WriteTag:
        return check_writetag(std::move(env), e);
      case ExTag::Give:
        return check_give(std::move(env), e);
      case ExTag::Take:
        return check_take(std::move(env), e);
      case ExTag::Binop:
        return check_binop(std::move(env), e);
      case ExTag::Annot:
        return check_annot(std::move(env), e);
      case ExTag::Lambda:
        return check_lambda(std::move(env), e);
      default:
        assert(false && "control forms are handled by check");
        return {names::fresh("dead"), std::move(env)};
    }
  }

  Res check_match(PermissionEnv env, const Expr& e, const Type* expected) {
    assert(e->kids[0]->tag == ExTag::Var);
    const std::string s = e->kids[0]->name;
    if (e->arms.empty()) err(e->loc, "Match", "match with no branches");
    std::optional<Type> synth;
    for (auto& [p, body] : e->arms) {
      PermissionEnv arm = bind_pattern(env, p, s);
      snapshot(p->loc, arm);
      const Type* exp = expected ? expected : (synth ? &*synth : nullptr);
      Res r = check(std::move(arm), body, exp);
      if (!expected && !synth && !r.env.inconsistent)
        synth = extract_type(r.env, r.var);
    }
    std::string rv = names::fresh("m");
    Type rt = expected ? *expected : (synth ? *synth : t_unknown(e->loc));
    PermissionEnv env2 = env.add(ctx(), rv, rt);
    return {rv, std::move(env2)};
  }

  Res check_if(PermissionEnv env, const Expr& e, const Type* expected) {
    const std::string c = e->kids[0]->name;
    std::vector<std::string> missing;
    auto out = env.subsume_atom(ctx(), c, t_var("bool", e->loc), &missing);
    if (!out) err(e->loc, "Match", "the condition must be bool", missing);
    env = std::move(*out);
    std::optional<Type> synth;
    for (int i = 1; i <= 2; ++i) {
      const Type* exp = expected ? expected : (synth ? &*synth : nullptr);
      Res r = check(env, e->kids[i], exp);
      if (!expected && !synth && !r.env.inconsistent)
        synth = extract_type(r.env, r.var);
    }
    std::string rv = names::fresh("m");
    Type rt = expected ? *expected : (synth ? *synth : t_unknown(e->loc));
    PermissionEnv env2 = env.add(ctx(), rv, rt);
    return {rv, std::move(env2)};
  }

  Res check(PermissionEnv env, const Expr& e, const Type* expected) {
    if (env.inconsistent) return {names::fresh("dead"), std::move(env)};
    switch (e->tag) {
      case ExTag::Let: {
        Res r = rhs(std::move(env), e->kids[0]);
        PermissionEnv env2 = bind_pattern(std::move(r.env), e->pat, r.var);
        snapshot(e->loc, env2);
        return check(std::move(env2), e->kids[1], expected);
      }
      case ExTag::MatchE:
        return check_match(std::move(env), e, expected);
      case ExTag::IfE:
        return check_if(std::move(env), e, expected);
      default: {
        Res r = rhs(std::move(env), e);
        if (expected && !r.env.inconsistent) {
          std::vector<std::string> missing;
          auto out = r.env.subsume_atom(ctx(), r.var, *expected, &missing);
          if (!out)
            err(e->loc, "Function",
                "the result does not admit the expected type " + pretty(*expected), missing);
          r.env = std::move(*out);
        }
        return r;
      }
    }
  }

  // Checks a function value against its declared signature, peeling the
  // signature's own quantifiers and constraints so they scope over the body
  // as assumptions.
  void check_lambda_against(PermissionEnv env, const Expr& lam, const Type& sig,
                            const Loc& loc) {
    FactEnv saved = fenv;
    std::vector<std::string> scoped;
    Type t = sig;
    for (;;) {
      if (t->tag == TyTag::Forall) {
        if (t->binder_kind == Kind::type() || t->binder_kind == Kind::perm())
          fenv.vars[t->name] = fact_constant(Mode::Affine, 0);
        if (type_scope.insert(t->name).second) scoped.push_back(t->name);
        t = t->kids[0];
      } else if (t->tag == TyTag::ModeAnd) {
        fenv.vars[t->name] = fact_constant(t->mode, 0);
        t = t->kids[0];
      } else {
        break;
      }
    }
    if (t->tag != TyTag::Arrow)
      err(loc, "Function", "the signature of a function value must be an arrow type");
    Type dom = t->kids[0];
    while (dom->tag == TyTag::ModeAnd) {
      fenv.vars[dom->name] = fact_constant(dom->mode, 0);
      dom = dom->kids[0];
    }
    Type cod = t->kids[1];
    PermissionEnv inner = env.duplicable_part(ctx());
    inner = inner.add(ctx(), lam->name, dom);
    snapshot(lam->loc, inner);
    check(std::move(inner), lam->kids[0], &cod);
    for (auto& n : scoped) type_scope.erase(n);
    fenv = std::move(saved);
  }
};

}  // namespace

Expr normalize(const Expr& e, std::set<std::string>& used) {
  Renamer r{used};
  Expr renamed = r.go(e, {});
  Normalizer n;
  return n.tail(renamed);
}

CheckResult typecheck_program(const ProgramEnv& prog, const FactEnv& facts, const Program& p,
                              const CheckOptions& opts) {
  Checker ck{prog, facts, opts, {}, {}};
  CheckResult res;
  std::set<std::string> val_names;
  for (auto& item : p.items)
    if (item.tag == ItemTag::Val) val_names.insert(item.val.name);
  std::vector<std::pair<std::string, Type>> globals;
  for (auto& item : p.items) {
    if (item.tag != ItemTag::Val) continue;
    const ValDef& v = item.val;
    // a fresh copy per value keeps one value's binders from forcing renames
    // in the next one
    std::set<std::string> used = val_names;
    Expr body = normalize(v.body, used);
    PermissionEnv env;
    for (auto& [g, t] : globals) env = env.add(ck.ctx(), g, t);
    if (v.is_rec) {
      if (!v.signature)
        throw TypeError(v.loc, "Function", "a recursive value needs a signature");
      env = env.add(ck.ctx(), v.name, v.signature);
    }
    ck.type_scope.clear();
    for (auto& [g, t] : globals) {
      (void)t;
      ck.type_scope.insert(g);
    }
    Type got;
    if (v.signature && body->tag == ExTag::Lambda) {
      ck.check_lambda_against(std::move(env), body, v.signature, v.loc);
      got = v.signature;
    } else if (v.signature) {
      ck.check(std::move(env), body, &v.signature);
      got = v.signature;
    } else {
      Checker::Res r = ck.check(std::move(env), body, nullptr);
      got = ck.extract_type(r.env, r.var);
      for (const std::string& n : free_names(got))
        if (!n.empty() && n[0] == '?' && !r.env.solution(n))
          throw TypeError(v.loc, "Instantiation",
                          "the type of " + v.name +
                              " is not fully determined; add a signature");
    }
    globals.emplace_back(v.name, got);
    res.value_types[v.name] = got;
  }
  res.snapshots = std::move(ck.snaps);
  return res;
}

}  // namespace mezzo
