#include "mezzo/facts.hpp"

#include <algorithm>
#include <cassert>
#include <set>
#include <sstream>

namespace mezzo {

Hyp hyp_conj(const Hyp& a, const Hyp& b) {
  if (a.is_false) return a;
  if (b.is_false) return b;
  assert(a.req.size() == b.req.size());
  Hyp out = a;
  for (size_t i = 0; i < out.req.size(); ++i) out.req[i] = mode_meet(out.req[i], b.req[i]);
  return out;
}

bool hyp_implies(const Hyp& a, const Hyp& b) {
  if (a.is_false) return true;
  if (b.is_false) return false;
  assert(a.req.size() == b.req.size());
  for (size_t i = 0; i < a.req.size(); ++i)
    if (!mode_leq(a.req[i], b.req[i])) return false;
  return true;
}

bool hyp_trivial(const Hyp& h) {
  if (h.is_false) return false;
  for (Mode m : h.req)
    if (m != Mode::Affine) return false;
  return true;
}

Fact fact_constant(Mode m, size_t arity) {
  Fact f;
  for (size_t i = 0; i < 4; ++i) {
    Mode mi = static_cast<Mode>(i);
    f.rows[i] = mode_leq(m, mi) ? Hyp::truth(arity) : Hyp::falsity(arity);
  }
  return f;
}

Fact fact_parameter(size_t index, size_t arity) {
  assert(index < arity);
  Fact f;
  for (size_t i = 0; i < 4; ++i) {
    Hyp h = Hyp::truth(arity);
    h.req[index] = static_cast<Mode>(i);
    f.rows[i] = h;
  }
  return f;
}

Fact fact_join(const Fact& a, const Fact& b) {
  Fact f;
  for (size_t i = 0; i < 4; ++i) f.rows[i] = hyp_conj(a.rows[i], b.rows[i]);
  return f;
}

Fact fact_meet_constant(Mode m, const Fact& f) {
  Fact out = f;
  for (size_t i = 0; i < 4; ++i)
    if (mode_leq(m, static_cast<Mode>(i))) out.rows[i] = Hyp::truth(f.arity());
  return out;
}

Fact fact_compose(const Fact& head, const std::vector<Fact>& args) {
  assert(head.arity() == args.size());
  assert(!args.empty());
  size_t ambient = args[0].arity();
  Fact out;
  for (size_t i = 0; i < 4; ++i) {
    const Hyp& h = head.rows[i];
    if (h.is_false) {
      out.rows[i] = Hyp::falsity(ambient);
      continue;
    }
    Hyp acc = Hyp::truth(ambient);
    for (size_t j = 0; j < args.size(); ++j) acc = hyp_conj(acc, args[j].row(h.req[j]));
    out.rows[i] = acc;
  }
  return out;
}

bool fact_leq(const Fact& a, const Fact& b) {
  // a is at least as informative: b's hypothesis implies a's, for every mode.
  for (size_t i = 0; i < 4; ++i)
    if (!hyp_implies(b.rows[i], a.rows[i])) return false;
  return true;
}

Fact fact_resize(const Fact& f, size_t arity) {
  Fact out;
  for (size_t i = 0; i < 4; ++i) {
    assert(f.rows[i].is_false || hyp_trivial(f.rows[i]));
    out.rows[i] = f.rows[i].is_false ? Hyp::falsity(arity) : Hyp::truth(arity);
  }
  return out;
}

namespace {

Fact lookup_type_fact(const FactEnv& env, const std::string& name, size_t want_arity) {
  auto it = env.types.find(name);
  if (it == env.types.end()) return fact_constant(Mode::Affine, want_arity);
  return it->second;
}

struct Inferrer {
  const ProgramEnv& prog;
  const FactEnv& env;
  size_t ambient;
  std::map<std::string, Fact> local_vars;  // quantifier-bound, refined vars

  Fact var_fact(const std::string& name) {
    auto it = local_vars.find(name);
    if (it != local_vars.end()) return it->second;
    auto it2 = env.vars.find(name);
    if (it2 != env.vars.end()) return it2->second;
    auto it3 = env.types.find(name);
    if (it3 != env.types.end()) return fact_resize(it3->second, ambient);
    return fact_constant(Mode::Affine, ambient);
  }

  Fact concrete_fact(const TypeNode& t) {
    const DataDef* def = prog.def_of_ctor(t.name);
    if (def && def->is_mutable) return fact_constant(Mode::Exclusive, ambient);
    Fact f = fact_constant(Mode::Duplicable, ambient);
    for (auto& [fname, ftype] : t.fields) {
      (void)fname;
      f.row(Mode::Duplicable) =
          hyp_conj(f.row(Mode::Duplicable), infer(ftype).row(Mode::Duplicable));
    }
    return f;
  }

  Fact infer(const Type& t) {
    switch (t->tag) {
      case TyTag::Var:
        return var_fact(t->name);
      case TyTag::Arrow:
      case TyTag::Dynamic:
      case TyTag::Singleton:
      case TyTag::Empty:
        return fact_constant(Mode::Duplicable, ambient);
      case TyTag::Unknown:
        return fact_constant(Mode::Affine, ambient);
      case TyTag::Tuple: {
        Fact f = fact_constant(Mode::Duplicable, ambient);
        for (auto& k : t->kids)
          f.row(Mode::Duplicable) =
              hyp_conj(f.row(Mode::Duplicable), infer(k).row(Mode::Duplicable));
        return f;
      }
      case TyTag::Concrete:
        return concrete_fact(*t);
      case TyTag::App: {
        Fact head = lookup_type_fact(env, t->name, t->kids.size());
        std::vector<Fact> args;
        for (auto& k : t->kids) args.push_back(infer(k));
        return fact_compose(head, args);
      }
      case TyTag::Forall:
      case TyTag::Exists: {
        Inferrer inner = *this;
        // A universal variable can be anything, including the bottom type,
        // so every mode stays reachable; an existential is only affine.
        inner.local_vars[t->name] = t->tag == TyTag::Forall
                                        ? fact_constant(Mode::Bottom, ambient)
                                        : fact_constant(Mode::Affine, ambient);
        return inner.infer(t->kids[0]);
      }
      case TyTag::Bar: {
        Fact f1 = infer(t->kids[0]);
        Fact f2 = infer(t->kids[1]);
        return fact_join(f1, fact_meet_constant(Mode::Exclusive, f2));
      }
      case TyTag::Anchored: {
        Fact f = infer(t->kids[0]);
        // "Exclusive" is meaningless for a permission.
        f.row(Mode::Exclusive) = Hyp::falsity(ambient);
        return f;
      }
      case TyTag::Star:
        return fact_join(infer(t->kids[0]), infer(t->kids[1]));
      case TyTag::ModeAnd: {
        Inferrer inner = *this;
        inner.local_vars[t->name] = fact_meet_constant(t->mode, var_fact(t->name));
        return inner.infer(t->kids[0]);
      }
      case TyTag::EArrow:
      case TyTag::Consumes:
      case TyTag::NameIntro:
        assert(false && "facts run on translated types only");
        return fact_constant(Mode::Affine, ambient);
    }
    assert(false && "unreachable");
    return fact_constant(Mode::Affine, ambient);
  }
};

Fact declared_fact(const FactDecl& d) {
  size_t n = d.params.size();
  Fact f;
  for (size_t i = 0; i < 4; ++i) f.rows[i] = Hyp::falsity(n);
  Hyp h = Hyp::truth(n);
  for (auto& [m, p] : d.hypothesis) {
    for (size_t i = 0; i < n; ++i)
      if (d.params[i] == p) h.req[i] = mode_meet(h.req[i], m);
  }
  f.row(d.conclusion) = h;
  f.row(Mode::Affine) = Hyp::truth(n);
  return f;
}

std::string hyp_clauses(const Hyp& h, const std::vector<std::pair<std::string, Kind::Base>>& params) {
  std::ostringstream os;
  bool first = true;
  for (size_t i = 0; i < h.req.size(); ++i) {
    if (h.req[i] == Mode::Affine) continue;
    if (!first) os << " and ";
    first = false;
    os << mode_name(h.req[i]) << ' ' << params[i].first;
  }
  return os.str();
}

}  // namespace

Fact infer_fact(const ProgramEnv& prog, const FactEnv& env, const Type& t, size_t ambient) {
  Inferrer inf{prog, env, ambient, {}};
  return inf.infer(t);
}

bool is_duplicable(const ProgramEnv& prog, const FactEnv& env, const Type& t) {
  Fact f = infer_fact(prog, env, t, 0);
  return !f.row(Mode::Duplicable).is_false;
}

bool is_exclusive(const ProgramEnv& prog, const FactEnv& env, const Type& t) {
  Fact f = infer_fact(prog, env, t, 0);
  return !f.row(Mode::Exclusive).is_false;
}

FactEnv compute_facts(const ProgramEnv& prog, const Program& p) {
  FactEnv env;
  env.types["int"] = fact_constant(Mode::Duplicable, 0);
  env.types["bool"] = fact_constant(Mode::Duplicable, 0);
  env.types["ref"] = fact_constant(Mode::Exclusive, 1);

  // Declared facts: collected up front so abstract types are usable by the
  // definitions that follow them.
  std::map<std::string, const FactDecl*> decls;
  for (auto& item : p.items) {
    if (item.tag != ItemTag::Fact) continue;
    const FactDecl& d = item.fact;
    if (decls.count(d.type_name))
      throw FactError(d.loc, "DuplicateName",
                      "type '" + d.type_name + "' already has a declared fact");
    decls[d.type_name] = &d;
  }

  std::set<std::string> assigned_by_decl;
  for (auto& item : p.items) {
    if (item.tag != ItemTag::Abstract) continue;
    const AbstractDef& a = item.abstract;
    auto it = decls.find(a.name);
    if (it != decls.end()) {
      env.types[a.name] = declared_fact(*it->second);
      assigned_by_decl.insert(a.name);
    } else {
      env.types[a.name] = fact_constant(Mode::Affine, a.params.size());
    }
  }

  // Most permissive starting point; joins weaken it until stable.
  for (auto& name : prog.data_order) {
    const DataDef& d = prog.data.at(name);
    env.types[name] = fact_constant(Mode::Bottom, d.params.size());
  }

  bool changed = true;
  while (changed) {
    changed = false;
    for (auto& name : prog.data_order) {
      const DataDef& d = prog.data.at(name);
      size_t n = d.params.size();
      FactEnv scoped = env;
      for (size_t i = 0; i < n; ++i) scoped.vars[d.params[i].first] = fact_parameter(i, n);
      Fact f = fact_constant(Mode::Bottom, n);
      for (auto& br : d.branches) {
        Type asty = t_concrete(br.ctor, br.fields, nullptr, d.loc);
        f = fact_join(f, infer_fact(prog, scoped, asty, n));
      }
      if (!(f == env.types[name])) {
        env.types[name] = f;
        changed = true;
      }
    }
  }

  for (auto& [name, decl] : decls) {
    if (assigned_by_decl.count(name)) continue;  // user abstract: the decl is the source
    auto it = env.types.find(name);
    if (it == env.types.end())
      throw FactError(decl->loc, "K-Var", "unbound name '" + name + "'");
    Fact want = declared_fact(*decl);
    if (!(want == it->second))
      throw FactError(decl->loc, "FactMismatch",
                      "declared fact for '" + name + "' does not match the inferred one");
  }
  return env;
}

std::string dump_facts(const ProgramEnv& prog, const FactEnv& env) {
  std::vector<std::string> names;
  for (auto& [name, f] : env.types) {
    (void)f;
    bool builtin = name == "int" || name == "bool" || name == "ref" || name == "option";
    if (!builtin) names.push_back(name);
  }
  std::sort(names.begin(), names.end());

  std::ostringstream os;
  for (auto& name : names) {
    const Fact& f = env.types.at(name);
    std::vector<std::pair<std::string, Kind::Base>> params;
    auto dit = prog.data.find(name);
    if (dit != prog.data.end()) params = dit->second.params;
    else {
      // Abstract: synthesize parameter names for clause rendering.
      auto k = prog.kinds.lookup(name);
      size_t n = k ? k->params.size() : f.arity();
      for (size_t i = 0; i < n; ++i) params.emplace_back(std::string(1, char('a' + i)), Kind::Base::Type);
    }
    os << "fact " << name << ": ";
    const Hyp& d = f.row(Mode::Duplicable);
    const Hyp& x = f.row(Mode::Exclusive);
    if (!d.is_false) {
      if (hyp_trivial(d)) os << "duplicable";
      else os << hyp_clauses(d, params) << " => duplicable";
    } else if (!x.is_false) {
      if (hyp_trivial(x)) os << "exclusive";
      else os << hyp_clauses(x, params) << " => exclusive";
    } else {
      os << "affine";
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace mezzo
