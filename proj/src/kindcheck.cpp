#include "mezzo/kindcheck.hpp"

#include <set>

#include "mezzo/print.hpp"

namespace mezzo {

namespace {

[[noreturn]] void kerr(const Loc& loc, const std::string& rule, const std::string& msg) {
  throw KindError(loc, rule, msg);
}

void merge_disjoint(std::vector<std::pair<std::string, Kind>>& acc,
                    std::vector<std::pair<std::string, Kind>> more, const Loc& loc) {
  for (auto& b : more) {
    for (const auto& a : acc)
      if (a.first == b.first)
        kerr(loc, "DuplicateName", "name '" + b.first + "' is introduced twice in the same type");
    acc.push_back(std::move(b));
  }
}

void collect_rec(const Type& t, std::vector<std::pair<std::string, Kind>>& acc) {
  switch (t->tag) {
    case TyTag::NameIntro: {
      // The introduced name alone; names nested under it do not escape.
      merge_disjoint(acc, {{t->name, Kind::term()}}, t->loc);
      return;
    }
    case TyTag::Tuple:
      for (const auto& k : t->kids) collect_rec(k, acc);
      return;
    case TyTag::Concrete:
      for (const auto& f : t->fields) collect_rec(f.second, acc);
      return;
    case TyTag::Bar:
      collect_rec(t->kids[0], acc);
      return;
    case TyTag::Consumes:
    case TyTag::ModeAnd:
      collect_rec(t->kids[0], acc);
      return;
    default:
      return;
  }
}

std::string kind_str(const Kind& k) { return kind_to_string(k); }

void expect_kind(const ProgramEnv& prog, const KindEnv& env, Side side, const Type& t,
                 const Kind& want, const char* rule) {
  Kind got = kind_of(prog, env, side, t);
  if (!(got == want))
    kerr(t->loc, rule,
         "expected a " + kind_str(want) + " but '" + pretty(t) + "' has kind " + kind_str(got));
}

}  // namespace

std::vector<std::pair<std::string, Kind>> collect_bound_names(const Type& t) {
  std::vector<std::pair<std::string, Kind>> acc;
  collect_rec(t, acc);
  return acc;
}

void install_builtins(ProgramEnv& env) {
  env.kinds.bind("int", Kind::type());
  env.kinds.bind("bool", Kind::type());
  env.abstracts.push_back("int");
  env.abstracts.push_back("bool");
  Kind ref_kind;
  ref_kind.result = Kind::Base::Type;
  ref_kind.params = {Kind::Base::Type};
  env.kinds.bind("ref", ref_kind);
  env.abstracts.push_back("ref");

  DataDef opt;
  opt.name = "option";
  opt.is_mutable = false;
  opt.params = {{"a", Kind::Base::Type}};
  DataBranch none;
  none.ctor = "None";
  DataBranch some;
  some.ctor = "Some";
  some.fields = {{"value", t_var("a")}};
  opt.branches = {none, some};
  opt.adopts = t_bottom();
  env.kinds.bind("option", opt.kind());
  env.data["option"] = opt;
  env.data_order.push_back("option");
  env.ctors["None"] = {"option", 0};
  env.ctors["Some"] = {"option", 1};
}

Kind kind_of_extended(const ProgramEnv& prog, const KindEnv& env, const Type& t) {
  KindEnv ext = env;
  for (auto& [n, k] : collect_bound_names(t)) ext.bind(n, k);
  return kind_of(prog, ext, Side::Right, t);
}

Kind kind_of(const ProgramEnv& prog, const KindEnv& env, Side side, const Type& t) {
  switch (t->tag) {
    case TyTag::Var: {
      auto k = env.lookup(t->name);
      if (!k) kerr(t->loc, "K-Var", "unbound name '" + t->name + "'");
      return *k;
    }
    case TyTag::Arrow: {
      expect_kind(prog, env, Side::Right, t->kids[0], Kind::type(), "K-Arrow");
      expect_kind(prog, env, Side::Right, t->kids[1], Kind::type(), "K-Arrow");
      return Kind::type();
    }
    case TyTag::EArrow: {
      KindEnv ext = env;
      for (auto& [n, k] : collect_bound_names(t->kids[0])) ext.bind(n, k);
      expect_kind(prog, ext, Side::Left, t->kids[0], Kind::type(), "K-Arrow");
      Kind cod = kind_of_extended(prog, ext, t->kids[1]);
      if (!(cod == Kind::type()))
        kerr(t->kids[1]->loc, "K-Arrow", "arrow codomain must be a type");
      return Kind::type();
    }
    case TyTag::Tuple: {
      for (const auto& k : t->kids) expect_kind(prog, env, side, k, Kind::type(), "K-Tuple");
      return Kind::type();
    }
    case TyTag::Concrete: {
      const DataBranch* br = prog.branch_of_ctor(t->name);
      if (!br) kerr(t->loc, "K-Concrete", "unknown constructor '" + t->name + "'");
      if (br->fields.size() != t->fields.size())
        kerr(t->loc, "K-Concrete",
             "constructor '" + t->name + "' expects " + std::to_string(br->fields.size()) +
                 " fields, got " + std::to_string(t->fields.size()));
      std::set<std::string> want;
      for (const auto& f : br->fields) want.insert(f.first);
      for (const auto& f : t->fields) {
        if (!want.count(f.first))
          kerr(f.second->loc, "K-Concrete",
               "constructor '" + t->name + "' has no field '" + f.first + "'");
        expect_kind(prog, env, side, f.second, Kind::type(), "K-Concrete");
      }
      if (t->adopts) expect_kind(prog, env, Side::Right, t->adopts, Kind::type(), "K-Concrete");
      return Kind::type();
    }
    case TyTag::App: {
      auto hk = env.lookup(t->name);
      if (!hk) kerr(t->loc, "K-Var", "unbound name '" + t->name + "'");
      if (hk->params.size() != t->kids.size())
        kerr(t->loc, "K-App",
             "'" + t->name + "' expects " + std::to_string(hk->params.size()) +
                 " arguments, got " + std::to_string(t->kids.size()));
      for (size_t i = 0; i < t->kids.size(); ++i) {
        Kind got = kind_of_extended(prog, env, t->kids[i]);
        Kind want;
        want.result = hk->params[i];
        if (!(got == want))
          kerr(t->kids[i]->loc, "K-App",
               "argument " + std::to_string(i + 1) + " of '" + t->name + "' must be a " +
                   kind_str(want) + ", got " + kind_str(got));
      }
      Kind res;
      res.result = hk->result;
      return res;
    }
    case TyTag::Forall:
    case TyTag::Exists: {
      KindEnv ext = env;
      ext.bind(t->name, t->binder_kind);
      Kind body = kind_of_extended(prog, ext, t->kids[0]);
      if (!body.params.empty())
        kerr(t->kids[0]->loc, "K-Quant", "quantified body must have a base kind");
      return body;
    }
    case TyTag::Singleton: {
      auto k = env.lookup(t->name);
      if (!k) kerr(t->loc, "K-Var", "unbound name '" + t->name + "'");
      if (!(*k == Kind::term()))
        kerr(t->loc, "K-Singleton", "'" + t->name + "' must name a value, has kind " + kind_str(*k));
      return Kind::type();
    }
    case TyTag::Bar: {
      expect_kind(prog, env, side, t->kids[0], Kind::type(), "K-Bar");
      expect_kind(prog, env, side, t->kids[1], Kind::perm(), "K-Bar");
      return Kind::type();
    }
    case TyTag::Anchored: {
      auto k = env.lookup(t->name);
      if (!k) kerr(t->loc, "K-Var", "unbound name '" + t->name + "'");
      if (!(*k == Kind::term()))
        kerr(t->loc, "K-Anchored", "'" + t->name + "' must name a value, has kind " + kind_str(*k));
      KindEnv ext = env;
      for (auto& [n, kk] : collect_bound_names(t->kids[0])) ext.bind(n, kk);
      expect_kind(prog, ext, Side::Right, t->kids[0], Kind::type(), "K-Anchored");
      return Kind::perm();
    }
    case TyTag::Empty:
      return Kind::perm();
    case TyTag::Star: {
      expect_kind(prog, env, side, t->kids[0], Kind::perm(), "K-Star");
      expect_kind(prog, env, side, t->kids[1], Kind::perm(), "K-Star");
      return Kind::perm();
    }
    case TyTag::Dynamic:
    case TyTag::Unknown:
      return Kind::type();
    case TyTag::Consumes: {
      if (side != Side::Left)
        kerr(t->loc, "K-Consumes",
             "'consumes' is only permitted in the domain of a function type");
      Kind k = kind_of(prog, env, Side::Right, t->kids[0]);
      if (!(k == Kind::type()) && !(k == Kind::perm()))
        kerr(t->loc, "K-Consumes", "'consumes' applies to a type or a permission");
      return k;
    }
    case TyTag::NameIntro: {
      auto k = env.lookup(t->name);
      if (!k) kerr(t->loc, "K-Var", "unbound name '" + t->name + "'");
      if (!(*k == Kind::term()))
        kerr(t->loc, "K-NameIntro", "introduced name '" + t->name + "' clashes with a type");
      expect_kind(prog, env, side, t->kids[0], Kind::type(), "K-NameIntro");
      return Kind::type();
    }
    case TyTag::ModeAnd: {
      auto k = env.lookup(t->name);
      if (!k) kerr(t->loc, "K-Var", "unbound name '" + t->name + "'");
      if (!(*k == Kind::type()) && !(*k == Kind::perm()))
        kerr(t->loc, "K-And", "a mode constraint applies to a type or permission name");
      return kind_of(prog, env, side, t->kids[0]);
    }
  }
  kerr(t->loc, "K-Var", "malformed type");
}

namespace {

// Expression walking: verifies embedded types and value references.
struct ExprChecker {
  const ProgramEnv& prog;
  KindEnv env;

  void bind_pattern(const Pattern& p) {
    switch (p->tag) {
      case PatTag::Var:
        if (p->name != "_") env.bind(p->name, Kind::term());
        return;
      case PatTag::Tuple:
        for (const auto& k : p->kids) bind_pattern(k);
        return;
      case PatTag::Ctor: {
        if (!prog.branch_of_ctor(p->name))
          kerr(p->loc, "K-Concrete", "unknown constructor '" + p->name + "' in pattern");
        for (const auto& k : p->kids) bind_pattern(k);
        return;
      }
    }
  }

  void check_type_here(const Type& t, Side side) {
    KindEnv ext = env;
    for (auto& [n, k] : collect_bound_names(t)) ext.bind(n, k);
    kind_of(prog, ext, side, t);
  }

  void walk(const Expr& e) {
    switch (e->tag) {
      case ExTag::Var: {
        auto k = env.lookup(e->name);
        if (!k) kerr(e->loc, "K-Var", "unbound name '" + e->name + "'");
        if (!(*k == Kind::term()))
          kerr(e->loc, "K-Var", "'" + e->name + "' is a type, not a value");
        return;
      }
      case ExTag::IntLit:
      case ExTag::BoolLit:
        return;
      case ExTag::TupleE:
        for (const auto& k : e->kids) walk(k);
        return;
      case ExTag::Construct: {
        const DataBranch* br = prog.branch_of_ctor(e->name);
        if (!br) kerr(e->loc, "K-Concrete", "unknown constructor '" + e->name + "'");
        if (br->fields.size() != e->field_inits.size())
          kerr(e->loc, "K-Concrete",
               "constructor '" + e->name + "' expects " + std::to_string(br->fields.size()) +
                   " fields, got " + std::to_string(e->field_inits.size()));
        std::set<std::string> want;
        for (const auto& f : br->fields) want.insert(f.first);
        for (const auto& f : e->field_inits) {
          if (!want.count(f.first))
            kerr(e->loc, "K-Concrete",
                 "constructor '" + e->name + "' has no field '" + f.first + "'");
          walk(f.second);
        }
        if (e->ty0) check_type_here(e->ty0, Side::Right);
        return;
      }
      case ExTag::Let: {
        walk(e->kids[0]);
        size_t mark = env.size();
        bind_pattern(e->pat);
        walk(e->kids[1]);
        env.truncate(mark);
        return;
      }
      case ExTag::Fun: {
        size_t mark = env.size();
        for (const auto& [n, k] : e->binders) env.bind(n, k);
        check_type_here(e->ty0, Side::Left);
        for (auto& [n, k] : collect_bound_names(e->ty0)) env.bind(n, k);
        check_type_here(e->ty1, Side::Right);
        walk(e->kids[0]);
        env.truncate(mark);
        return;
      }
      case ExTag::Lambda: {
        size_t mark = env.size();
        for (const auto& [n, k] : e->binders) env.bind(n, k);
        check_type_here(e->ty0, Side::Left);
        for (auto& [n, k] : collect_bound_names(e->ty0)) env.bind(n, k);
        env.bind(e->name, Kind::term());
        check_type_here(e->ty1, Side::Right);
        walk(e->kids[0]);
        env.truncate(mark);
        return;
      }
      case ExTag::TypeApp: {
        walk(e->kids[0]);
        check_type_here(e->ty0, Side::Right);
        return;
      }
      case ExTag::Apply:
        walk(e->kids[0]);
        walk(e->kids[1]);
        return;
      case ExTag::MatchE: {
        walk(e->kids[0]);
        for (const auto& arm : e->arms) {
          size_t mark = env.size();
          bind_pattern(arm.first);
          walk(arm.second);
          env.truncate(mark);
        }
        return;
      }
      case ExTag::IfE:
        walk(e->kids[0]);
        walk(e->kids[1]);
        walk(e->kids[2]);
        return;
      case ExTag::Read:
        walk(e->kids[0]);
        return;
      case ExTag::Write:
        walk(e->kids[0]);
        walk(e->kids[1]);
        return;
      case ExTag::WriteTag: {
        walk(e->kids[0]);
        if (!prog.branch_of_ctor(e->name))
          kerr(e->loc, "K-Concrete", "unknown constructor '" + e->name + "'");
        return;
      }
      case ExTag::Give:
      case ExTag::Take:
        walk(e->kids[0]);
        walk(e->kids[1]);
        return;
      case ExTag::Taking:
        walk(e->kids[0]);
        walk(e->kids[1]);
        walk(e->kids[2]);
        return;
      case ExTag::FailE:
        return;
      case ExTag::Binop:
        walk(e->kids[0]);
        walk(e->kids[1]);
        return;
      case ExTag::Annot:
        walk(e->kids[0]);
        check_type_here(e->ty0, Side::Right);
        return;
    }
  }
};

void check_data_def(const ProgramEnv& prog, const DataDef& def) {
  KindEnv env = prog.kinds;
  for (const auto& [n, k] : def.params) env.bind(n, Kind{k, {}});
  for (const auto& br : def.branches) {
    for (const auto& f : br.fields)
      expect_kind(prog, env, Side::Right, f.second, Kind::type(), "K-Concrete");
  }
  if (def.adopts) expect_kind(prog, env, Side::Right, def.adopts, Kind::type(), "K-Concrete");
}

}  // namespace

ProgramEnv check_program(const Program& prog_in) {
  ProgramEnv env;
  install_builtins(env);

  // First pass: register type-level names so definitions can be recursive.
  for (const auto& item : prog_in.items) {
    if (item.tag == ItemTag::Data) {
      const DataDef& d = item.data;
      if (env.kinds.lookup(d.name))
        kerr(d.loc, "DuplicateName", "type '" + d.name + "' is already defined");
      env.kinds.bind(d.name, d.kind());
      env.data[d.name] = d;
      env.data_order.push_back(d.name);
      for (size_t i = 0; i < d.branches.size(); ++i) {
        const std::string& c = d.branches[i].ctor;
        if (env.ctors.count(c))
          kerr(d.loc, "DuplicateName", "constructor '" + c + "' is already defined");
        env.ctors[c] = {d.name, i};
      }
    } else if (item.tag == ItemTag::Abstract) {
      const AbstractDef& a = item.abstract;
      if (env.kinds.lookup(a.name))
        kerr(a.loc, "DuplicateName", "type '" + a.name + "' is already defined");
      env.kinds.bind(a.name, a.kind());
      env.abstracts.push_back(a.name);
    }
  }

  // Second pass: check bodies.
  for (const auto& item : prog_in.items) {
    switch (item.tag) {
      case ItemTag::Data:
        check_data_def(env, item.data);
        break;
      case ItemTag::Abstract:
        break;
      case ItemTag::Fact: {
        const FactDecl& f = item.fact;
        auto k = env.kinds.lookup(f.type_name);
        if (!k) kerr(f.loc, "K-Var", "unbound name '" + f.type_name + "'");
        if (k->params.size() != f.params.size())
          kerr(f.loc, "K-App",
               "'" + f.type_name + "' expects " + std::to_string(k->params.size()) +
                   " arguments, got " + std::to_string(f.params.size()));
        for (const auto& [m, p] : f.hypothesis) {
          (void)m;
          bool found = false;
          for (const auto& q : f.params) found = found || q == p;
          if (!found)
            kerr(f.loc, "K-Var", "fact hypothesis names '" + p + "', not a parameter");
        }
        break;
      }
      case ItemTag::Val: {
        const ValDef& v = item.val;
        ExprChecker ck{env, env.kinds};
        if (v.signature) {
          KindEnv ext = env.kinds;
          for (auto& [n, k] : collect_bound_names(v.signature)) ext.bind(n, k);
          Kind k = kind_of(env, ext, Side::Right, v.signature);
          if (!(k == Kind::type()))
            kerr(v.signature->loc, "K-Var", "a value signature must be a type");
        }
        if (v.is_rec) ck.env.bind(v.name, Kind::term());
        ck.walk(v.body);
        env.kinds.bind(v.name, Kind::term());
        break;
      }
    }
  }
  return env;
}

}  // namespace mezzo
