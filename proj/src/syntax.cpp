#include "mezzo/syntax.hpp"

#include <atomic>
#include <cassert>
#include <map>
#include <stdexcept>

namespace mezzo {

// ---------------------------------------------------------------------------
// Modes

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::Bottom: return "bottom";
    case Mode::Duplicable: return "duplicable";
    case Mode::Exclusive: return "exclusive";
    case Mode::Affine: return "affine";
  }
  return "?";
}

bool mode_leq(Mode a, Mode b) {
  if (a == b) return true;
  if (a == Mode::Bottom) return true;
  if (b == Mode::Affine) return true;
  return false;
}

Mode mode_join(Mode a, Mode b) {
  if (mode_leq(a, b)) return b;
  if (mode_leq(b, a)) return a;
  return Mode::Affine;  // duplicable vs exclusive
}

Mode mode_meet(Mode a, Mode b) {
  if (mode_leq(a, b)) return a;
  if (mode_leq(b, a)) return b;
  return Mode::Bottom;  // duplicable vs exclusive
}

// ---------------------------------------------------------------------------
// Kinds

const char* kind_base_name(Kind::Base b) {
  switch (b) {
    case Kind::Base::Type: return "type";
    case Kind::Base::Term: return "term";
    case Kind::Base::Perm: return "perm";
  }
  return "?";
}

std::string kind_to_string(const Kind& k) {
  if (k.is_base()) return kind_base_name(k.result);
  std::string s;
  for (auto p : k.params) {
    s += kind_base_name(p);
    s += " -> ";
  }
  s += kind_base_name(k.result);
  return s;
}

// ---------------------------------------------------------------------------
// Type builders

namespace {
std::shared_ptr<TypeNode> mk(TyTag tag, Loc loc) {
  auto n = std::make_shared<TypeNode>();
  n->tag = tag;
  n->loc = loc;
  return n;
}
}  // namespace

Type t_var(std::string name, Loc loc) {
  auto n = mk(TyTag::Var, loc);
  n->name = std::move(name);
  return n;
}
Type t_arrow(Type dom, Type cod, Loc loc) {
  auto n = mk(TyTag::Arrow, loc);
  n->kids = {std::move(dom), std::move(cod)};
  return n;
}
Type t_earrow(Type dom, Type cod, Loc loc) {
  auto n = mk(TyTag::EArrow, loc);
  n->kids = {std::move(dom), std::move(cod)};
  return n;
}
Type t_tuple(std::vector<Type> comps, Loc loc) {
  auto n = mk(TyTag::Tuple, loc);
  n->kids = std::move(comps);
  return n;
}
Type t_unit(Loc loc) { return t_tuple({}, loc); }
Type t_concrete(std::string ctor, std::vector<std::pair<std::string, Type>> fields,
                Type adopts, Loc loc) {
  auto n = mk(TyTag::Concrete, loc);
  n->name = std::move(ctor);
  n->fields = std::move(fields);
  n->adopts = adopts ? std::move(adopts) : t_bottom(loc);
  return n;
}
Type t_app(std::string head, std::vector<Type> args, Loc loc) {
  auto n = mk(TyTag::App, loc);
  n->name = std::move(head);
  n->kids = std::move(args);
  return n;
}
Type t_forall(std::string binder, Kind k, Type body, Loc loc) {
  auto n = mk(TyTag::Forall, loc);
  n->name = std::move(binder);
  n->binder_kind = std::move(k);
  n->kids = {std::move(body)};
  return n;
}
Type t_exists(std::string binder, Kind k, Type body, Loc loc) {
  auto n = mk(TyTag::Exists, loc);
  n->name = std::move(binder);
  n->binder_kind = std::move(k);
  n->kids = {std::move(body)};
  return n;
}
Type t_singleton(std::string term_var, Loc loc) {
  auto n = mk(TyTag::Singleton, loc);
  n->name = std::move(term_var);
  return n;
}
Type t_bar(Type ty, Type perm, Loc loc) {
  auto n = mk(TyTag::Bar, loc);
  n->kids = {std::move(ty), std::move(perm)};
  return n;
}
Type t_anchored(std::string term_var, Type ty, Loc loc) {
  auto n = mk(TyTag::Anchored, loc);
  n->name = std::move(term_var);
  n->kids = {std::move(ty)};
  return n;
}
Type t_empty(Loc loc) { return mk(TyTag::Empty, loc); }
Type t_star(Type p, Type q, Loc loc) {
  auto n = mk(TyTag::Star, loc);
  n->kids = {std::move(p), std::move(q)};
  return n;
}
Type t_dynamic(Loc loc) { return mk(TyTag::Dynamic, loc); }
Type t_unknown(Loc loc) { return mk(TyTag::Unknown, loc); }
Type t_consumes(Type inner, Loc loc) {
  auto n = mk(TyTag::Consumes, loc);
  n->kids = {std::move(inner)};
  return n;
}
Type t_nameintro(std::string term_var, Type inner, Loc loc) {
  auto n = mk(TyTag::NameIntro, loc);
  n->name = std::move(term_var);
  n->kids = {std::move(inner)};
  return n;
}
Type t_modeand(Mode m, std::string subject, Type body, Loc loc) {
  auto n = mk(TyTag::ModeAnd, loc);
  n->mode = m;
  n->name = std::move(subject);
  n->kids = {std::move(body)};
  return n;
}

Type t_bottom(Loc loc) {
  return t_forall("a", Kind::type(), t_var("a", loc), loc);
}

bool is_bottom(const Type& t) {
  return t->tag == TyTag::Forall && t->binder_kind == Kind::type() &&
         t->kids[0]->tag == TyTag::Var && t->kids[0]->name == t->name;
}

bool is_unit(const Type& t) { return t->tag == TyTag::Tuple && t->kids.empty(); }

// ---------------------------------------------------------------------------
// Free names

namespace {
void free_names_into(const Type& t, std::set<std::string>& bound,
                     std::set<std::string>& out) {
  auto term_occ = [&](const std::string& n) {
    if (!bound.count(n)) out.insert(n);
  };
  switch (t->tag) {
    case TyTag::Var:
      term_occ(t->name);
      break;
    case TyTag::Singleton:
      term_occ(t->name);
      break;
    case TyTag::Anchored:
      term_occ(t->name);
      free_names_into(t->kids[0], bound, out);
      break;
    case TyTag::NameIntro:
      term_occ(t->name);
      free_names_into(t->kids[0], bound, out);
      break;
    case TyTag::ModeAnd:
      term_occ(t->name);
      free_names_into(t->kids[0], bound, out);
      break;
    case TyTag::App:
      term_occ(t->name);
      for (auto& k : t->kids) free_names_into(k, bound, out);
      break;
    case TyTag::Forall:
    case TyTag::Exists: {
      bool inserted = bound.insert(t->name).second;
      free_names_into(t->kids[0], bound, out);
      if (inserted) bound.erase(t->name);
      break;
    }
    case TyTag::Concrete:
      for (auto& f : t->fields) free_names_into(f.second, bound, out);
      free_names_into(t->adopts, bound, out);
      break;
    default:
      for (auto& k : t->kids) free_names_into(k, bound, out);
      break;
  }
}
}  // namespace

std::set<std::string> free_names(const Type& t) {
  std::set<std::string> bound, out;
  free_names_into(t, bound, out);
  return out;
}

// ---------------------------------------------------------------------------
// Substitution

namespace {

// Extracts the variable name a term-position substitution must carry.
const std::string& replacement_name(const Type& replacement) {
  if (replacement->tag == TyTag::Var) return replacement->name;
  if (replacement->tag == TyTag::Singleton) return replacement->name;
  throw std::logic_error("substitute: term position requires a variable replacement");
}

Type subst_rec(const Type& t, const std::map<std::string, Type>& sub);

Type subst_binder(const Type& t, const std::map<std::string, Type>& sub) {
  // Binder case shared by Forall/Exists.
  std::map<std::string, Type> inner = sub;
  inner.erase(t->name);
  if (inner.empty()) return t;

  // Rename the binder if any replacement captures it.
  std::string binder = t->name;
  Type body = t->kids[0];
  bool needs_rename = false;
  for (auto& [k, v] : inner) {
    (void)k;
    if (free_names(v).count(binder)) {
      needs_rename = true;
      break;
    }
  }
  if (needs_rename) {
    std::string fresh = names::fresh(names::base_hint(binder));
    std::map<std::string, Type> rename{{binder, t_var(fresh, t->loc)}};
    body = subst_rec(body, rename);
    binder = fresh;
  }
  body = subst_rec(body, inner);
  auto n = std::make_shared<TypeNode>(*t);
  n->name = binder;
  n->kids = {body};
  return n;
}

Type subst_rec(const Type& t, const std::map<std::string, Type>& sub) {
  if (sub.empty()) return t;
  auto sub_name = [&](const std::string& n) -> const std::string& {
    auto it = sub.find(n);
    return it == sub.end() ? n : replacement_name(it->second);
  };
  switch (t->tag) {
    case TyTag::Var: {
      auto it = sub.find(t->name);
      return it == sub.end() ? t : it->second;
    }
    case TyTag::Singleton: {
      auto it = sub.find(t->name);
      if (it == sub.end()) return t;
      if (it->second->tag == TyTag::Singleton) return it->second;
      return t_singleton(replacement_name(it->second), t->loc);
    }
    case TyTag::Anchored: {
      auto n = std::make_shared<TypeNode>(*t);
      n->name = sub_name(t->name);
      n->kids = {subst_rec(t->kids[0], sub)};
      return n;
    }
    case TyTag::NameIntro:
    case TyTag::ModeAnd: {
      auto n = std::make_shared<TypeNode>(*t);
      n->name = sub_name(t->name);
      n->kids = {subst_rec(t->kids[0], sub)};
      return n;
    }
    case TyTag::App: {
      // The head is a name; substituting a non-variable for a type head is
      // not meaningful in this first-order kind system.
      auto n = std::make_shared<TypeNode>(*t);
      auto it = sub.find(t->name);
      if (it != sub.end()) {
        if (it->second->tag != TyTag::Var)
          throw std::logic_error("substitute: application head requires a variable");
        n->name = it->second->name;
      }
      for (auto& k : n->kids) k = subst_rec(k, sub);
      return n;
    }
    case TyTag::Forall:
    case TyTag::Exists:
      return subst_binder(t, sub);
    case TyTag::Concrete: {
      auto n = std::make_shared<TypeNode>(*t);
      for (auto& f : n->fields) f.second = subst_rec(f.second, sub);
      n->adopts = subst_rec(t->adopts, sub);
      return n;
    }
    default: {
      if (t->kids.empty()) return t;
      auto n = std::make_shared<TypeNode>(*t);
      for (auto& k : n->kids) k = subst_rec(k, sub);
      return n;
    }
  }
}

}  // namespace

Type substitute(const Type& t, const std::string& name, const Type& replacement) {
  std::map<std::string, Type> sub{{name, replacement}};
  return subst_rec(t, sub);
}

Type substitute_all(const Type& t,
                    const std::vector<std::pair<std::string, Type>>& subst) {
  std::map<std::string, Type> sub(subst.begin(), subst.end());
  return subst_rec(t, sub);
}

// ---------------------------------------------------------------------------
// Alpha-equivalence

namespace {

bool alpha_rec(const Type& a, const Type& b, std::map<std::string, std::string>& l2r,
               std::map<std::string, std::string>& r2l) {
  if (a->tag != b->tag) return false;
  auto names_match = [&](const std::string& x, const std::string& y) {
    auto il = l2r.find(x);
    auto ir = r2l.find(y);
    if (il == l2r.end() && ir == r2l.end()) return x == y;
    if (il == l2r.end() || ir == r2l.end()) return false;
    return il->second == y && ir->second == x;
  };
  switch (a->tag) {
    case TyTag::Var:
    case TyTag::Singleton:
      return names_match(a->name, b->name);
    case TyTag::Anchored:
    case TyTag::NameIntro:
      return names_match(a->name, b->name) && alpha_rec(a->kids[0], b->kids[0], l2r, r2l);
    case TyTag::ModeAnd:
      return a->mode == b->mode && names_match(a->name, b->name) &&
             alpha_rec(a->kids[0], b->kids[0], l2r, r2l);
    case TyTag::App: {
      if (!names_match(a->name, b->name) || a->kids.size() != b->kids.size())
        return false;
      for (size_t i = 0; i < a->kids.size(); i++)
        if (!alpha_rec(a->kids[i], b->kids[i], l2r, r2l)) return false;
      return true;
    }
    case TyTag::Forall:
    case TyTag::Exists: {
      if (a->binder_kind != b->binder_kind) return false;
      auto save_l = l2r.find(a->name) != l2r.end()
                        ? std::optional<std::string>(l2r[a->name])
                        : std::nullopt;
      auto save_r = r2l.find(b->name) != r2l.end()
                        ? std::optional<std::string>(r2l[b->name])
                        : std::nullopt;
      l2r[a->name] = b->name;
      r2l[b->name] = a->name;
      bool ok = alpha_rec(a->kids[0], b->kids[0], l2r, r2l);
      if (save_l) l2r[a->name] = *save_l; else l2r.erase(a->name);
      if (save_r) r2l[b->name] = *save_r; else r2l.erase(b->name);
      return ok;
    }
    case TyTag::Concrete: {
      if (a->name != b->name || a->fields.size() != b->fields.size()) return false;
      // Fields are named; compare order-insensitively.
      std::map<std::string, Type> bf;
      for (auto& f : b->fields) {
        if (!bf.emplace(f.first, f.second).second) return false;
      }
      for (auto& f : a->fields) {
        auto it = bf.find(f.first);
        if (it == bf.end() || !alpha_rec(f.second, it->second, l2r, r2l)) return false;
      }
      return alpha_rec(a->adopts, b->adopts, l2r, r2l);
    }
    default: {
      if (a->kids.size() != b->kids.size()) return false;
      for (size_t i = 0; i < a->kids.size(); i++)
        if (!alpha_rec(a->kids[i], b->kids[i], l2r, r2l)) return false;
      return true;
    }
  }
}

}  // namespace

bool alpha_equal(const Type& a, const Type& b) {
  std::map<std::string, std::string> l2r, r2l;
  return alpha_rec(a, b, l2r, r2l);
}

// ---------------------------------------------------------------------------
// Fresh names

namespace names {
namespace {
std::atomic<uint64_t> g_counter{0};
}

void reset(uint64_t seed) { g_counter = seed; }
uint64_t counter() { return g_counter.load(); }

std::string fresh(const std::string& hint) {
  uint64_t n = g_counter.fetch_add(1);
  std::string base = hint.empty() ? "x" : base_hint(hint);
  return base + "#" + std::to_string(n);
}

bool is_generated(const std::string& name) {
  return name.find('#') != std::string::npos;
}

std::string base_hint(const std::string& name) {
  auto pos = name.find('#');
  return pos == std::string::npos ? name : name.substr(0, pos);
}
}  // namespace names

// ---------------------------------------------------------------------------
// Pattern builders

Pattern p_var(std::string name, Loc loc) {
  auto n = std::make_shared<PatternNode>();
  n->tag = PatTag::Var;
  n->loc = loc;
  n->name = std::move(name);
  return n;
}
Pattern p_tuple(std::vector<Pattern> kids, Loc loc) {
  auto n = std::make_shared<PatternNode>();
  n->tag = PatTag::Tuple;
  n->loc = loc;
  n->kids = std::move(kids);
  return n;
}
Pattern p_ctor(std::string ctor, std::vector<std::pair<std::string, Pattern>> fields,
               Loc loc) {
  auto n = std::make_shared<PatternNode>();
  n->tag = PatTag::Ctor;
  n->loc = loc;
  n->name = std::move(ctor);
  n->fields = std::move(fields);
  return n;
}

namespace {
void pattern_names_into(const Pattern& p, std::set<std::string>& out) {
  switch (p->tag) {
    case PatTag::Var:
      if (p->name != "_") out.insert(p->name);
      break;
    case PatTag::Tuple:
      for (auto& k : p->kids) pattern_names_into(k, out);
      break;
    case PatTag::Ctor:
      for (auto& f : p->fields) pattern_names_into(f.second, out);
      break;
  }
}
}  // namespace

std::set<std::string> pattern_names(const Pattern& p) {
  std::set<std::string> out;
  pattern_names_into(p, out);
  return out;
}

// ---------------------------------------------------------------------------
// Expression builders

namespace {
std::shared_ptr<ExprNode> mke(ExTag tag, Loc loc) {
  auto n = std::make_shared<ExprNode>();
  n->tag = tag;
  n->loc = loc;
  return n;
}
}  // namespace

Expr e_var(std::string name, Loc loc) {
  auto n = mke(ExTag::Var, loc);
  n->name = std::move(name);
  return n;
}
Expr e_int(int64_t v, Loc loc) {
  auto n = mke(ExTag::IntLit, loc);
  n->int_val = v;
  return n;
}
Expr e_bool(bool v, Loc loc) {
  auto n = mke(ExTag::BoolLit, loc);
  n->bool_val = v;
  return n;
}
Expr e_tuple(std::vector<Expr> kids, Loc loc) {
  auto n = mke(ExTag::TupleE, loc);
  n->kids = std::move(kids);
  return n;
}
Expr e_unit(Loc loc) { return e_tuple({}, loc); }
Expr e_construct(std::string ctor, std::vector<std::pair<std::string, Expr>> inits,
                 Type adopts, Loc loc) {
  auto n = mke(ExTag::Construct, loc);
  n->name = std::move(ctor);
  n->field_inits = std::move(inits);
  n->ty0 = std::move(adopts);
  return n;
}
Expr e_let(Pattern p, Expr rhs, Expr body, Loc loc) {
  auto n = mke(ExTag::Let, loc);
  n->pat = std::move(p);
  n->kids = {std::move(rhs), std::move(body)};
  return n;
}
Expr e_fun(std::vector<std::pair<std::string, Kind>> binders, Type arg, Type ret,
           Expr body, Loc loc) {
  auto n = mke(ExTag::Fun, loc);
  n->binders = std::move(binders);
  n->ty0 = std::move(arg);
  n->ty1 = std::move(ret);
  n->kids = {std::move(body)};
  return n;
}
Expr e_lambda(std::vector<std::pair<std::string, Kind>> binders, std::string arg_name,
              Type arg, Type ret, Expr body, Loc loc) {
  auto n = mke(ExTag::Lambda, loc);
  n->binders = std::move(binders);
  n->name = std::move(arg_name);
  n->ty0 = std::move(arg);
  n->ty1 = std::move(ret);
  n->kids = {std::move(body)};
  return n;
}
Expr e_typeapp(Expr f, Type t, Loc loc) {
  auto n = mke(ExTag::TypeApp, loc);
  n->kids = {std::move(f)};
  n->ty0 = std::move(t);
  return n;
}
Expr e_apply(Expr f, Expr a, Loc loc) {
  auto n = mke(ExTag::Apply, loc);
  n->kids = {std::move(f), std::move(a)};
  return n;
}
Expr e_match(Expr scrut, std::vector<std::pair<Pattern, Expr>> arms, Loc loc) {
  auto n = mke(ExTag::MatchE, loc);
  n->kids = {std::move(scrut)};
  n->arms = std::move(arms);
  return n;
}
Expr e_if(Expr c, Expr t, Expr e, Loc loc) {
  auto n = mke(ExTag::IfE, loc);
  n->kids = {std::move(c), std::move(t), std::move(e)};
  return n;
}
Expr e_read(Expr x, std::string field, Loc loc) {
  auto n = mke(ExTag::Read, loc);
  n->kids = {std::move(x)};
  n->field = std::move(field);
  return n;
}
Expr e_write(Expr x, std::string field, Expr v, Loc loc) {
  auto n = mke(ExTag::Write, loc);
  n->kids = {std::move(x), std::move(v)};
  n->field = std::move(field);
  return n;
}
Expr e_writetag(Expr x, std::string ctor, Loc loc) {
  auto n = mke(ExTag::WriteTag, loc);
  n->kids = {std::move(x)};
  n->name = std::move(ctor);
  return n;
}
Expr e_give(Expr x, Expr to, Loc loc) {
  auto n = mke(ExTag::Give, loc);
  n->kids = {std::move(x), std::move(to)};
  return n;
}
Expr e_take(Expr x, Expr from, Loc loc) {
  auto n = mke(ExTag::Take, loc);
  n->kids = {std::move(x), std::move(from)};
  return n;
}
Expr e_taking(Expr path, Expr from, Expr body, Loc loc) {
  auto n = mke(ExTag::Taking, loc);
  n->kids = {std::move(path), std::move(from), std::move(body)};
  return n;
}
Expr e_fail(Loc loc) { return mke(ExTag::FailE, loc); }
Expr e_binop(std::string op, Expr a, Expr b, Loc loc) {
  auto n = mke(ExTag::Binop, loc);
  n->name = std::move(op);
  n->kids = {std::move(a), std::move(b)};
  return n;
}
Expr e_annot(Expr e, Type t, Loc loc) {
  auto n = mke(ExTag::Annot, loc);
  n->kids = {std::move(e)};
  n->ty0 = std::move(t);
  return n;
}

}  // namespace mezzo
