#include "mezzo/desugar.hpp"

#include <cassert>
#include <map>

namespace mezzo {

namespace {

// Kind of a translated type, judged syntactically; `binders` carries the
// kinds of quantifier-bound variables so a bare variable can be resolved.
// Top-level type constructors always have result kind Type.
Kind::Base syntactic_kind(const Type& t, const std::map<std::string, Kind>& binders) {
  switch (t->tag) {
    case TyTag::Anchored:
    case TyTag::Empty:
    case TyTag::Star:
      return Kind::Base::Perm;
    case TyTag::Forall:
    case TyTag::Exists: {
      auto b = binders;
      b[t->name] = t->binder_kind;
      return syntactic_kind(t->kids[0], b);
    }
    case TyTag::ModeAnd:
    case TyTag::Consumes:
      return syntactic_kind(t->kids[0], binders);
    case TyTag::Var: {
      auto it = binders.find(t->name);
      if (it != binders.end()) return it->second.result;
      return Kind::Base::Type;
    }
    default:
      return Kind::Base::Type;
  }
}

// Rewrites `consumes` markers in a translated arrow domain.  The walk covers
// exactly the positions that stay on the left-hand side of the arrow:
// tuple components, concrete fields, both sides of | and *, mode-constraint
// bodies, and the permissions produced for introduced names.  Quantifiers,
// arrows, and applications switch sides, so nothing below them can be
// marked.
Type rewrite_consumes(const Type& t, bool erase,
                      const std::map<std::string, Kind>& binders) {
  switch (t->tag) {
    case TyTag::Consumes: {
      if (erase) return t->kids[0];
      Kind::Base k = syntactic_kind(t->kids[0], binders);
      return k == Kind::Base::Perm ? t_empty(t->loc) : t_unknown(t->loc);
    }
    case TyTag::Tuple: {
      std::vector<Type> kids;
      for (auto& k : t->kids) kids.push_back(rewrite_consumes(k, erase, binders));
      return t_tuple(std::move(kids), t->loc);
    }
    case TyTag::Concrete: {
      std::vector<std::pair<std::string, Type>> fs;
      for (auto& [f, ft] : t->fields) fs.emplace_back(f, rewrite_consumes(ft, erase, binders));
      return t_concrete(t->name, std::move(fs), t->adopts, t->loc);
    }
    case TyTag::Bar:
      return t_bar(rewrite_consumes(t->kids[0], erase, binders),
                   rewrite_consumes(t->kids[1], erase, binders), t->loc);
    case TyTag::Star:
      return t_star(rewrite_consumes(t->kids[0], erase, binders),
                    rewrite_consumes(t->kids[1], erase, binders), t->loc);
    case TyTag::ModeAnd:
      return t_modeand(t->mode, t->name, rewrite_consumes(t->kids[0], erase, binders), t->loc);
    case TyTag::Anchored:
      return t_anchored(t->name, rewrite_consumes(t->kids[0], erase, binders), t->loc);
    default:
      return t;
  }
}

bool all_unknown(const std::vector<Type>& ts) {
  for (auto& t : ts)
    if (t->tag != TyTag::Unknown) return false;
  return !ts.empty();
}

// Equivalence-preserving cleanup applied to the pieces assembled for an
// arrow: trivial anchors vanish, anchors distribute over |, and empty
// conjuncts drop out.
Type simplify(const Type& t) {
  switch (t->tag) {
    case TyTag::Anchored: {
      Type u = simplify(t->kids[0]);
      if (u->tag == TyTag::Bar)
        return simplify(t_star(t_anchored(t->name, u->kids[0], t->loc), u->kids[1], t->loc));
      if (u->tag == TyTag::Singleton && u->name == t->name) return t_empty(t->loc);
      if (u->tag == TyTag::Unknown) return t_empty(t->loc);
      if (u->tag == TyTag::Tuple && all_unknown(u->kids)) return t_empty(t->loc);
      return t_anchored(t->name, u, t->loc);
    }
    case TyTag::Star: {
      Type l = simplify(t->kids[0]);
      Type r = simplify(t->kids[1]);
      if (l->tag == TyTag::Empty) return r;
      if (r->tag == TyTag::Empty) return l;
      return t_star(l, r, t->loc);
    }
    case TyTag::Bar: {
      Type l = simplify(t->kids[0]);
      Type r = simplify(t->kids[1]);
      if (r->tag == TyTag::Empty) return l;
      return t_bar(l, r, t->loc);
    }
    default:
      return t;
  }
}

struct Translator {
  const ProgramEnv& prog;
  std::map<std::string, Kind> binders;

  Type tr(const Type& t) {
    switch (t->tag) {
      case TyTag::Var:
      case TyTag::Singleton:
      case TyTag::Empty:
      case TyTag::Dynamic:
      case TyTag::Unknown:
        return t;
      case TyTag::Arrow:
        return t_arrow(tr(t->kids[0]), tr(t->kids[1]), t->loc);
      case TyTag::EArrow:
        return tr_earrow(t);
      case TyTag::Tuple: {
        std::vector<Type> kids;
        for (auto& k : t->kids) kids.push_back(tr(k));
        return t_tuple(std::move(kids), t->loc);
      }
      case TyTag::Concrete: {
        std::vector<std::pair<std::string, Type>> fs;
        for (auto& [f, ft] : t->fields) fs.emplace_back(f, tr(ft));
        return t_concrete(t->name, std::move(fs), t->adopts ? tr(t->adopts) : nullptr, t->loc);
      }
      case TyTag::App: {
        std::vector<Type> kids;
        for (auto& k : t->kids) kids.push_back(tr_ext(k));
        return t_app(t->name, std::move(kids), t->loc);
      }
      case TyTag::Forall:
      case TyTag::Exists: {
        Translator inner = *this;
        inner.binders[t->name] = t->binder_kind;
        Type body = inner.tr_ext(t->kids[0]);
        return t->tag == TyTag::Forall ? t_forall(t->name, t->binder_kind, body, t->loc)
                                       : t_exists(t->name, t->binder_kind, body, t->loc);
      }
      case TyTag::Bar:
        return t_bar(tr(t->kids[0]), tr(t->kids[1]), t->loc);
      case TyTag::Star:
        return t_star(tr(t->kids[0]), tr(t->kids[1]), t->loc);
      case TyTag::Anchored:
        return t_anchored(t->name, tr_ext(t->kids[0]), t->loc);
      case TyTag::NameIntro:
        return t_bar(t_singleton(t->name, t->loc),
                     t_anchored(t->name, tr(t->kids[0]), t->loc), t->loc);
      case TyTag::Consumes:
        return t_consumes(tr(t->kids[0]), t->loc);
      case TyTag::ModeAnd:
        return t_modeand(t->mode, t->name, tr(t->kids[0]), t->loc);
    }
    assert(false && "unreachable");
    return t;
  }

  Type tr_ext(const Type& t) {
    auto names = collect_bound_names(t);
    Translator inner = *this;
    for (auto& [n, k] : names) inner.binders[n] = k;
    Type body = inner.tr(t);
    for (auto it = names.rbegin(); it != names.rend(); ++it)
      body = t_exists(it->first, it->second, body, t->loc);
    return body;
  }

  Type tr_earrow(const Type& t) {
    const Type& t1 = t->kids[0];
    const Type& t2 = t->kids[1];
    auto gamma1 = collect_bound_names(t1);
    Translator inner = *this;
    for (auto& [n, k] : gamma1) inner.binders[n] = k;

    Type t1p = inner.tr(t1);
    Type t2p = inner.tr_ext(t2);
    Type t1l = rewrite_consumes(t1p, /*erase=*/true, inner.binders);
    Type t1r = rewrite_consumes(t1p, /*erase=*/false, inner.binders);

    // When the domain introduces exactly one name for its whole extent, that
    // name can serve as the argument name and no further one is needed.
    const TypeNode* core = t1.get();
    while (core->tag == TyTag::Consumes || core->tag == TyTag::ModeAnd)
      core = core->kids[0].get();
    bool merged = core->tag == TyTag::NameIntro && gamma1.size() == 1;

    std::string r = merged ? core->name : names::fresh("r");
    Type dom = simplify(t_bar(t_singleton(r, t->loc), t_anchored(r, t1l, t->loc), t->loc));
    Type cod = simplify(t_bar(t2p, t_anchored(r, t1r, t->loc), t->loc));
    Type arrow = t_arrow(dom, cod, t->loc);

    if (!merged) {
      // An argument name used only to restate the domain is dropped again.
      bool r_in_cod = free_names(cod).count(r) > 0;
      if (!r_in_cod && dom->tag == TyTag::Bar && dom->kids[0]->tag == TyTag::Singleton &&
          dom->kids[0]->name == r && dom->kids[1]->tag == TyTag::Anchored &&
          dom->kids[1]->name == r && free_names(dom->kids[1]->kids[0]).count(r) == 0) {
        arrow = t_arrow(dom->kids[1]->kids[0], cod, t->loc);
      } else {
        arrow = t_forall(r, Kind::term(), arrow, t->loc);
      }
    }
    for (auto it = gamma1.rbegin(); it != gamma1.rend(); ++it)
      arrow = t_forall(it->first, it->second, arrow, t->loc);
    return arrow;
  }
};

}  // namespace

Type translate_type(const ProgramEnv& prog, const Type& t) {
  Translator tr{prog, {}};
  return tr.tr(t);
}

Type translate_type_extended(const ProgramEnv& prog, const Type& t) {
  Translator tr{prog, {}};
  return tr.tr_ext(t);
}

Pattern type_to_pattern(const Type& t) {
  switch (t->tag) {
    case TyTag::NameIntro:
      return p_var(t->name, t->loc);
    case TyTag::Consumes:
    case TyTag::ModeAnd:
      return type_to_pattern(t->kids[0]);
    case TyTag::Bar:
      return type_to_pattern(t->kids[0]);
    case TyTag::Tuple: {
      std::vector<Pattern> kids;
      for (auto& k : t->kids) kids.push_back(type_to_pattern(k));
      return p_tuple(std::move(kids), t->loc);
    }
    case TyTag::Concrete: {
      std::vector<std::pair<std::string, Pattern>> fs;
      for (auto& [f, ft] : t->fields) fs.emplace_back(f, type_to_pattern(ft));
      return p_ctor(t->name, std::move(fs), t->loc);
    }
    default:
      return p_var("_", t->loc);
  }
}

namespace {

// True when a pattern binds nothing, so a let of it is pure sequencing.
bool trivial_pattern(const Pattern& p) {
  return p->tag == PatTag::Var && p->name == "_";
}

Expr tr_expr(const ProgramEnv& prog, const Expr& e);

Expr tr_fun(const ProgramEnv& prog, const Expr& e) {
  // The whole arrow first, so the domain's names become explicit binders.
  Type arrow = translate_type(prog, t_earrow(e->ty0, e->ty1, e->loc));
  std::vector<std::pair<std::string, Kind>> extra;
  // Mode constraints between the quantifiers and the arrow move onto the
  // domain, where the function rule assumes them and call sites prove them.
  std::vector<const TypeNode*> constraints;
  for (;;) {
    if (arrow->tag == TyTag::Forall) {
      extra.emplace_back(arrow->name, arrow->binder_kind);
      arrow = arrow->kids[0];
    } else if (arrow->tag == TyTag::ModeAnd) {
      constraints.push_back(arrow.get());
      arrow = arrow->kids[0];
    } else {
      break;
    }
  }
  assert(arrow->tag == TyTag::Arrow);
  Type dom = arrow->kids[0];
  for (auto it = constraints.rbegin(); it != constraints.rend(); ++it)
    dom = t_modeand((*it)->mode, (*it)->name, dom, (*it)->loc);

  Pattern p = type_to_pattern(e->ty0);
  std::string arg =
      names::fresh(p->tag == PatTag::Var && !trivial_pattern(p) ? p->name : "arg");

  std::vector<std::pair<std::string, Kind>> binders = e->binders;
  for (auto& b : extra) binders.push_back(b);

  Expr body = tr_expr(prog, e->kids[0]);
  if (!trivial_pattern(p)) body = e_let(p, e_var(arg, e->loc), body, e->loc);
  return e_lambda(std::move(binders), arg, dom, arrow->kids[1], body, e->loc);
}

Expr tr_expr(const ProgramEnv& prog, const Expr& e) {
  switch (e->tag) {
    case ExTag::Var:
    case ExTag::IntLit:
    case ExTag::BoolLit:
    case ExTag::FailE:
      return e;
    case ExTag::TupleE: {
      std::vector<Expr> kids;
      for (auto& k : e->kids) kids.push_back(tr_expr(prog, k));
      return e_tuple(std::move(kids), e->loc);
    }
    case ExTag::Construct: {
      std::vector<std::pair<std::string, Expr>> inits;
      for (auto& [f, fe] : e->field_inits) inits.emplace_back(f, tr_expr(prog, fe));
      Type adopts = e->ty0 ? translate_type(prog, e->ty0) : nullptr;
      return e_construct(e->name, std::move(inits), adopts, e->loc);
    }
    case ExTag::Let:
      return e_let(e->pat, tr_expr(prog, e->kids[0]), tr_expr(prog, e->kids[1]), e->loc);
    case ExTag::Fun:
      return tr_fun(prog, e);
    case ExTag::Lambda: {
      // Already internal; only the body may still contain surface forms.
      return e_lambda(e->binders, e->name, e->ty0, e->ty1, tr_expr(prog, e->kids[0]), e->loc);
    }
    case ExTag::TypeApp:
      return e_typeapp(tr_expr(prog, e->kids[0]), translate_type_extended(prog, e->ty0), e->loc);
    case ExTag::Apply:
      return e_apply(tr_expr(prog, e->kids[0]), tr_expr(prog, e->kids[1]), e->loc);
    case ExTag::MatchE: {
      std::vector<std::pair<Pattern, Expr>> arms;
      for (auto& [p, a] : e->arms) arms.emplace_back(p, tr_expr(prog, a));
      return e_match(tr_expr(prog, e->kids[0]), std::move(arms), e->loc);
    }
    case ExTag::IfE:
      return e_if(tr_expr(prog, e->kids[0]), tr_expr(prog, e->kids[1]),
                  tr_expr(prog, e->kids[2]), e->loc);
    case ExTag::Read:
      return e_read(tr_expr(prog, e->kids[0]), e->field, e->loc);
    case ExTag::Write:
      return e_write(tr_expr(prog, e->kids[0]), e->field, tr_expr(prog, e->kids[1]), e->loc);
    case ExTag::WriteTag:
      return e_writetag(tr_expr(prog, e->kids[0]), e->name, e->loc);
    case ExTag::Give:
      return e_give(tr_expr(prog, e->kids[0]), tr_expr(prog, e->kids[1]), e->loc);
    case ExTag::Take:
      return e_take(tr_expr(prog, e->kids[0]), tr_expr(prog, e->kids[1]), e->loc);
    case ExTag::Taking: {
      // taking p from o begin e end unfolds to take, run, give back.
      Loc loc = e->loc;
      std::string p = names::fresh("taken");
      std::string o = names::fresh("owner");
      std::string res = names::fresh("res");
      Expr body = tr_expr(prog, e->kids[2]);
      Expr give_back = e_give(e_var(p, loc), e_var(o, loc), loc);
      Expr tail = e_let(p_var(res, loc), body,
                        e_let(p_var("_", loc), give_back, e_var(res, loc), loc), loc);
      Expr take = e_take(e_var(p, loc), e_var(o, loc), loc);
      Expr inner = e_let(p_var("_", loc), take, tail, loc);
      return e_let(p_var(p, loc), tr_expr(prog, e->kids[0]),
                   e_let(p_var(o, loc), tr_expr(prog, e->kids[1]), inner, loc), loc);
    }
    case ExTag::Binop:
      return e_binop(e->name, tr_expr(prog, e->kids[0]), tr_expr(prog, e->kids[1]), e->loc);
    case ExTag::Annot:
      return e_annot(tr_expr(prog, e->kids[0]), translate_type_extended(prog, e->ty0), e->loc);
  }
  assert(false && "unreachable");
  return e;
}

}  // namespace

Expr translate_expr(const ProgramEnv& prog, const Expr& e) { return tr_expr(prog, e); }

Program desugar_program(const ProgramEnv& prog, const Program& p) {
  Program out;
  out.filename = p.filename;
  for (const auto& item : p.items) {
    Item it = item;
    switch (item.tag) {
      case ItemTag::Data: {
        Translator tr{prog, {}};
        for (auto& [n, k] : item.data.params) tr.binders[n] = Kind{k, {}};
        for (auto& br : it.data.branches)
          for (auto& [f, ft] : br.fields) ft = tr.tr(ft);
        if (it.data.adopts) it.data.adopts = tr.tr(it.data.adopts);
        break;
      }
      case ItemTag::Abstract:
      case ItemTag::Fact:
        break;
      case ItemTag::Val: {
        if (it.val.signature) it.val.signature = translate_type_extended(prog, it.val.signature);
        it.val.body = translate_expr(prog, it.val.body);
        break;
      }
    }
    out.items.push_back(std::move(it));
  }
  return out;
}

bool has_surface_nodes(const Type& t) {
  switch (t->tag) {
    case TyTag::EArrow:
    case TyTag::Consumes:
    case TyTag::NameIntro:
      return true;
    default:
      break;
  }
  for (auto& k : t->kids)
    if (has_surface_nodes(k)) return true;
  for (auto& [f, ft] : t->fields)
    if (has_surface_nodes(ft)) return true;
  if (t->adopts && has_surface_nodes(t->adopts)) return true;
  return false;
}

bool has_surface_nodes(const Expr& e) {
  if (e->tag == ExTag::Fun || e->tag == ExTag::Taking) return true;
  for (auto& k : e->kids)
    if (has_surface_nodes(k)) return true;
  for (auto& [f, fe] : e->field_inits)
    if (has_surface_nodes(fe)) return true;
  for (auto& [p, a] : e->arms)
    if (has_surface_nodes(a)) return true;
  if (e->ty0 && has_surface_nodes(e->ty0)) return true;
  if (e->ty1 && has_surface_nodes(e->ty1)) return true;
  return false;
}

}  // namespace mezzo
