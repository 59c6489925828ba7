// Core syntax: kinds, type expressions, expressions, patterns, programs.
//
// Types and expressions are immutable trees behind shared_ptr; all passes
// share subtrees freely.  Binders are plain names; capture-avoiding
// substitution and alpha-equivalence live here.  Fresh names come from a
// single monotone counter so every pipeline run is deterministic.

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace mezzo {

struct Loc {
  int line = 0;
  int col = 0;
  bool valid() const { return line > 0; }
};

// ---------------------------------------------------------------------------
// Modes

enum class Mode : uint8_t { Bottom = 0, Duplicable = 1, Exclusive = 2, Affine = 3 };

const char* mode_name(Mode m);

// Lattice: Bottom < {Duplicable, Exclusive} < Affine.
Mode mode_join(Mode a, Mode b);
Mode mode_meet(Mode a, Mode b);
bool mode_leq(Mode a, Mode b);

// ---------------------------------------------------------------------------
// Kinds

struct Kind {
  enum class Base : uint8_t { Type, Term, Perm };

  Base result = Base::Type;
  std::vector<Base> params;  // empty for base kinds

  bool is_base() const { return params.empty(); }
  size_t arity() const { return params.size(); }

  static Kind type() { return {Base::Type, {}}; }
  static Kind term() { return {Base::Term, {}}; }
  static Kind perm() { return {Base::Perm, {}}; }
  static Kind arrow(std::vector<Base> params, Base result) {
    return {result, std::move(params)};
  }

  bool operator==(const Kind& o) const {
    return result == o.result && params == o.params;
  }
  bool operator!=(const Kind& o) const { return !(*this == o); }
};

const char* kind_base_name(Kind::Base b);
std::string kind_to_string(const Kind& k);

// ---------------------------------------------------------------------------
// Type expressions

enum class TyTag : uint8_t {
  Var,        // name
  Arrow,      // kids[0] -> kids[1]      (internal arrow)
  EArrow,     // kids[0] -> kids[1]      (surface arrow, pre-desugar only)
  Tuple,      // kids...                 (unit = empty tuple)
  Concrete,   // name{fields} adopts     (structural type, ctor = name)
  App,        // name kids...            (named n-ary type application)
  Forall,     // [name : binder_kind] kids[0]
  Exists,     // {name : binder_kind} kids[0]
  Singleton,  // =name
  Bar,        // (kids[0] | kids[1])
  Anchored,   // name @ kids[0]
  Empty,      // empty permission
  Star,       // kids[0] * kids[1]
  Dynamic,    // dynamic
  Unknown,    // unknown
  Consumes,   // consumes kids[0]        (surface only)
  NameIntro,  // name : kids[0]          (surface only)
  ModeAnd,    // mode name | kids[0]
};

struct TypeNode;
using Type = std::shared_ptr<const TypeNode>;

struct TypeNode {
  TyTag tag;
  Loc loc;
  std::string name;  // Var / Concrete ctor / App head / binder / term var / ModeAnd subject
  Kind binder_kind;  // Forall / Exists
  Mode mode = Mode::Affine;  // ModeAnd
  std::vector<Type> kids;
  std::vector<std::pair<std::string, Type>> fields;  // Concrete
  Type adopts;                                       // Concrete (never null there)
};

Type t_var(std::string name, Loc loc = {});
Type t_arrow(Type dom, Type cod, Loc loc = {});
Type t_earrow(Type dom, Type cod, Loc loc = {});
Type t_tuple(std::vector<Type> comps, Loc loc = {});
Type t_unit(Loc loc = {});
Type t_concrete(std::string ctor, std::vector<std::pair<std::string, Type>> fields,
                Type adopts = nullptr, Loc loc = {});
Type t_app(std::string head, std::vector<Type> args, Loc loc = {});
Type t_forall(std::string binder, Kind k, Type body, Loc loc = {});
Type t_exists(std::string binder, Kind k, Type body, Loc loc = {});
Type t_singleton(std::string term_var, Loc loc = {});
Type t_bar(Type ty, Type perm, Loc loc = {});
Type t_anchored(std::string term_var, Type ty, Loc loc = {});
Type t_empty(Loc loc = {});
Type t_star(Type p, Type q, Loc loc = {});
Type t_dynamic(Loc loc = {});
Type t_unknown(Loc loc = {});
Type t_consumes(Type inner, Loc loc = {});
Type t_nameintro(std::string term_var, Type inner, Loc loc = {});
Type t_modeand(Mode m, std::string subject, Type body, Loc loc = {});

// The bottom type, spelled [a] a.
Type t_bottom(Loc loc = {});
bool is_bottom(const Type& t);
bool is_unit(const Type& t);

// Free names of any kind (type, term, perm variables).
std::set<std::string> free_names(const Type& t);

// Capture-avoiding substitution of `replacement` for free occurrences of
// `name`.  Occurrences in term positions (singletons, anchors, intros,
// ModeAnd subjects) require `replacement` to be a variable or singleton;
// anything else there is a caller bug and asserts.
Type substitute(const Type& t, const std::string& name, const Type& replacement);

// Simultaneous substitution; avoids n passes and n renames.
Type substitute_all(const Type& t, const std::vector<std::pair<std::string, Type>>& subst);

// Alpha-equivalence.  Concrete fields compare by name, order-insensitively.
bool alpha_equal(const Type& a, const Type& b);

// ---------------------------------------------------------------------------
// Fresh names
//
// One global monotone counter.  Generated names use '#', which the lexer
// rejects in identifiers, so they can never collide with user names.

namespace names {
void reset(uint64_t seed = 0);
uint64_t counter();
std::string fresh(const std::string& hint);
bool is_generated(const std::string& name);
// Strips a trailing "#N" if present.
std::string base_hint(const std::string& name);
}  // namespace names

// ---------------------------------------------------------------------------
// Patterns

enum class PatTag : uint8_t { Var, Tuple, Ctor };

struct PatternNode;
using Pattern = std::shared_ptr<const PatternNode>;

struct PatternNode {
  PatTag tag;
  Loc loc;
  std::string name;  // Var name / Ctor name
  std::vector<Pattern> kids;
  std::vector<std::pair<std::string, Pattern>> fields;  // Ctor
};

Pattern p_var(std::string name, Loc loc = {});
Pattern p_tuple(std::vector<Pattern> kids, Loc loc = {});
Pattern p_ctor(std::string ctor, std::vector<std::pair<std::string, Pattern>> fields,
               Loc loc = {});

std::set<std::string> pattern_names(const Pattern& p);

// ---------------------------------------------------------------------------
// Expressions

enum class ExTag : uint8_t {
  Var,        // name
  IntLit,     // int_val
  BoolLit,    // bool_val
  TupleE,     // kids...                  (unit = empty)
  Construct,  // name{field_inits} [adopts ty0]
  Let,        // let pattern = kids[0] in kids[1]
  Fun,        // fun [binders] (ty0) : ty1 = kids[0]     (surface)
  Lambda,     // internal function: binders, arg `name`, ty0 -> ty1, kids[0]
  TypeApp,    // kids[0] [ty0]
  Apply,      // kids[0] kids[1]
  MatchE,     // match kids[0] with arms end
  IfE,        // if kids[0] then kids[1] else kids[2]
  Read,       // kids[0].field
  Write,      // kids[0].field <- kids[1]
  WriteTag,   // tag of kids[0] <- name
  Give,       // give kids[0] to kids[1]
  Take,       // take kids[0] from kids[1]
  Taking,     // taking kids[0] from kids[1] begin kids[2] end
  FailE,      // fail
  Binop,      // kids[0] `name` kids[1]   (name in {+,-,*,==,<})
  Annot,      // (kids[0] : ty0)
};

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  ExTag tag;
  Loc loc;
  std::string name;   // Var / Construct ctor / WriteTag ctor / Binop op / Lambda arg
  std::string field;  // Read / Write
  int64_t int_val = 0;
  bool bool_val = false;
  std::vector<Expr> kids;
  std::vector<std::pair<std::string, Expr>> field_inits;      // Construct
  std::vector<std::pair<Pattern, Expr>> arms;                 // MatchE
  std::vector<std::pair<std::string, Kind>> binders;          // Fun / Lambda
  Type ty0, ty1;  // argument/result types, annotation, type application, construct adopts
  Pattern pat;    // Let
};

Expr e_var(std::string name, Loc loc = {});
Expr e_int(int64_t v, Loc loc = {});
Expr e_bool(bool v, Loc loc = {});
Expr e_tuple(std::vector<Expr> kids, Loc loc = {});
Expr e_unit(Loc loc = {});
Expr e_construct(std::string ctor, std::vector<std::pair<std::string, Expr>> inits,
                 Type adopts = nullptr, Loc loc = {});
Expr e_let(Pattern p, Expr rhs, Expr body, Loc loc = {});
Expr e_fun(std::vector<std::pair<std::string, Kind>> binders, Type arg, Type ret,
           Expr body, Loc loc = {});
Expr e_lambda(std::vector<std::pair<std::string, Kind>> binders, std::string arg_name,
              Type arg, Type ret, Expr body, Loc loc = {});
Expr e_typeapp(Expr f, Type t, Loc loc = {});
Expr e_apply(Expr f, Expr a, Loc loc = {});
Expr e_match(Expr scrut, std::vector<std::pair<Pattern, Expr>> arms, Loc loc = {});
Expr e_if(Expr c, Expr t, Expr e, Loc loc = {});
Expr e_read(Expr x, std::string field, Loc loc = {});
Expr e_write(Expr x, std::string field, Expr v, Loc loc = {});
Expr e_writetag(Expr x, std::string ctor, Loc loc = {});
Expr e_give(Expr x, Expr to, Loc loc = {});
Expr e_take(Expr x, Expr from, Loc loc = {});
Expr e_taking(Expr path, Expr from, Expr body, Loc loc = {});
Expr e_fail(Loc loc = {});
Expr e_binop(std::string op, Expr a, Expr b, Loc loc = {});
Expr e_annot(Expr e, Type t, Loc loc = {});

// ---------------------------------------------------------------------------
// Programs

struct DataBranch {
  std::string ctor;
  std::vector<std::pair<std::string, Type>> fields;
  Loc loc;
};

struct DataDef {
  std::string name;
  bool is_mutable = false;
  std::vector<std::pair<std::string, Kind::Base>> params;
  std::vector<DataBranch> branches;
  Type adopts;  // definition-level clause; bottom when absent
  Loc loc;

  Kind kind() const {
    std::vector<Kind::Base> ps;
    for (auto& p : params) ps.push_back(p.second);
    return ps.empty() ? Kind::type() : Kind::arrow(ps, Kind::Base::Type);
  }
  const DataBranch* branch(const std::string& ctor) const {
    for (auto& b : branches)
      if (b.ctor == ctor) return &b;
    return nullptr;
  }
};

struct AbstractDef {
  std::string name;
  std::vector<std::pair<std::string, Kind::Base>> params;
  Loc loc;

  Kind kind() const {
    std::vector<Kind::Base> ps;
    for (auto& p : params) ps.push_back(p.second);
    return ps.empty() ? Kind::type() : Kind::arrow(ps, Kind::Base::Type);
  }
};

// `fact [clause and ...] => mode (name args)`; hypothesis clauses are
// (mode, param-name) pairs.
struct FactDecl {
  std::vector<std::pair<Mode, std::string>> hypothesis;
  Mode conclusion = Mode::Affine;
  std::string type_name;
  std::vector<std::string> params;  // as written at the declaration site
  Loc loc;
};

struct ValDef {
  std::string name;
  bool is_rec = false;
  // Function form: val name [binders] (dom) : cod = body.  Plain form keeps
  // `signature` null and `body` arbitrary.
  Type signature;  // surface type of the whole val, null if none
  Expr body;
  Loc loc;
};

enum class ItemTag : uint8_t { Data, Abstract, Fact, Val };

struct Item {
  ItemTag tag;
  DataDef data;
  AbstractDef abstract;
  FactDecl fact;
  ValDef val;
};

struct Program {
  std::string filename;
  std::vector<Item> items;
};

}  // namespace mezzo
