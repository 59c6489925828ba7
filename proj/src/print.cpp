#include "mezzo/print.hpp"

#include <sstream>

namespace mezzo {

namespace {

// Precedence levels, loosest to tightest.  A construct is parenthesized when
// its own level is below the level its context requires.
constexpr int kQuant = 0;
constexpr int kArrow = 1;
constexpr int kComp = 2;   // NameIntro / Consumes, i.e. tuple components
constexpr int kStar = 3;
constexpr int kApp = 4;
constexpr int kAtom = 5;

void print_type(std::ostringstream& os, const Type& t, int ctx);

void print_fields(std::ostringstream& os, const TypeNode& n) {
  os << n.name;
  if (!n.fields.empty()) {
    os << " {";
    bool first = true;
    for (auto& [f, ft] : n.fields) {
      if (!first) os << "; ";
      first = false;
      if (ft->tag == TyTag::Singleton) {
        os << f << " == " << ft->name;
      } else {
        os << f << ": ";
        print_type(os, ft, kComp);
      }
    }
    os << '}';
  }
  if (n.adopts && !is_bottom(n.adopts)) {
    os << " adopts ";
    print_type(os, n.adopts, kApp);
  }
}

void print_binders(std::ostringstream& os, const Type& t, Type& body) {
  // Collapses a run of same-flavor quantifiers into one bracket group.
  bool exists = t->tag == TyTag::Exists;
  os << (exists ? '{' : '[');
  const TypeNode* cur = t.get();
  bool first = true;
  while (true) {
    if (!first) os << ", ";
    first = false;
    os << cur->name;
    if (cur->binder_kind != Kind::type())
      os << " : " << kind_to_string(cur->binder_kind);
    const TypeNode* next = cur->kids[0].get();
    if ((exists && next->tag == TyTag::Exists) ||
        (!exists && next->tag == TyTag::Forall)) {
      cur = next;
    } else {
      break;
    }
  }
  os << (exists ? '}' : ']') << ' ';
  body = cur->kids[0];
}

void print_type(std::ostringstream& os, const Type& t, int ctx) {
  switch (t->tag) {
    case TyTag::Var:
      os << t->name;
      break;
    case TyTag::Singleton:
      os << '=' << t->name;
      break;
    case TyTag::Dynamic:
      os << "dynamic";
      break;
    case TyTag::Unknown:
      os << "unknown";
      break;
    case TyTag::Empty:
      os << "empty";
      break;
    case TyTag::Tuple: {
      os << '(';
      bool first = true;
      for (auto& k : t->kids) {
        if (!first) os << ", ";
        first = false;
        print_type(os, k, kComp);
      }
      os << ')';
      break;
    }
    case TyTag::Concrete:
      print_fields(os, *t);
      break;
    case TyTag::App: {
      if (t->kids.empty()) {
        os << t->name;
        break;
      }
      bool need = ctx > kApp;
      if (need) os << '(';
      os << t->name;
      for (auto& a : t->kids) {
        os << ' ';
        // The grammar does not accept a bare singleton as an application
        // argument, so those are always wrapped.
        if (a->tag == TyTag::Singleton) {
          os << "(=" << a->name << ')';
        } else {
          print_type(os, a, kAtom);
        }
      }
      if (need) os << ')';
      break;
    }
    case TyTag::Arrow:
    case TyTag::EArrow: {
      bool need = ctx > kArrow;
      if (need) os << '(';
      print_type(os, t->kids[0], kComp);
      os << " -> ";
      print_type(os, t->kids[1], kArrow);
      if (need) os << ')';
      break;
    }
    case TyTag::Forall:
    case TyTag::Exists: {
      if (is_bottom(t)) {
        // Prints as its expansion; callers usually elide bottom adopts.
        bool need = ctx > kQuant;
        if (need) os << '(';
        os << "[" << t->name << "] " << t->name;
        if (need) os << ')';
        break;
      }
      bool need = ctx > kQuant;
      if (need) os << '(';
      Type body;
      print_binders(os, t, body);
      print_type(os, body, kQuant);
      if (need) os << ')';
      break;
    }
    case TyTag::Bar:
      // Always self-delimiting for readability; `(| P)` abbreviates unit.
      os << '(';
      if (!is_unit(t->kids[0])) {
        print_type(os, t->kids[0], kStar);
        os << ' ';
      }
      os << "| ";
      print_type(os, t->kids[1], kStar);
      os << ')';
      break;
    case TyTag::ModeAnd:
      os << '(' << mode_name(t->mode) << ' ' << t->name << " | ";
      print_type(os, t->kids[0], kStar);
      os << ')';
      break;
    case TyTag::Star: {
      bool need = ctx > kStar;
      if (need) os << '(';
      print_type(os, t->kids[0], kStar);
      os << " * ";
      print_type(os, t->kids[1], kStar + 1);
      if (need) os << ')';
      break;
    }
    case TyTag::Anchored: {
      bool need = ctx > kStar;
      if (need) os << '(';
      os << t->name << " @ ";
      print_type(os, t->kids[0], kApp);
      if (need) os << ')';
      break;
    }
    case TyTag::Consumes: {
      bool need = ctx > kComp;
      if (need) os << '(';
      os << "consumes ";
      print_type(os, t->kids[0], kComp);
      if (need) os << ')';
      break;
    }
    case TyTag::NameIntro: {
      bool need = ctx > kComp;
      if (need) os << '(';
      os << t->name << ": ";
      print_type(os, t->kids[0], kStar);
      if (need) os << ')';
      break;
    }
  }
}

void print_pattern(std::ostringstream& os, const Pattern& p) {
  switch (p->tag) {
    case PatTag::Var:
      os << p->name;
      break;
    case PatTag::Tuple: {
      os << '(';
      bool first = true;
      for (auto& k : p->kids) {
        if (!first) os << ", ";
        first = false;
        print_pattern(os, k);
      }
      os << ')';
      break;
    }
    case PatTag::Ctor: {
      os << p->name;
      if (!p->fields.empty()) {
        os << " {";
        bool first = true;
        for (auto& [f, fp] : p->fields) {
          if (!first) os << "; ";
          first = false;
          os << f << " = ";
          print_pattern(os, fp);
        }
        os << '}';
      }
      break;
    }
  }
}

void print_expr(std::ostringstream& os, const Expr& e, int depth) {
  if (depth > 64) {
    os << "...";
    return;
  }
  switch (e->tag) {
    case ExTag::Var:
      os << e->name;
      break;
    case ExTag::IntLit:
      os << e->int_val;
      break;
    case ExTag::BoolLit:
      os << (e->bool_val ? "true" : "false");
      break;
    case ExTag::TupleE: {
      os << '(';
      bool first = true;
      for (auto& k : e->kids) {
        if (!first) os << ", ";
        first = false;
        print_expr(os, k, depth + 1);
      }
      os << ')';
      break;
    }
    case ExTag::Construct: {
      os << e->name;
      if (!e->field_inits.empty()) {
        os << " {";
        bool first = true;
        for (auto& [f, v] : e->field_inits) {
          if (!first) os << "; ";
          first = false;
          os << f << " = ";
          print_expr(os, v, depth + 1);
        }
        os << '}';
      }
      break;
    }
    case ExTag::Let:
      os << "let ";
      print_pattern(os, e->pat);
      os << " = ";
      print_expr(os, e->kids[0], depth + 1);
      os << " in ";
      print_expr(os, e->kids[1], depth + 1);
      break;
    case ExTag::Fun:
    case ExTag::Lambda:
      os << "fun (...) : " << (e->ty1 ? pretty(e->ty1) : "?") << " = ";
      print_expr(os, e->kids[0], depth + 1);
      break;
    case ExTag::TypeApp:
      print_expr(os, e->kids[0], depth + 1);
      os << " [" << pretty(e->ty0) << ']';
      break;
    case ExTag::Apply:
      print_expr(os, e->kids[0], depth + 1);
      os << ' ';
      print_expr(os, e->kids[1], depth + 1);
      break;
    case ExTag::MatchE:
      os << "match ";
      print_expr(os, e->kids[0], depth + 1);
      os << " with ...";
      break;
    case ExTag::IfE:
      os << "if ";
      print_expr(os, e->kids[0], depth + 1);
      os << " then ... else ...";
      break;
    case ExTag::Read:
      print_expr(os, e->kids[0], depth + 1);
      os << '.' << e->field;
      break;
    case ExTag::Write:
      print_expr(os, e->kids[0], depth + 1);
      os << '.' << e->field << " <- ";
      print_expr(os, e->kids[1], depth + 1);
      break;
    case ExTag::WriteTag:
      os << "tag of ";
      print_expr(os, e->kids[0], depth + 1);
      os << " <- " << e->name;
      break;
    case ExTag::Give:
      os << "give ";
      print_expr(os, e->kids[0], depth + 1);
      os << " to ";
      print_expr(os, e->kids[1], depth + 1);
      break;
    case ExTag::Take:
      os << "take ";
      print_expr(os, e->kids[0], depth + 1);
      os << " from ";
      print_expr(os, e->kids[1], depth + 1);
      break;
    case ExTag::Taking:
      os << "taking ... from ... begin ... end";
      break;
    case ExTag::FailE:
      os << "fail";
      break;
    case ExTag::Binop:
      print_expr(os, e->kids[0], depth + 1);
      os << ' ' << e->name << ' ';
      print_expr(os, e->kids[1], depth + 1);
      break;
    case ExTag::Annot:
      os << '(';
      print_expr(os, e->kids[0], depth + 1);
      os << " : " << pretty(e->ty0) << ')';
      break;
  }
}

}  // namespace

std::string pretty(const Type& t) {
  std::ostringstream os;
  print_type(os, t, kQuant);
  return os.str();
}

std::string pretty(const Pattern& p) {
  std::ostringstream os;
  print_pattern(os, p);
  return os.str();
}

std::string pretty(const Expr& e) {
  std::ostringstream os;
  print_expr(os, e, 0);
  return os.str();
}

std::string pretty_atom(const std::string& var, const Type& t) {
  std::ostringstream os;
  os << var << " @ ";
  print_type(os, t, kApp);
  return os.str();
}

}  // namespace mezzo
