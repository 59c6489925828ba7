#include "mezzo/parser.hpp"

#include <cctype>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

namespace mezzo {

namespace {

// ---------------------------------------------------------------------------
// Lexer

enum class Tok : uint8_t {
  Ident,   // lowercase-led identifier
  UIdent,  // uppercase-led identifier (data constructors)
  Int,
  Keyword,
  LParen, RParen, LBracket, RBracket, LBrace, RBrace,
  Comma, Semi, Pipe, Colon, Dot, Star, Plus, Minus, Less, At,
  Arrow,      // ->
  LArrow,     // <-
  Eq,         // =
  EqEq,       // ==
  FatArrow,   // =>
  Eof,
};

struct Token {
  Tok kind;
  std::string text;
  int64_t int_val = 0;
  Loc loc;
};

const std::set<std::string> kKeywords = {
    "data", "mutable", "abstract", "fact", "val", "rec", "fun", "let", "in",
    "match", "with", "end", "begin", "if", "then", "else", "give", "to",
    "take", "from", "taking", "adopts", "consumes", "tag", "of", "fail",
    "dynamic", "unknown", "empty", "duplicable", "exclusive", "and",
    "true", "false", "type", "term", "perm"};

struct Lexer {
  const std::string& src;
  size_t pos = 0;
  int line = 1, col = 1;

  explicit Lexer(const std::string& s) : src(s) {}

  Loc here() const { return {line, col}; }

  char peek(size_t off = 0) const {
    return pos + off < src.size() ? src[pos + off] : '\0';
  }

  void advance() {
    if (pos < src.size()) {
      if (src[pos] == '\n') {
        line++;
        col = 1;
      } else {
        col++;
      }
      pos++;
    }
  }

  void skip_trivia() {
    while (pos < src.size()) {
      char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else if (c == '-' && peek(1) == '-') {
        while (pos < src.size() && peek() != '\n') advance();
      } else {
        break;
      }
    }
  }

  static bool ident_start(char c) { return std::isalpha((unsigned char)c) || c == '_'; }
  static bool ident_cont(char c) {
    return std::isalnum((unsigned char)c) || c == '_' || c == '\'';
  }

  Token next() {
    skip_trivia();
    Loc loc = here();
    if (pos >= src.size()) return {Tok::Eof, "", 0, loc};
    char c = peek();

    if (ident_start(c)) {
      std::string s;
      while (ident_cont(peek())) {
        s += peek();
        advance();
      }
      if (kKeywords.count(s)) return {Tok::Keyword, s, 0, loc};
      if (std::isupper((unsigned char)c)) return {Tok::UIdent, s, 0, loc};
      return {Tok::Ident, s, 0, loc};
    }
    if (std::isdigit((unsigned char)c)) {
      int64_t v = 0;
      std::string s;
      while (std::isdigit((unsigned char)peek())) {
        s += peek();
        v = v * 10 + (peek() - '0');
        advance();
      }
      return {Tok::Int, s, v, loc};
    }

    auto two = [&](char a, char b) { return c == a && peek(1) == b; };
    if (two('-', '>')) { advance(); advance(); return {Tok::Arrow, "->", 0, loc}; }
    if (two('<', '-')) { advance(); advance(); return {Tok::LArrow, "<-", 0, loc}; }
    if (two('=', '=')) { advance(); advance(); return {Tok::EqEq, "==", 0, loc}; }
    if (two('=', '>')) { advance(); advance(); return {Tok::FatArrow, "=>", 0, loc}; }

    advance();
    switch (c) {
      case '(': return {Tok::LParen, "(", 0, loc};
      case ')': return {Tok::RParen, ")", 0, loc};
      case '[': return {Tok::LBracket, "[", 0, loc};
      case ']': return {Tok::RBracket, "]", 0, loc};
      case '{': return {Tok::LBrace, "{", 0, loc};
      case '}': return {Tok::RBrace, "}", 0, loc};
      case ',': return {Tok::Comma, ",", 0, loc};
      case ';': return {Tok::Semi, ";", 0, loc};
      case '|': return {Tok::Pipe, "|", 0, loc};
      case ':': return {Tok::Colon, ":", 0, loc};
      case '.': return {Tok::Dot, ".", 0, loc};
      case '*': return {Tok::Star, "*", 0, loc};
      case '+': return {Tok::Plus, "+", 0, loc};
      case '-': return {Tok::Minus, "-", 0, loc};
      case '<': return {Tok::Less, "<", 0, loc};
      case '@': return {Tok::At, "@", 0, loc};
      case '=': return {Tok::Eq, "=", 0, loc};
      default:
        throw ParseError(loc, std::string("unexpected character '") + c + "'");
    }
  }
};

// ---------------------------------------------------------------------------
// Parser

struct Parser {
  std::vector<Token> toks;
  size_t idx = 0;
  int depth = 0;

  explicit Parser(const std::string& src) {
    Lexer lex(src);
    while (true) {
      Token t = lex.next();
      toks.push_back(t);
      if (t.kind == Tok::Eof) break;
    }
  }

  struct DepthGuard {
    Parser& p;
    explicit DepthGuard(Parser& p_) : p(p_) {
      if (++p.depth > 400) throw ParseError(p.peek().loc, "input nests too deeply");
    }
    ~DepthGuard() { p.depth--; }
  };

  const Token& peek(size_t off = 0) const {
    size_t i = idx + off;
    return i < toks.size() ? toks[i] : toks.back();
  }
  const Token& advance() { return toks[idx < toks.size() - 1 ? idx++ : idx]; }

  bool at(Tok k) const { return peek().kind == k; }
  bool at_kw(const std::string& kw) const {
    return peek().kind == Tok::Keyword && peek().text == kw;
  }
  bool eat(Tok k) {
    if (at(k)) { advance(); return true; }
    return false;
  }
  bool eat_kw(const std::string& kw) {
    if (at_kw(kw)) { advance(); return true; }
    return false;
  }
  [[noreturn]] void fail(const std::string& what) const {
    const Token& t = peek();
    std::string got = t.kind == Tok::Eof ? "end of input" : "'" + t.text + "'";
    throw ParseError(t.loc, "expected " + what + ", found " + got, {what});
  }
  Token expect(Tok k, const std::string& what) {
    if (!at(k)) fail(what);
    return advance();
  }
  void expect_kw(const std::string& kw) {
    if (!at_kw(kw)) fail("'" + kw + "'");
    advance();
  }
  std::string expect_ident() {
    if (!at(Tok::Ident)) fail("identifier");
    return advance().text;
  }
  std::string expect_uident() {
    if (!at(Tok::UIdent)) fail("data constructor");
    return advance().text;
  }

  // --- kinds ---------------------------------------------------------------

  Kind::Base parse_kind_base() {
    if (eat_kw("type")) return Kind::Base::Type;
    if (eat_kw("term")) return Kind::Base::Term;
    if (eat_kw("perm")) return Kind::Base::Perm;
    fail("kind (type, term or perm)");
  }

  // --- types ---------------------------------------------------------------

  // Binder groups: [a, b : term, p : perm]; default kind is `type`.
  std::vector<std::pair<std::string, Kind>> parse_binder_group(Tok close) {
    std::vector<std::pair<std::string, Kind>> out;
    do {
      Token name = peek();
      std::string n = expect_ident();
      Kind k = Kind::type();
      if (eat(Tok::Colon)) k = Kind{parse_kind_base(), {}};
      out.emplace_back(n, k);
      (void)name;
    } while (eat(Tok::Comma));
    expect(close, close == Tok::RBracket ? "']'" : "'}'");
    return out;
  }

  Type parse_type_top() {
    DepthGuard g(*this);
    Loc loc = peek().loc;
    if (eat(Tok::LBracket)) {
      auto binders = parse_binder_group(Tok::RBracket);
      Type body = parse_type_top();
      for (auto it = binders.rbegin(); it != binders.rend(); ++it)
        body = t_forall(it->first, it->second, body, loc);
      return body;
    }
    // `{a} t` is an existential; distinguished from structural types because
    // those start with an uppercase constructor before the brace.
    if (at(Tok::LBrace)) {
      advance();
      auto binders = parse_binder_group(Tok::RBrace);
      Type body = parse_type_top();
      for (auto it = binders.rbegin(); it != binders.rend(); ++it)
        body = t_exists(it->first, it->second, body, loc);
      return body;
    }
    // Mode-constraint sugar: duplicable a => t  wraps t's domain if t is an
    // arrow, otherwise wraps t itself.
    if ((at_kw("duplicable") || at_kw("exclusive")) && peek(1).kind == Tok::Ident &&
        peek(2).kind == Tok::FatArrow) {
      Mode m = eat_kw("duplicable") ? Mode::Duplicable
                                    : (advance(), Mode::Exclusive);
      std::string subject = expect_ident();
      expect(Tok::FatArrow, "'=>'");
      Type body = parse_type_top();
      if (body->tag == TyTag::EArrow || body->tag == TyTag::Arrow) {
        auto n = std::make_shared<TypeNode>(*body);
        n->kids[0] = t_modeand(m, subject, body->kids[0], loc);
        return n;
      }
      return t_modeand(m, subject, body, loc);
    }
    return parse_type_arrow();
  }

  Type parse_type_arrow() {
    DepthGuard g(*this);
    Loc loc = peek().loc;
    Type dom = parse_type_bar();
    if (eat(Tok::Arrow)) {
      Type cod = parse_type_arrow();
      return t_earrow(dom, cod, loc);
    }
    return dom;
  }

  // t | P | Q, plus the general mode-constraint form `duplicable a | t`.
  Type parse_type_bar() {
    DepthGuard g(*this);
    Loc loc = peek().loc;
    if ((at_kw("duplicable") || at_kw("exclusive")) && peek(1).kind == Tok::Ident &&
        peek(2).kind == Tok::Pipe) {
      Mode m = eat_kw("duplicable") ? Mode::Duplicable
                                    : (advance(), Mode::Exclusive);
      std::string subject = expect_ident();
      expect(Tok::Pipe, "'|'");
      return t_modeand(m, subject, parse_type_bar(), loc);
    }
    Type t = parse_type_star();
    while (at(Tok::Pipe)) {
      advance();
      Type p = parse_type_star();
      t = t_bar(t, p, loc);
    }
    return t;
  }

  Type parse_type_star() {
    DepthGuard g(*this);
    Loc loc = peek().loc;
    Type t = parse_type_comp();
    while (at(Tok::Star)) {
      advance();
      Type q = parse_type_comp();
      t = t_star(t, q, loc);
    }
    return t;
  }

  // One tuple-component-level type: optional `consumes`, optional name
  // introduction, then an application/anchor.
  Type parse_type_comp() {
    DepthGuard g(*this);
    Loc loc = peek().loc;
    if (eat_kw("consumes")) {
      Type inner = parse_type_comp();
      return t_consumes(inner, loc);
    }
    if (at(Tok::Ident) && peek(1).kind == Tok::Colon) {
      std::string name = advance().text;
      advance();  // ':'
      Type inner = parse_type_star();
      return t_nameintro(name, inner, loc);
    }
    if (at(Tok::Ident) && peek(1).kind == Tok::At) {
      std::string name = advance().text;
      advance();  // '@'
      Type inner = parse_type_app();
      return t_anchored(name, inner, loc);
    }
    return parse_type_app();
  }

  bool at_type_atom_start() const {
    switch (peek().kind) {
      case Tok::Ident:
      case Tok::UIdent:
      case Tok::LParen:
        return true;
      case Tok::Keyword:
        return peek().text == "dynamic" || peek().text == "unknown" ||
               peek().text == "empty";
      default:
        return false;
    }
  }

  Type parse_type_app() {
    DepthGuard g(*this);
    Loc loc = peek().loc;
    if (at(Tok::Ident)) {
      std::string head = advance().text;
      std::vector<Type> args;
      while (at_type_atom_start()) args.push_back(parse_type_atom());
      if (args.empty()) return t_var(head, loc);
      return t_app(head, std::move(args), loc);
    }
    return parse_type_atom();
  }

  Type parse_type_atom() {
    DepthGuard g(*this);
    Loc loc = peek().loc;
    if (at(Tok::Ident)) return t_var(advance().text, loc);
    if (eat_kw("dynamic")) return t_dynamic(loc);
    if (eat_kw("unknown")) return t_unknown(loc);
    if (eat_kw("empty")) return t_empty(loc);
    if (at(Tok::Eq) && peek(1).kind == Tok::Ident) {
      advance();
      return t_singleton(advance().text, loc);
    }
    if (at(Tok::UIdent)) return parse_type_concrete();
    if (at(Tok::LBracket) || at(Tok::LBrace)) return parse_type_top();
    if (eat(Tok::LParen)) {
      // (), (t), (t, u, ...), (| P), and name intros / consumes inside.
      if (eat(Tok::RParen)) return t_tuple({}, loc);
      if (at(Tok::Pipe)) {
        advance();
        Type p = parse_type_bar();
        expect(Tok::RParen, "')'");
        return t_bar(t_tuple({}, loc), p, loc);
      }
      std::vector<Type> comps;
      comps.push_back(parse_type_element());
      bool tuple = false;
      while (eat(Tok::Comma)) {
        tuple = true;
        comps.push_back(parse_type_element());
      }
      expect(Tok::RParen, "')'");
      if (!tuple) return comps[0];
      return t_tuple(std::move(comps), loc);
    }
    fail("type");
  }

  // Element inside parentheses: full arrow-level type (with consumes / name
  // intro allowed at the front via parse_type_comp).
  Type parse_type_element() {
    DepthGuard g(*this);
    Loc loc = peek().loc;
    if ((at_kw("duplicable") || at_kw("exclusive")) && peek(1).kind == Tok::Ident &&
        peek(2).kind == Tok::Pipe) {
      return parse_type_arrow();
    }
    if (eat_kw("consumes")) return t_consumes(parse_type_element(), loc);
    if (at(Tok::Ident) && peek(1).kind == Tok::Colon) {
      std::string name = advance().text;
      advance();
      Type inner = parse_type_arrow();
      return t_nameintro(name, inner, loc);
    }
    return parse_type_arrow();
  }

  // Ctor { f: t; g == y; h, i: u } [adopts t]
  Type parse_type_concrete() {
    Loc loc = peek().loc;
    std::string ctor = expect_uident();
    std::vector<std::pair<std::string, Type>> fields;
    if (eat(Tok::LBrace)) {
      if (!at(Tok::RBrace)) {
        do {
          std::vector<std::string> group;
          group.push_back(expect_ident());
          while (eat(Tok::Comma)) group.push_back(expect_ident());
          Type ft;
          if (eat(Tok::EqEq)) {
            ft = t_singleton(expect_ident(), peek().loc);
          } else {
            expect(Tok::Colon, "':' or '=='");
            ft = parse_type_bar();
          }
          for (auto& f : group) fields.emplace_back(f, ft);
        } while (eat(Tok::Semi) && !at(Tok::RBrace));
      }
      expect(Tok::RBrace, "'}'");
    }
    Type adopts = nullptr;
    if (eat_kw("adopts")) adopts = parse_type_app();
    return t_concrete(ctor, std::move(fields), adopts, loc);
  }

  // --- patterns --------------------------------------------------------------

  Pattern parse_pattern() {
    DepthGuard g(*this);
    Loc loc = peek().loc;
    if (at(Tok::Ident)) return p_var(advance().text, loc);
    if (at_kw("_")) { advance(); return p_var("_", loc); }
    if (at(Tok::UIdent)) {
      std::string ctor = advance().text;
      std::vector<std::pair<std::string, Pattern>> fields;
      if (eat(Tok::LBrace)) {
        if (!at(Tok::RBrace)) {
          do {
            std::string f = expect_ident();
            expect(Tok::Eq, "'='");
            fields.emplace_back(f, parse_pattern());
          } while (eat(Tok::Semi) && !at(Tok::RBrace));
        }
        expect(Tok::RBrace, "'}'");
      }
      return p_ctor(ctor, std::move(fields), loc);
    }
    if (eat(Tok::LParen)) {
      if (eat(Tok::RParen)) return p_tuple({}, loc);
      std::vector<Pattern> kids;
      kids.push_back(parse_pattern());
      while (eat(Tok::Comma)) kids.push_back(parse_pattern());
      expect(Tok::RParen, "')'");
      if (kids.size() == 1) return kids[0];
      return p_tuple(std::move(kids), loc);
    }
    fail("pattern");
  }

  // --- expressions -----------------------------------------------------------

  Expr parse_seq() {
    DepthGuard g(*this);
    std::vector<Expr> stmts;
    stmts.push_back(parse_stmt());
    while (at(Tok::Semi)) {
      advance();
      stmts.push_back(parse_stmt());
    }
    Expr e = stmts.back();
    for (size_t i = stmts.size() - 1; i-- > 0;)
      e = e_let(p_var("_", stmts[i]->loc), stmts[i], e, stmts[i]->loc);
    return e;
  }

  Expr parse_stmt() {
    DepthGuard g(*this);
    Loc loc = peek().loc;
    if (eat_kw("let")) {
      Pattern p = parse_pattern();
      expect(Tok::Eq, "'='");
      Expr rhs = parse_stmt();
      expect_kw("in");
      Expr body = parse_seq();
      return e_let(p, rhs, body, loc);
    }
    if (eat_kw("if")) {
      Expr c = parse_stmt();
      expect_kw("then");
      Expr t = parse_stmt();
      Expr e = eat_kw("else") ? parse_stmt() : e_unit(loc);
      return e_if(c, t, e, loc);
    }
    if (eat_kw("match")) {
      Expr scrut = parse_stmt();
      expect_kw("with");
      std::vector<std::pair<Pattern, Expr>> arms;
      eat(Tok::Pipe);
      do {
        Pattern p = parse_pattern();
        expect(Tok::Arrow, "'->'");
        Expr body = parse_seq();
        arms.emplace_back(p, body);
      } while (eat(Tok::Pipe));
      expect_kw("end");
      return e_match(scrut, std::move(arms), loc);
    }
    if (eat_kw("give")) {
      Expr x = parse_op();
      expect_kw("to");
      Expr y = parse_op();
      return e_give(x, y, loc);
    }
    if (eat_kw("take")) {
      Expr x = parse_op();
      expect_kw("from");
      Expr y = parse_op();
      return e_take(x, y, loc);
    }
    if (eat_kw("taking")) {
      Expr x = parse_op();
      expect_kw("from");
      Expr y = parse_op();
      expect_kw("begin");
      Expr body = parse_seq();
      expect_kw("end");
      return e_taking(x, y, body, loc);
    }
    if (at_kw("tag")) {
      advance();
      expect_kw("of");
      Expr x = parse_op();
      expect(Tok::LArrow, "'<-'");
      std::string ctor = expect_uident();
      return e_writetag(x, ctor, loc);
    }
    if (eat_kw("fail")) return e_fail(loc);
    if (at_kw("fun")) return parse_fun();

    Expr e = parse_op();
    if (at(Tok::LArrow)) {
      if (e->tag != ExTag::Read)
        throw ParseError(peek().loc, "left side of '<-' must be a field path");
      advance();
      Expr rhs = parse_stmt();
      return e_write(e->kids[0], e->field, rhs, loc);
    }
    return e;
  }

  Expr parse_fun() {
    Loc loc = peek().loc;
    expect_kw("fun");
    std::vector<std::pair<std::string, Kind>> binders;
    if (eat(Tok::LBracket)) binders = parse_binder_group(Tok::RBracket);
    Type dom = parse_fun_domain();
    expect(Tok::Colon, "':'");
    Type cod = parse_type_top();
    expect(Tok::Eq, "'='");
    Expr body = parse_stmt();
    return e_fun(std::move(binders), dom, cod, body, loc);
  }

  // Parenthesized function domain; a lone component is the domain itself,
  // zero or several become a tuple.
  Type parse_fun_domain() {
    Loc loc = peek().loc;
    expect(Tok::LParen, "'('");
    if (eat(Tok::RParen)) return t_tuple({}, loc);
    if (at(Tok::Pipe)) {
      advance();
      Type p = parse_type_bar();
      expect(Tok::RParen, "')'");
      return t_bar(t_tuple({}, loc), p, loc);
    }
    std::vector<Type> comps;
    comps.push_back(parse_type_element());
    bool tuple = false;
    while (eat(Tok::Comma)) {
      tuple = true;
      comps.push_back(parse_type_element());
    }
    expect(Tok::RParen, "')'");
    if (!tuple) return comps[0];
    return t_tuple(std::move(comps), loc);
  }

  Expr parse_op() {
    DepthGuard g(*this);
    Loc loc = peek().loc;
    Expr lhs = parse_add();
    if (at(Tok::EqEq) || at(Tok::Less)) {
      std::string op = advance().text;
      Expr rhs = parse_add();
      return e_binop(op, lhs, rhs, loc);
    }
    return lhs;
  }

  Expr parse_add() {
    DepthGuard g(*this);
    Loc loc = peek().loc;
    Expr e = parse_postfix();
    while (at(Tok::Plus) || at(Tok::Minus)) {
      std::string op = advance().text;
      Expr rhs = parse_postfix();
      e = e_binop(op, e, rhs, loc);
    }
    return e;
  }

  bool at_expr_atom_start() const {
    switch (peek().kind) {
      case Tok::Ident:
      case Tok::UIdent:
      case Tok::Int:
      case Tok::LParen:
        return true;
      case Tok::Keyword:
        // A block is not an argument starter: `taking x from y begin`
        // must read the block as the taking body, not as `y begin..end`.
        return peek().text == "true" || peek().text == "false" ||
               peek().text == "fun";
      default:
        return false;
    }
  }

  Expr parse_postfix() {
    DepthGuard g(*this);
    Expr e = parse_atom();
    while (true) {
      Loc loc = peek().loc;
      if (at(Tok::Dot)) {
        advance();
        e = e_read(e, expect_ident(), loc);
      } else if (at(Tok::LBracket)) {
        advance();
        Type t = parse_type_top();
        expect(Tok::RBracket, "']'");
        e = e_typeapp(e, t, loc);
      } else if (at_expr_atom_start()) {
        Expr arg = parse_atom_postfix();
        e = e_apply(e, arg, loc);
      } else {
        break;
      }
    }
    return e;
  }

  // An argument: an atom plus tight postfixes (field reads), so that
  // `f xs.tail` parses as `f (xs.tail)`.
  Expr parse_atom_postfix() {
    Expr e = parse_atom();
    while (at(Tok::Dot)) {
      Loc loc = advance().loc;
      e = e_read(e, expect_ident(), loc);
    }
    return e;
  }

  Expr parse_atom() {
    DepthGuard g(*this);
    Loc loc = peek().loc;
    if (at(Tok::Ident)) return e_var(advance().text, loc);
    if (at(Tok::Int)) return e_int(advance().int_val, loc);
    if (eat_kw("true")) return e_bool(true, loc);
    if (eat_kw("false")) return e_bool(false, loc);
    if (at_kw("fun")) return parse_fun();
    if (eat_kw("begin")) {
      Expr e = parse_seq();
      expect_kw("end");
      return e;
    }
    if (at(Tok::UIdent)) {
      std::string ctor = advance().text;
      std::vector<std::pair<std::string, Expr>> inits;
      if (eat(Tok::LBrace)) {
        if (!at(Tok::RBrace)) {
          do {
            std::string f = expect_ident();
            expect(Tok::Eq, "'='");
            inits.emplace_back(f, parse_stmt());
          } while (eat(Tok::Semi) && !at(Tok::RBrace));
        }
        expect(Tok::RBrace, "'}'");
      }
      Type adopts = nullptr;
      if (eat_kw("adopts")) adopts = parse_type_app();
      return e_construct(ctor, std::move(inits), adopts, loc);
    }
    if (eat(Tok::LParen)) {
      if (eat(Tok::RParen)) return e_unit(loc);
      Expr first = parse_seq();
      if (eat(Tok::Colon)) {
        Type t = parse_type_top();
        expect(Tok::RParen, "')'");
        return e_annot(first, t, loc);
      }
      std::vector<Expr> comps{first};
      while (eat(Tok::Comma)) comps.push_back(parse_seq());
      expect(Tok::RParen, "')'");
      if (comps.size() == 1) return comps[0];
      return e_tuple(std::move(comps), loc);
    }
    fail("expression");
  }

  // --- items -----------------------------------------------------------------

  std::vector<std::pair<std::string, Kind::Base>> parse_def_params() {
    std::vector<std::pair<std::string, Kind::Base>> params;
    while (true) {
      if (at(Tok::Ident)) {
        params.emplace_back(advance().text, Kind::Base::Type);
      } else if (at(Tok::LParen) && peek(1).kind == Tok::Ident &&
                 peek(2).kind == Tok::Colon) {
        advance();
        std::string n = expect_ident();
        expect(Tok::Colon, "':'");
        Kind::Base k = parse_kind_base();
        expect(Tok::RParen, "')'");
        params.emplace_back(n, k);
      } else {
        break;
      }
    }
    return params;
  }

  DataDef parse_data() {
    Loc loc = peek().loc;
    expect_kw("data");
    DataDef def;
    def.loc = loc;
    def.is_mutable = eat_kw("mutable");
    def.name = expect_ident();
    def.params = parse_def_params();
    expect(Tok::Eq, "'='");
    eat(Tok::Pipe);
    do {
      DataBranch br;
      br.loc = peek().loc;
      br.ctor = expect_uident();
      if (eat(Tok::LBrace)) {
        if (!at(Tok::RBrace)) {
          do {
            std::vector<std::string> group;
            group.push_back(expect_ident());
            while (eat(Tok::Comma)) group.push_back(expect_ident());
            expect(Tok::Colon, "':'");
            Type ft = parse_type_bar();
            for (auto& f : group) br.fields.emplace_back(f, ft);
          } while (eat(Tok::Semi) && !at(Tok::RBrace));
        }
        expect(Tok::RBrace, "'}'");
      }
      def.branches.push_back(std::move(br));
    } while (eat(Tok::Pipe));
    if (eat_kw("adopts")) def.adopts = parse_type_app();
    if (!def.adopts) def.adopts = t_bottom(loc);
    return def;
  }

  AbstractDef parse_abstract() {
    Loc loc = peek().loc;
    expect_kw("abstract");
    AbstractDef def;
    def.loc = loc;
    def.name = expect_ident();
    def.params = parse_def_params();
    return def;
  }

  Mode parse_source_mode() {
    if (eat_kw("duplicable")) return Mode::Duplicable;
    if (eat_kw("exclusive")) return Mode::Exclusive;
    fail("'duplicable' or 'exclusive'");
  }

  FactDecl parse_fact() {
    Loc loc = peek().loc;
    expect_kw("fact");
    FactDecl decl;
    decl.loc = loc;
    Mode first = parse_source_mode();
    // `fact m x ...` is a hypothesis clause iff followed by `and` or `=>`.
    bool clause_form = at(Tok::Ident) && (peek(1).kind == Tok::FatArrow ||
                                          (peek(1).kind == Tok::Keyword &&
                                           peek(1).text == "and"));
    if (clause_form) {
      decl.hypothesis.emplace_back(first, expect_ident());
      while (eat_kw("and")) {
        Mode m = parse_source_mode();
        decl.hypothesis.emplace_back(m, expect_ident());
      }
      expect(Tok::FatArrow, "'=>'");
      decl.conclusion = parse_source_mode();
    } else {
      decl.conclusion = first;
    }
    if (eat(Tok::LParen)) {
      decl.type_name = expect_ident();
      while (at(Tok::Ident)) decl.params.push_back(advance().text);
      expect(Tok::RParen, "')'");
    } else {
      decl.type_name = expect_ident();
      while (at(Tok::Ident)) decl.params.push_back(advance().text);
    }
    return decl;
  }

  ValDef parse_val() {
    Loc loc = peek().loc;
    expect_kw("val");
    ValDef def;
    def.loc = loc;
    def.is_rec = eat_kw("rec");
    def.name = expect_ident();
    if (eat(Tok::Eq)) {
      def.body = parse_seq();
      return def;
    }
    if (eat(Tok::Colon)) {
      // Annotated plain value.
      def.signature = parse_type_top();
      expect(Tok::Eq, "'='");
      def.body = parse_seq();
      return def;
    }
    // Function definition sugar.
    std::vector<std::pair<std::string, Kind>> binders;
    if (at(Tok::LBracket)) {
      advance();
      binders = parse_binder_group(Tok::RBracket);
    }
    if (!at(Tok::LParen)) fail("'=', '[' or '('");
    Type dom = parse_fun_domain();
    expect(Tok::Colon, "':'");
    Type cod = parse_type_top();
    expect(Tok::Eq, "'='");
    Expr body = parse_seq();
    Type sig = t_earrow(dom, cod, loc);
    for (auto it = binders.rbegin(); it != binders.rend(); ++it)
      sig = t_forall(it->first, it->second, sig, loc);
    def.signature = sig;
    def.body = e_fun(std::move(binders), dom, cod, body, loc);
    return def;
  }

  Program parse_program_items(const std::string& filename) {
    Program prog;
    prog.filename = filename;
    while (!at(Tok::Eof)) {
      Item item;
      if (at_kw("data")) {
        item.tag = ItemTag::Data;
        item.data = parse_data();
      } else if (at_kw("abstract")) {
        item.tag = ItemTag::Abstract;
        item.abstract = parse_abstract();
      } else if (at_kw("fact")) {
        item.tag = ItemTag::Fact;
        item.fact = parse_fact();
      } else if (at_kw("val")) {
        item.tag = ItemTag::Val;
        item.val = parse_val();
      } else {
        fail("'data', 'abstract', 'fact' or 'val'");
      }
      prog.items.push_back(std::move(item));
    }
    return prog;
  }
};

}  // namespace

Program parse_program(const std::string& source, const std::string& filename) {
  Parser p(source);
  return p.parse_program_items(filename);
}

Type parse_type(const std::string& source) {
  Parser p(source);
  Type t = p.parse_type_top();
  if (!p.at(Tok::Eof)) p.fail("end of input");
  return t;
}

}  // namespace mezzo
