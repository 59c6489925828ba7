// Core term utilities: alpha-equivalence, substitution, fresh names.

#include "doctest.h"
#include "helpers.hpp"
#include "mezzo/parser.hpp"
#include "mezzo/print.hpp"
#include "mezzo/syntax.hpp"

using namespace mezzo;

namespace {
Type ty(const std::string& s) { return parse_type(s); }
}  // namespace

TEST_SUITE("syntax") {
  TEST_CASE("alpha equivalence ignores binder names") {
    CHECK(alpha_equal(ty("[a] a -> a"), ty("[b] b -> b")));
    CHECK(alpha_equal(ty("{p: perm} (int | p)"), ty("{q: perm} (int | q)")));
    CHECK_FALSE(alpha_equal(ty("[a] a -> a"), ty("[b] b -> int")));
    CHECK_FALSE(alpha_equal(ty("[a] [b] a"), ty("[a] [b] b")));
  }

  TEST_CASE("alpha equivalence distinguishes free names") {
    CHECK_FALSE(alpha_equal(ty("list a"), ty("list b")));
    CHECK(alpha_equal(ty("list a"), ty("list a")));
  }

  TEST_CASE("substitution avoids capture") {
    // [b] (a, b) with a := b must not let the binder capture the free b.
    Type t = ty("[b] (a, b)");
    Type r = substitute(t, "a", t_var("b"));
    CHECK(alpha_equal(r, ty("[c] (b, c)")));
    CHECK_FALSE(alpha_equal(r, ty("[c] (c, c)")));
  }

  TEST_CASE("substitution respects shadowing") {
    Type t = ty("[a] (a, b)");
    Type r = substitute(t, "a", t_var("int"));
    CHECK(alpha_equal(r, t));
  }

  TEST_CASE("free names") {
    auto fn = free_names(ty("[a] (a, b, =x | y @ list c)"));
    CHECK(fn.count("b"));
    CHECK(fn.count("c"));
    CHECK(fn.count("x"));
    CHECK(fn.count("y"));
    CHECK_FALSE(fn.count("a"));
  }

  TEST_CASE("fresh names are deterministic per seed") {
    names::reset(0);
    std::string a1 = names::fresh("x");
    std::string a2 = names::fresh("x");
    names::reset(0);
    CHECK(names::fresh("x") == a1);
    CHECK(names::fresh("x") == a2);
    names::reset(5);
    CHECK(names::fresh("x") != a1);
  }

  TEST_CASE("generated names are recognizable") {
    names::reset(0);
    std::string g = names::fresh("tail");
    CHECK(names::is_generated(g));
    CHECK_FALSE(names::is_generated("tail"));
    CHECK(names::base_hint(g) == "tail");
  }
}
