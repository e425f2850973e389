#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <memory>
#include <random>

#include "dforge/expr.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace dforge;

namespace {

SymbolsPtr toy_symbols() {
  auto s = std::make_shared<Symbols>();
  for (const char* n : {"x", "y", "z"}) {
    s->intern(AtomKind::coordinate, n);
    s->intern(AtomKind::momentum, std::string("p_") + n);
  }
  s->intern(AtomKind::parameter, "a");
  s->intern(AtomKind::parameter, "b");
  return s;
}

}  // namespace

TEST_CASE("symbol table interning and resolution") {
  auto s = toy_symbols();
  AtomId x = *s->find(AtomKind::coordinate, "x");
  CHECK(s->intern(AtomKind::coordinate, "x") == x);  // find-or-create
  CHECK(s->at(s->tau()).kind == AtomKind::evolution);

  // Jets of declared coordinates are interned on demand.
  auto xdot = s->resolve("x", 1);
  REQUIRE(xdot.has_value());
  CHECK(s->at(*xdot).kind == AtomKind::derivative);
  CHECK(s->at(*xdot).order == 1);
  CHECK(s->derivative_of(x) == *xdot);

  // Momenta cannot carry primes.
  CHECK_THROWS_AS(s->resolve("p_x", 1), kernel_error);
  // Undeclared names resolve to nothing.
  CHECK_FALSE(s->resolve("nosuch", 0).has_value());
}

TEST_CASE("parse and print round-trip") {
  auto s = toy_symbols();
  for (const char* text : {
           "x",
           "x + y*z",
           "(x + y)^2",
           "x'^2/2 - y''*z",
           "1/(x + 1)",
           "(3*x - 2)/(7*y^2 - z)",
           "a*x^3 - b/(a*b)",
           "-x - (-y)",
           "tau^2*x - tau/3",
           "xdot/2 + yddot",
       }) {
    Expr e = parse_expression(s, text);
    CHECK(parse_expression(s, e.str()) == e);
  }
}

TEST_CASE("canonical forms identify equal expressions") {
  auto s = toy_symbols();
  auto eq = [&](const char* l, const char* r) {
    CHECK(parse_expression(s, l) == parse_expression(s, r));
  };
  eq("(x + y)^2", "x^2 + 2*x*y + y^2");
  eq("(x^2 - y^2)/(x - y)", "x + y");
  eq("x/3 + x/6", "x/2");
  eq("(2*x)/(4*y)", "x/(2*y)");
  eq("x - x", "0");
  eq("xdot", "x'");  // alias suffixes
  eq("xddot", "x''");

  // Denominator sign is normalized.
  Expr e = parse_expression(s, "x/(-y)");
  CHECK(e == parse_expression(s, "-x/y"));
  CHECK(e.str() == parse_expression(s, "(-x)/y").str());
}

TEST_CASE("rational constants and division errors") {
  auto s = toy_symbols();
  Expr half = parse_expression(s, "1/2");
  REQUIRE(half.is_rational());
  CHECK(*half.as_rational() == mpq_class(1, 2));
  CHECK(Expr::rational(s, mpq_class(-6, 4)) == parse_expression(s, "-3/2"));

  CHECK_THROWS_AS(parse_expression(s, "x/(y - y)"), kernel_error);
  CHECK_THROWS_AS(parse_expression(s, "x/0"), kernel_error);
  CHECK(parse_expression(s, "x").pow(-2) == parse_expression(s, "1/x^2"));
}

TEST_CASE("parser rejects malformed input") {
  auto s = toy_symbols();
  for (const char* bad : {"", "x +", "(x", "x ** y", "2.5*x", "q + 1", "x'''y"})
    CHECK_THROWS_AS(parse_expression(s, bad), kernel_error);
}

TEST_CASE("atom collection and containment") {
  auto s = toy_symbols();
  Expr e = parse_expression(s, "(x + y')/(a*z)");
  CHECK(e.contains(*s->find(AtomKind::coordinate, "x")));
  CHECK(e.contains(*s->find(AtomKind::parameter, "a")));
  CHECK_FALSE(e.contains(*s->find(AtomKind::momentum, "p_x")));
  CHECK(e.atoms().size() == 4);
}

TEST_CASE("field axioms on random expressions") {
  auto s = toy_symbols();
  std::mt19937 rng(testing::test_seed());
  std::vector<AtomId> pool = {*s->find(AtomKind::coordinate, "x"),
                              *s->find(AtomKind::coordinate, "y"),
                              *s->find(AtomKind::parameter, "a")};
  for (int i = 0; i < 200; ++i) {
    Expr f = testing::random_poly(rng, s, pool, 3, 3);
    Expr g = testing::random_poly(rng, s, pool, 3, 3);
    Expr h = testing::random_nonzero_poly(rng, s, pool, 2, 2);
    CHECK(f + g == g + f);
    CHECK((f + g) * h == f * h + g * h);
    CHECK((f / h) * h == f);
    CHECK(f - f == Expr::zero(s));
    // cmp is a total order consistent with equality
    CHECK((Expr::cmp(f, g) == 0) == (f == g));
    CHECK(Expr::cmp(f, g) == -Expr::cmp(g, f));
  }
}
