#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <memory>
#include <random>

#include "dforge/calculus.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace dforge;

namespace {

struct Fixture {
  SymbolsPtr s = std::make_shared<Symbols>();
  AtomId x, y, px, py, g, alpha;
  Fixture() {
    x = s->intern(AtomKind::coordinate, "x");
    y = s->intern(AtomKind::coordinate, "y");
    px = s->intern(AtomKind::momentum, "p_x");
    py = s->intern(AtomKind::momentum, "p_y");
    g = s->intern(AtomKind::parameter, "a");
    alpha = s->intern(AtomKind::gauge_function, "alpha");
  }
  Expr operator()(const char* t) const { return parse_expression(s, t); }
};

}  // namespace

TEST_CASE("partial derivatives with quotient rule") {
  Fixture f;
  CHECK(differentiate(f("x^3*y + y"), f.x) == f("3*x^2*y"));
  CHECK(differentiate(f("x/y"), f.y) == f("-x/y^2"));
  CHECK(differentiate(f("(x + y)/(x - y)"), f.x) == f("-2*y/(x - y)^2"));
  CHECK(differentiate(f("a"), f.x).is_zero());
}

TEST_CASE("total tau derivative prolongs jets") {
  Fixture f;
  CHECK(d_dtau(f("x")) == f("x'"));
  CHECK(d_dtau(f("x'^2/2")) == f("x'*x''"));
  CHECK(d_dtau(f("tau^2/2")) == f("tau"));
  CHECK(d_dtau(f("a")).is_zero());
  CHECK(d_dtau(f("alpha*x")) == f("alpha'*x + alpha*x'"));
  CHECK(d_dtau(f("1/x")) == f("-x'/x^2"));
  // No prescribed evolution for momenta or multipliers.
  CHECK_THROWS_AS(d_dtau(f("p_x")), kernel_error);
}

TEST_CASE("poisson bracket basics") {
  Fixture f;
  std::vector<std::pair<AtomId, AtomId>> pairs = {{f.x, f.px}, {f.y, f.py}};
  CHECK(poisson(f("x"), f("p_x"), pairs) == f("1"));
  CHECK(poisson(f("x"), f("p_y"), pairs).is_zero());
  CHECK(poisson(f("x*p_y"), f("y*p_x"), pairs) == f("y*p_y - x*p_x"));
  CHECK_THROWS_AS(poisson(f("x'"), f("p_x"), pairs), kernel_error);
}

TEST_CASE("substitution is exact and ordered") {
  Fixture f;
  CHECK(substitute_atom(f("x^2 + y"), f.x, f("y - 1")) == f("y^2 - y + 1"));
  CHECK(substitute_atom(f("1/x"), f.x, f("y + 1")) == f("1/(y + 1)"));
  CHECK_THROWS_AS(substitute_atom(f("1/x"), f.x, f("0")), kernel_error);
  // Sequential: later pairs see the result of earlier ones.
  Expr e = substitute(f("x"), {{f.x, f("y")}, {f.y, f("a")}});
  CHECK(e == f("a"));
}

TEST_CASE("power substitution rewrites even powers") {
  Fixture f;
  Expr v = f("3*a^2/4");
  CHECK(apply_power_substitution(f("x^2"), f.x, 2, v) == f("3*a^2/4"));
  CHECK(apply_power_substitution(f("x^5*y"), f.x, 2, v) == f("9*a^4*x*y/16"));
  CHECK(apply_power_substitution(f("x"), f.x, 2, v) == f("x"));
  CHECK(apply_power_substitution(f("y/x^2"), f.x, 2, v) == f("4*y/(3*a^2)"));
}

TEST_CASE("euler operator and dependent families") {
  Fixture f;
  // Free particle: E_x of x'^2/2 is -x''.
  CHECK(euler_operator(f("x'^2/2"), "x", AtomKind::coordinate) == f("-x''"));
  // Potential only: E_x of -x^2/2 is -x.
  CHECK(euler_operator(f("-x^2/2"), "x", AtomKind::coordinate) == f("-x"));
  // Total derivatives are annihilated.
  CHECK(euler_operator(d_dtau(f("x^2*x' + x")), "x", AtomKind::coordinate).is_zero());

  auto fams = dependent_families(f("alpha'*x + y''"));
  REQUIRE(fams.size() == 3);
  CHECK(fams[0].first == "x");
  CHECK(fams[1].first == "y");
  CHECK(fams[2].first == "alpha");
}

TEST_CASE("exactness oracle reconstructs primitives") {
  Fixture f;
  SUBCASE("polynomial jet expression") {
    Expr F = f("x^2*x' + alpha*y - tau*x");
    auto r = exact_total_derivative(d_dtau(F));
    REQUIRE(r.is_exact);
    REQUIRE(r.primitive.has_value());
    CHECK(d_dtau(*r.primitive) == d_dtau(F));
  }
  SUBCASE("laurent tail in a single family") {
    Expr F = f("a/x^3");
    auto r = exact_total_derivative(d_dtau(F));
    REQUIRE(r.is_exact);
    REQUIRE(r.primitive.has_value());
    CHECK(d_dtau(*r.primitive) == d_dtau(F));
  }
  SUBCASE("pure tau with rational primitive") {
    auto r = exact_total_derivative(f("tau^2 - 1/tau^2"));
    REQUIRE(r.is_exact);
    REQUIRE(r.primitive.has_value());
    CHECK(d_dtau(*r.primitive) == f("tau^2 - 1/tau^2"));
  }
  SUBCASE("logarithmic obstruction is reported without certificate") {
    auto r = exact_total_derivative(f("1/tau"));
    CHECK(r.is_exact);
    CHECK_FALSE(r.primitive.has_value());
    CHECK_FALSE(r.note.empty());
  }
  SUBCASE("non-exact expression fails with residuals") {
    auto r = exact_total_derivative(f("x'^2"));
    CHECK_FALSE(r.is_exact);
    CHECK_FALSE(r.residuals.empty());
  }
}

TEST_CASE("bracket properties on random phase-space functions") {
  Fixture f;
  std::mt19937 rng(testing::test_seed());
  std::vector<AtomId> pool = {f.x, f.y, f.px, f.py, f.g};
  std::vector<std::pair<AtomId, AtomId>> pairs = {{f.x, f.px}, {f.y, f.py}};
  for (int i = 0; i < 200; ++i) {
    Expr a = testing::random_poly(rng, f.s, pool, 3, 3);
    Expr b = testing::random_poly(rng, f.s, pool, 3, 3);
    Expr c = testing::random_poly(rng, f.s, pool, 2, 2);
    CHECK((poisson(a, b, pairs) + poisson(b, a, pairs)).is_zero());
    CHECK(poisson(a, b * c, pairs) == b * poisson(a, c, pairs) + poisson(a, b, pairs) * c);
    Expr jac = poisson(a, poisson(b, c, pairs), pairs) +
               poisson(b, poisson(c, a, pairs), pairs) +
               poisson(c, poisson(a, b, pairs), pairs);
    CHECK(jac.is_zero());
  }
}

TEST_CASE("exactness round-trip on random primitives") {
  Fixture f;
  std::mt19937 rng(testing::test_seed() + 1);
  std::vector<AtomId> jets = {f.x, *f.s->resolve("x", 1), f.y, f.alpha,
                              *f.s->resolve("alpha", 1), f.s->tau(), f.g};
  for (int i = 0; i < 200; ++i) {
    Expr F = testing::random_poly(rng, f.s, jets, 3, 3);
    Expr e = d_dtau(F);
    auto r = exact_total_derivative(e);
    REQUIRE(r.is_exact);
    if (e.is_zero()) continue;
    REQUIRE(r.primitive.has_value());
    CHECK(d_dtau(*r.primitive) == e);
  }
}
