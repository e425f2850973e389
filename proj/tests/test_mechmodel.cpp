#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <memory>

#include "dforge/mechmodel.hpp"
#include "doctest.h"

using namespace dforge;

namespace {

ModelSpec toy_model() {
  ModelSpec m;
  m.syms = std::make_shared<Symbols>();
  m.name = "toy";
  for (const char* n : {"x", "y", "z"}) {
    m.coordinates.push_back(m.syms->intern(AtomKind::coordinate, n));
    m.syms->intern(AtomKind::momentum, std::string("p_") + n);
  }
  m.lagrangian = parse_expression(m.syms, "(x' - y)^2/2 + (y' + z)^2/2");
  return m;
}

}  // namespace

TEST_CASE("euler-lagrange residuals of the toy model") {
  ModelSpec m = toy_model();
  auto el = euler_lagrange(m);
  REQUIRE(el.size() == 3);
  CHECK(el[0] == parse_expression(m.syms, "y' - x''"));
  CHECK(el[1] == parse_expression(m.syms, "y - x' - z' - y''"));
  CHECK(el[2] == parse_expression(m.syms, "z + y'"));
}

TEST_CASE("noether identity of the toy symmetry") {
  ModelSpec m = toy_model();
  // delta x = alpha, delta y = alpha', delta z = -alpha'' induce the
  // differential identity E_x - (E_y)' - (E_z)'' = 0.
  std::vector<IdentityCoefficient> coeffs = {
      {0, 0, parse_expression(m.syms, "1")},
      {1, 1, parse_expression(m.syms, "-1")},
      {2, 2, parse_expression(m.syms, "-1")},
  };
  CHECK(noether_identity(m, coeffs).is_zero());
  // A wrong sign breaks it.
  coeffs[2].value = parse_expression(m.syms, "1");
  CHECK_FALSE(noether_identity(m, coeffs).is_zero());
}

TEST_CASE("singular legendre transform of the toy model") {
  ModelSpec m = toy_model();
  HamiltonianSystem hs = legendre(m);

  REQUIRE(hs.pairs.size() == 3);
  CHECK(hs.h0 == parse_expression(m.syms, "(p_x^2 + p_y^2)/2 + y*p_x - z*p_y"));

  REQUIRE(hs.momentum_definitions.size() == 3);
  CHECK(hs.momentum_definitions[0].second == parse_expression(m.syms, "x' - y"));
  CHECK(hs.momentum_definitions[1].second == parse_expression(m.syms, "y' + z"));
  CHECK(hs.momentum_definitions[2].second.is_zero());

  REQUIRE(hs.constraints.size() == 1);
  CHECK(hs.constraints[0].expr == parse_expression(m.syms, "p_z"));
  CHECK(hs.constraints[0].stage == 1);
  CHECK(hs.constraints[0].origin == "null direction of the kinetic block");

  REQUIRE(hs.multipliers.size() == 1);
  CHECK(m.syms->at(hs.multipliers[0].atom).name == "lambda_z");
  CHECK_FALSE(hs.multipliers[0].determined);

  // The solved velocities invert the regular block.
  REQUIRE(hs.solved_velocities.size() == 2);
  CHECK(hs.solved_velocities[0].second == parse_expression(m.syms, "p_x + y"));
  CHECK(hs.solved_velocities[1].second == parse_expression(m.syms, "p_y - z"));

  // H_T adds the primary multiplier combination.
  CHECK(hs.total_hamiltonian() ==
        hs.h0 + parse_expression(m.syms, "p_z*lambda_z"));
}

TEST_CASE("regular lagrangian yields no constraints") {
  ModelSpec m;
  m.syms = std::make_shared<Symbols>();
  m.name = "free";
  m.coordinates.push_back(m.syms->intern(AtomKind::coordinate, "x"));
  m.syms->intern(AtomKind::momentum, "p_x");
  m.lagrangian = parse_expression(m.syms, "x'^2/2 - x^2/2");
  HamiltonianSystem hs = legendre(m);
  CHECK(hs.constraints.empty());
  CHECK(hs.multipliers.empty());
  CHECK(hs.h0 == parse_expression(m.syms, "p_x^2/2 + x^2/2"));
}

TEST_CASE("non-affine momentum map is rejected") {
  ModelSpec m;
  m.syms = std::make_shared<Symbols>();
  m.name = "quartic";
  m.coordinates.push_back(m.syms->intern(AtomKind::coordinate, "x"));
  m.syms->intern(AtomKind::momentum, "p_x");
  m.lagrangian = parse_expression(m.syms, "x'^4/4");
  CHECK_THROWS_AS(legendre(m), model_error);
}

TEST_CASE("kinetic pivot needs an invertibility assumption") {
  ModelSpec m;
  m.syms = std::make_shared<Symbols>();
  m.name = "einbein";
  m.coordinates.push_back(m.syms->intern(AtomKind::coordinate, "v"));
  m.coordinates.push_back(m.syms->intern(AtomKind::coordinate, "u"));
  m.syms->intern(AtomKind::momentum, "p_v");
  m.syms->intern(AtomKind::momentum, "p_u");
  // The v-velocity coefficient u is a coordinate: never assured invertible,
  // so the kinetic block cannot be solved.
  m.lagrangian = parse_expression(m.syms, "u*v'^2/2");
  CHECK_THROWS_AS(legendre(m), model_error);
}
