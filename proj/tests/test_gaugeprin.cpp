#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <memory>

#include "dforge/gaugeprin.hpp"
#include "dforge/modelfile.hpp"
#include "doctest.h"

using namespace dforge;

namespace {

const std::string kModels = DFORGE_MODELS_DIR;

}  // namespace

TEST_CASE("variations prolong through jets") {
  auto s = std::make_shared<Symbols>();
  AtomId x = s->intern(AtomKind::coordinate, "x");
  s->intern(AtomKind::gauge_function, "alpha");
  auto p = [&](const char* t) { return parse_expression(s, t); };

  LocalTransformation t{"shift", {{x, p("alpha*x")}}, {"alpha"}};
  // delta(x') = (delta x)' and the product rule applies inside expressions.
  CHECK(apply_variation(p("x'"), t) == p("alpha'*x + alpha*x'"));
  CHECK(apply_variation(p("x*x'"), t) ==
        p("alpha*x*x' + x*(alpha'*x + alpha*x')"));
  CHECK(apply_variation(p("tau"), t).is_zero());
}

TEST_CASE("phase-space variations act on momentum atoms") {
  auto s = std::make_shared<Symbols>();
  AtomId x = s->intern(AtomKind::coordinate, "x");
  AtomId px = s->intern(AtomKind::momentum, "p_x");
  s->intern(AtomKind::gauge_function, "eps");
  auto p = [&](const char* t) { return parse_expression(s, t); };

  LocalTransformation t{"boost", {{x, p("eps")}, {px, p("2*eps")}}, {"eps"}};
  CHECK(apply_variation(p("x*p_x"), t) == p("eps*p_x + 2*eps*x"));
}

TEST_CASE("local invariance of the toy shift") {
  ModelFile mf = load_model_file(kModels + "/toy.model");
  InvarianceReport r =
      verify_local_invariance(mf.model.lagrangian, mf.transformation("shift"));
  CHECK(r.invariant);
  CHECK(r.variation.is_zero());  // invariant on the nose, not just exact
}

TEST_CASE("local invariance of the rescaling with a nonzero primitive") {
  ModelFile mf = load_model_file(kModels + "/dsr_plain.model");
  InvarianceReport r =
      verify_local_invariance(mf.model.lagrangian, mf.transformation("repar"));
  CHECK(r.invariant);
  CHECK_FALSE(r.variation.is_zero());
  REQUIRE(r.exactness.primitive.has_value());
  CHECK(d_dtau(*r.exactness.primitive) == r.variation);
}

TEST_CASE("noether coefficients from a declared variation") {
  ModelFile mf = load_model_file(kModels + "/toy.model");
  auto coeffs = identity_coefficients_from_variation(
      mf.model, mf.transformation("shift"), "alpha");
  REQUIRE(coeffs.size() == 3);
  auto p = [&](const char* t) { return parse_expression(mf.model.syms, t); };
  CHECK(coeffs[0].coordinate == 0);
  CHECK(coeffs[0].order == 0);
  CHECK(coeffs[0].value == p("1"));
  CHECK(coeffs[1].coordinate == 1);
  CHECK(coeffs[1].order == 1);
  CHECK(coeffs[1].value == p("-1"));
  CHECK(coeffs[2].coordinate == 2);
  CHECK(coeffs[2].order == 2);
  CHECK(coeffs[2].value == p("-1"));
  CHECK(noether_identity(mf.model, coeffs).is_zero());
}

TEST_CASE("so(3) structure constants close") {
  ModelFile mf = load_model_file(kModels + "/spin.model");
  const LieGroupAction& rot = mf.action("rot");
  auto c = structure_constants(rot);
  auto p = [&](const char* t) { return parse_expression(mf.model.syms, t); };
  // [G_j, G_k] = sum_m c^m_{jk} G_m with c^m_{jk} = epsilon_{jkm}.
  REQUIRE(c.size() == 3);
  CHECK(c[0][1][2] == p("1"));
  CHECK(c[1][0][2] == p("-1"));
  CHECK(c[1][2][0] == p("1"));
  CHECK(c[2][1][0] == p("-1"));
  CHECK(c[0][0][0].is_zero());
  CHECK(c[0][1][0].is_zero());
}

TEST_CASE("non-closing generator set is rejected") {
  ModelFile mf = load_model_file(kModels + "/spin.model");
  LieGroupAction partial = mf.action("rot");
  // Keep only two rotation generators: their commutator leaves the span.
  partial.params.resize(2);
  partial.generators.resize(2);
  CHECK_THROWS_AS(structure_constants(partial), model_error);
}

TEST_CASE("phase actions demand sector-charge balance") {
  auto s = std::make_shared<Symbols>();
  ModelSpec m;
  m.syms = s;
  m.name = "unbalanced";
  m.coordinates.push_back(s->intern(AtomKind::coordinate, "x"));
  s->intern(AtomKind::momentum, "p_x");
  m.lagrangian = parse_expression(s, "x'^2/2 + x");  // odd term breaks parity

  LieGroupAction a;
  a.name = "u1";
  a.kind = ActionKind::phase;
  a.params = {"eps"};
  a.sector = {m.coordinates[0]};
  CHECK_THROWS_AS(validate_action(m, a), model_error);

  m.lagrangian = parse_expression(s, "x'^2/2 + x^2");
  CHECK_NOTHROW(validate_action(m, a));
}

TEST_CASE("gauging a one-dimensional phase invariance") {
  auto s = std::make_shared<Symbols>();
  ModelSpec m;
  m.syms = s;
  m.name = "scale1d";
  m.coordinates.push_back(s->intern(AtomKind::coordinate, "x"));
  s->intern(AtomKind::momentum, "p_x");
  m.lagrangian = parse_expression(s, "x'^2/2");

  LieGroupAction a;
  a.name = "u1";
  a.kind = ActionKind::phase;
  a.params = {"eps"};
  a.sector = {m.coordinates[0]};

  GaugeResult r = gauge_lagrangian(m, a);
  auto p = [&](const char* t) { return parse_expression(s, t); };
  CHECK(r.gauged.lagrangian == p("(x' - g*x)^2/2"));
  REQUIRE(r.covariant_derivatives.size() == 1);
  CHECK(r.covariant_derivatives[0] == p("x' - g*x"));
  for (const auto& res : r.covariance_residuals) CHECK(res.is_zero());
  CHECK(r.invariance_residual.is_zero());
  REQUIRE(r.gauged.coordinates.size() == 2);
  CHECK(s->at(r.gauged.coordinates[1]).name == "g");

  // The induced local transformation: delta x = eps x, delta g = eps'.
  REQUIRE(r.delta.variations.size() == 2);
  CHECK(r.delta.variations[0].second == p("x*eps"));
  CHECK(r.delta.variations[1].second == p("eps'"));

  // The covariant derivative scales with unit charge under delta; the
  // invariance certificate for a one-charge scaling is the even-degree
  // balance of the gauged Lagrangian, checked above through the residual.
  CHECK(apply_variation(r.covariant_derivatives[0], r.delta) ==
        p("eps") * r.covariant_derivatives[0]);
}

TEST_CASE("gauge coordinate naming avoids collisions") {
  auto s = std::make_shared<Symbols>();
  ModelSpec m;
  m.syms = s;
  m.name = "collide";
  m.coordinates.push_back(s->intern(AtomKind::coordinate, "x"));
  m.coordinates.push_back(s->intern(AtomKind::coordinate, "g"));
  s->intern(AtomKind::momentum, "p_x");
  s->intern(AtomKind::momentum, "p_g");
  m.lagrangian = parse_expression(s, "x'^2/2 + g'^2/2");

  LieGroupAction a;
  a.name = "u1";
  a.kind = ActionKind::phase;
  a.params = {"eps"};
  a.sector = {m.coordinates[0]};
  // "g" is taken by a model coordinate; the gauge variable becomes g[1].
  GaugeResult r = gauge_lagrangian(m, a);
  REQUIRE(r.gauge_coordinates.size() == 1);
  CHECK(r.gauge_coordinates[0] == "g[1]");

  // With g[1] taken as well there is no name left.
  ModelSpec m2 = m;
  m2.coordinates.push_back(s->intern(AtomKind::coordinate, "g[1]"));
  s->intern(AtomKind::momentum, "p_g[1]");
  m2.lagrangian = parse_expression(s, "x'^2/2 + g'^2/2 + g[1]'^2/2");
  CHECK_THROWS_AS(gauge_lagrangian(m2, a), model_error);
}

TEST_CASE("local structure equivalence finds the coupling witness") {
  ModelFile m1 = load_model_file(kModels + "/dsr_plain.model");
  ModelFile m2 = load_model_file(kModels + "/dsr_coupled.model", m1.model.syms);
  EquivalenceReport er =
      local_structure_equiv(m1.model.lagrangian, m1.transformations.front(),
                            m2.model.lagrangian, m2.transformations.front());
  CHECK(er.equivalent);
  REQUIRE(er.exactness.primitive.has_value());
  auto p = [&](const char* t) { return parse_expression(m1.model.syms, t); };
  CHECK(*er.exactness.primitive == p("xi*alpha*g - xi*alpha'/2"));
  CHECK(d_dtau(*er.exactness.primitive) == er.difference);
}

TEST_CASE("observables are checked against variations and surfaces") {
  ModelFile mf = load_model_file(kModels + "/spin.model");
  HamiltonianSystem hs = legendre(mf.model);
  stabilize(hs);
  classify(hs);
  auto p = [&](const char* t) { return parse_expression(hs.syms, t); };

  LocalTransformation t = as_transformation(fcc_generator(hs, 0, "eps"));
  Expr j3 = p("v[1]*p_v[2] - v[2]*p_v[1]");
  ObservableReport r = observable_check(j3, t);
  CHECK(r.invariant);
  CHECK(r.variation.is_zero());

  ConstraintSurface surf(hs.syms, hs.assumptions);
  for (const auto& c : hs.constraints) surf.add(c.expr);
  surf.complete();
  ObservableReport r2 = observable_check(p("g*phi*b^2"), t, &surf);
  REQUIRE(r2.surface_value.has_value());
  CHECK(*r2.surface_value == p("-2*a^4"));
}
