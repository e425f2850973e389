#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <memory>

#include "dforge/dirac_chain.hpp"
#include "dforge/modelfile.hpp"
#include "doctest.h"

using namespace dforge;

namespace {

const std::string kModels = DFORGE_MODELS_DIR;

HamiltonianSystem analyzed(const std::string& file, ModelFile* out_mf = nullptr) {
  ModelFile mf = load_model_file(kModels + "/" + file);
  HamiltonianSystem hs = legendre(mf.model);
  stabilize(hs);
  classify(hs);
  if (out_mf) *out_mf = mf;
  return hs;
}

using Class = HamiltonianSystem::Constraint::Class;

}  // namespace

TEST_CASE("toy chain stabilizes in three first-class stages") {
  HamiltonianSystem hs = analyzed("toy.model");
  auto p = [&](const char* t) { return parse_expression(hs.syms, t); };

  REQUIRE(hs.constraints.size() == 3);
  CHECK(hs.constraints[0].expr == p("p_z"));
  CHECK(hs.constraints[1].expr == p("p_y"));
  CHECK(hs.constraints[2].expr == p("p_x"));
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(hs.constraints[i].stage == int(i) + 1);
    CHECK(hs.constraints[i].cls == Class::first);
    CHECK(hs.constraints[i].label == "C" + std::to_string(i + 1));
  }
  REQUIRE(hs.multipliers.size() == 1);
  CHECK_FALSE(hs.multipliers[0].determined);
  CHECK(hs.first_class_combinations.size() == 3);
}

TEST_CASE("inconsistent dynamics is refused") {
  ModelSpec m;
  m.syms = std::make_shared<Symbols>();
  m.name = "bad";
  m.coordinates.push_back(m.syms->intern(AtomKind::coordinate, "x"));
  m.coordinates.push_back(m.syms->intern(AtomKind::coordinate, "y"));
  m.syms->intern(AtomKind::momentum, "p_x");
  m.syms->intern(AtomKind::momentum, "p_y");
  // E_y demands 0 = 1: the stability of p_y produces a nonzero constant.
  m.lagrangian = parse_expression(m.syms, "x'^2/2 + y");
  HamiltonianSystem hs = legendre(m);
  CHECK_THROWS_AS(stabilize(hs), analysis_error);
}

TEST_CASE("spin chain: stages, determination, classes, kernel") {
  HamiltonianSystem hs = analyzed("spin.model");
  auto p = [&](const char* t) { return parse_expression(hs.syms, t); };

  REQUIRE(hs.constraints.size() == 6);
  CHECK(hs.constraints[0].expr == p("p_g"));
  CHECK(hs.constraints[1].expr == p("p_phi"));
  CHECK(hs.constraints[2].expr ==
        p("a^2*(p_v[1]^2 + p_v[2]^2 + p_v[3]^2) - b^2"));
  CHECK(hs.constraints[3].expr == p("v[1]^2 + v[2]^2 + v[3]^2 - a^2"));
  CHECK(hs.constraints[4].expr == p("v[1]*p_v[1] + v[2]*p_v[2] + v[3]*p_v[3]"));
  CHECK(hs.constraints[5].expr == p("g*phi*b^2 + 2*a^4"));

  const Class expect[6] = {Class::first, Class::second, Class::first,
                           Class::second, Class::second, Class::second};
  for (int i = 0; i < 6; ++i) CHECK(hs.constraints[i].cls == expect[i]);

  // lambda_phi is determined in terms of the free lambda_g.
  REQUIRE(hs.multipliers.size() == 2);
  CHECK_FALSE(hs.multipliers[0].determined);
  CHECK(hs.multipliers[1].determined);
  CHECK(hs.multipliers[1].value == p("-phi*lambda_g/g"));

  // Kernel combinations pair each first-class label with its partner.
  REQUIRE(hs.first_class_combinations.size() == 2);
  CHECK(hs.first_class_combinations[0][0] == p("1"));
  CHECK(hs.first_class_combinations[0][1] == p("-phi/g"));
  CHECK(hs.first_class_combinations[1][2] == p("1"));
  CHECK(hs.first_class_combinations[1][3] == p("b^2/a^2"));
}

TEST_CASE("gauge fixing the spin einbein") {
  HamiltonianSystem hs = analyzed("spin.model");
  auto p = [&](const char* t) { return parse_expression(hs.syms, t); };

  GaugeFixResult r = fix_gauge(hs, {{"g1", p("g - 1")}});

  REQUIRE(r.eliminations.size() == 4);
  CHECK(r.eliminations[0].first == "g");
  CHECK(r.eliminations[0].second == p("1"));
  CHECK(r.eliminations[1].first == "p_g");
  CHECK(r.eliminations[1].second.is_zero());
  CHECK(r.eliminations[2].first == "p_phi");
  CHECK(r.eliminations[2].second.is_zero());
  CHECK(r.eliminations[3].first == "phi");
  CHECK(r.eliminations[3].second == p("-2*a^4/b^2"));

  // Only the three v-pairs survive.
  REQUIRE(r.remaining_pairs.size() == 3);
  REQUIRE(r.remaining.size() == 3);
  CHECK(r.remaining[0].expr == p("a^2*(p_v[1]^2 + p_v[2]^2 + p_v[3]^2) - b^2"));
  CHECK(r.remaining[0].cls == Class::first);
  CHECK(r.remaining[1].expr == p("v[1]^2 + v[2]^2 + v[3]^2 - a^2"));
  CHECK(r.remaining[2].expr == p("v[1]*p_v[1] + v[2]*p_v[2] + v[3]*p_v[3]"));
  CHECK(r.derived_relations.size() == r.remaining.size());
}

TEST_CASE("gauge fixing keeps an unsolvable partner as a relation") {
  HamiltonianSystem hs = analyzed("dsr_coupled.model");
  auto p = [&](const char* t) { return parse_expression(hs.syms, t); };

  GaugeFixResult r =
      fix_gauge(hs, {{"ms", p("p_x[4] + m*c*(1 + xi*p_x[0])")}});

  REQUIRE(r.eliminations.size() == 1);
  CHECK(r.eliminations[0].first == "p_x[4]");
  CHECK(r.eliminations[0].second == p("-m*c*(1 + xi*p_x[0])"));

  // No canonical pair is complete, so all six survive.
  CHECK(r.remaining_pairs.size() == 6);
  REQUIRE(r.remaining.size() == 3);
  CHECK(r.remaining[0].expr == p("p_g"));
  CHECK(r.remaining[1].cls == Class::second);  // partnered with the gauge
  CHECK(r.remaining[2].expr ==
        p("p_x[0]^2 - p_x[1]^2 - p_x[2]^2 - p_x[3]^2 - m^2*c^2*(1 + xi*p_x[0])^2"));
  CHECK(r.remaining[2].cls == Class::first);
}

TEST_CASE("ambiguous and unpaired gauges are rejected") {
  HamiltonianSystem hs = analyzed("spin.model");
  auto p = [&](const char* t) { return parse_expression(hs.syms, t); };
  // A constant bracket partner with two first-class constraints at once does
  // not exist here, but a gauge commuting with everything has no partner.
  CHECK_THROWS_AS(fix_gauge(hs, {{"bad", p("a - 1")}}), analysis_error);
}

TEST_CASE("first-class combinations generate local variations") {
  HamiltonianSystem hs = analyzed("toy.model");
  auto p = [&](const char* t) { return parse_expression(hs.syms, t); };

  // G = C1 = p_z generates delta z = eps, everything else fixed.
  GeneratedVariation v = fcc_generator(hs, 0, "eps");
  CHECK(v.generator == p("p_z"));
  CHECK(v.gauge_function == "eps");
  bool saw_z = false;
  for (const auto& [atom, delta] : v.variations) {
    if (hs.syms->at(atom).name == "z") {
      saw_z = true;
      CHECK(delta == p("eps"));
    } else {
      CHECK(delta.is_zero());
    }
  }
  CHECK(saw_z);
}
