#pragma once
#include "dforge/mechmodel.hpp"

namespace dforge {

struct ChainReport {
  std::vector<std::string> log;  // one line per processed consistency condition
  int rounds = 0;
};

// Dirac-Bergmann stabilization: demand each constraint be preserved by the
// total Hamiltonian flow; conditions either close on the surface, determine
// a multiplier, or append a new constraint one stage deeper. Terminates with
// a re-checked closure certificate or throws analysis_error.
ChainReport stabilize(HamiltonianSystem& hs);

// Split the stabilized constraint set into first and second class via the
// left kernel of the mutual bracket matrix over the function field, reduced
// on the surface. Kernel pivots mark the first-class labels and the kernel
// vectors themselves are stored as the first-class combinations.
void classify(HamiltonianSystem& hs);

struct GaugeFixResult {
  std::vector<HamiltonianSystem::Constraint> remaining;
  std::vector<std::pair<AtomId, AtomId>> remaining_pairs;
  std::vector<std::pair<std::string, Expr>> eliminations;  // atom -> solved value
  std::vector<Expr> derived_relations;  // surviving constraints, substituted
  std::vector<std::string> log;
};

// Impose gauge conditions on a classified system. Each gauge must pair with
// exactly one first-class constraint through a nonvanishing reduced bracket.
// Canonical pairs whose coordinate and momentum are both solved are
// eliminated from the reduced phase space.
GaugeFixResult fix_gauge(const HamiltonianSystem& hs,
                         const std::vector<std::pair<std::string, Expr>>& gauges);

// Variation generated by the first-class combination with the given index:
// delta z = eps {z, G}, reported per phase-space atom, linear in the fresh
// gauge function named eps_name.
struct GeneratedVariation {
  std::vector<std::pair<AtomId, Expr>> variations;
  Expr generator;           // G = sum of kernel coefficients times constraints
  std::string gauge_function;
};
GeneratedVariation fcc_generator(const HamiltonianSystem& hs, std::size_t combination_index,
                                 const std::string& eps_name);

}  // namespace dforge
