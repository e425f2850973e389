#pragma once
#include <string>
#include <vector>

#include "dforge/reduce.hpp"

namespace dforge {

struct ModelSpec {
  SymbolsPtr syms;
  std::string name;
  std::vector<AtomId> coordinates;  // declared order
  Expr lagrangian;
  AssumptionSet assumptions;
  std::vector<int> metric_signature;  // optional, informational
};

// Euler-Lagrange residuals E_A = dL/dq^A - d/dtau dL/dv^A (extended to
// higher jets with alternating signs); one entry per coordinate.
std::vector<Expr> euler_lagrange(const ModelSpec& model);

struct HamiltonianSystem {
  SymbolsPtr syms;
  AssumptionSet assumptions;
  std::vector<std::pair<AtomId, AtomId>> pairs;  // canonical (q, p)
  Expr h0;                                       // canonical Hamiltonian

  struct Constraint {
    enum class Class { unknown, first, second };
    Expr expr;
    int stage = 1;        // 1 = primary
    std::string origin;
    Class cls = Class::unknown;
    std::string label;    // C1, C2, ...
  };
  std::vector<Constraint> constraints;

  struct Multiplier {
    AtomId atom;
    std::size_t primary_index;  // constraint this multiplier pairs with
    bool determined = false;
    Expr value;                 // set when determined (may involve free multipliers)
    std::string determined_by;
  };
  std::vector<Multiplier> multipliers;

  std::vector<std::pair<AtomId, Expr>> momentum_definitions;  // p_A = dL/dv^A
  std::vector<std::pair<AtomId, Expr>> solved_velocities;     // invertible block
  // Kernel combinations of the constraint bracket matrix, one per
  // first-class label; coefficients align with `constraints`.
  std::vector<std::vector<Expr>> first_class_combinations;

  // h0 + sum of multiplier atoms times their primary constraints.
  Expr total_hamiltonian() const;
  // Same with determined multiplier values substituted.
  Expr total_hamiltonian_effective() const;
};

// Singular Legendre transform. Throws model_error when the Lagrangian is
// not quadratic in the velocities or when invertibility of the kinetic
// block cannot be decided from the declared assumptions.
HamiltonianSystem legendre(const ModelSpec& model);

// Value of the Noether-type identity sum_{A,k} c_{A,k} (d/dtau)^k E_A for
// the given coefficient table; identically zero exactly when the
// coefficients encode a differential relation among the field equations.
struct IdentityCoefficient {
  std::size_t coordinate;  // index into model.coordinates
  int order;               // k
  Expr value;              // c_{A,k}
};
Expr noether_identity(const ModelSpec& model, const std::vector<IdentityCoefficient>& coeffs);

}  // namespace dforge
