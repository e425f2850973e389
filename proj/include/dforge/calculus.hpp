#pragma once
#include <optional>
#include <utility>
#include <vector>

#include "dforge/expr.hpp"

namespace dforge {

// Partial derivative with respect to one atom (quotient rule at the
// fraction level; all other atoms held fixed).
Expr differentiate(const Expr& e, AtomId a);

// Total derivative along the evolution parameter. Coordinates map to their
// first derivative atoms, jets shift up one order, tau maps to one,
// parameters to zero. Momentum and multiplier atoms have no prescribed
// evolution here and are rejected.
Expr d_dtau(const Expr& e);

// Canonical Poisson bracket over the supplied (q, p) pairs. Multipliers,
// parameters and tau ride along as constants; velocity atoms are rejected
// because the bracket lives on phase space.
Expr poisson(const Expr& f, const Expr& g,
             const std::vector<std::pair<AtomId, AtomId>>& pairs);

// Substitute value for every occurrence of atom a (exact, via Horner on
// numerator and denominator). Throws kernel_error when the substituted
// denominator vanishes identically.
Expr substitute_atom(const Expr& e, AtomId a, const Expr& value);

// Sequential substitution in list order.
Expr substitute(const Expr& e, const std::vector<std::pair<AtomId, Expr>>& subs);

// Rewrite atom^power -> value inside every monomial: an exponent e becomes
// atom^(e mod power) * value^(e div power). Used for bindings like
// b^2 = 3*hbar^2/4 that eliminate even powers only.
Expr apply_power_substitution(const Expr& e, AtomId atom, int power, const Expr& value);

// Euler operator for the dependent family `name` of base kind `kind`
// (coordinate or gauge_function): sum_k (-1)^k (d/dtau)^k of d e / d a^(k).
Expr euler_operator(const Expr& e, const std::string& name, AtomKind kind);

// Dependent families (coordinates and gauge functions, with their jets)
// appearing in e, sorted by atom order of the base.
std::vector<std::pair<std::string, AtomKind>> dependent_families(const Expr& e);

struct ExactnessResult {
  bool is_exact = false;               // all Euler residuals vanish
  std::optional<Expr> primitive;       // F with dF/dtau == e, when found
  std::vector<std::pair<std::string, Expr>> residuals;  // family -> residual
  std::string note;                    // obstruction diagnostics
};

// Decide whether e is a total tau-derivative of a rational expression, and
// reconstruct a primitive when one exists in the rational field. A zero
// residual with no primitive (logarithmic obstruction) is reported as exact
// with an explanatory note and no certificate.
ExactnessResult exact_total_derivative(const Expr& e);

}  // namespace dforge
