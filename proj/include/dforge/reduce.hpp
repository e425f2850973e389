#pragma once
#include <string>
#include <vector>

#include "dforge/assumptions.hpp"
#include "dforge/calculus.hpp"

namespace dforge {

// One oriented rewrite rule coeff * pivot -> rhs, extracted from a
// constraint coeff * pivot - rhs = 0. The pivot is the leading monomial in
// the phase-space atoms (coordinates and momenta); the coefficient collects
// everything multiplying it (parameters, multipliers, tau) and must be
// assured nonzero so the rule is sound as a rewrite.
struct ReductionRule {
  Monomial pivot;
  Expr coeff;
  Expr rhs;
  Expr constraint;
};

// A constraint surface with a bounded completion so that the induced
// rewriting recognises the consequences the analysis actually needs, without
// pretending to decide full ideal membership. Determinism: rules are kept in
// insertion order and completion scans pairs in a fixed order.
class ConstraintSurface {
 public:
  ConstraintSurface(SymbolsPtr syms, AssumptionSet assume);

  // Normalize a constraint and install its rewrite rule. Throws
  // analysis_error when no assured-invertible leading coefficient exists.
  void add(const Expr& constraint);

  // Pairwise S-polynomial completion, bounded; safe to call repeatedly.
  void complete();

  // Rewrite to a normal form modulo the surface (numerator and denominator
  // separately, iterated to a fixed point).
  Expr reduce(const Expr& e) const;

  const std::vector<ReductionRule>& rules() const { return rules_; }
  const AssumptionSet& assumptions() const { return assume_; }

 private:
  Expr reduce_once(const Expr& e) const;
  bool try_add_rule(const Expr& normalized);
  SymbolsPtr syms_;
  AssumptionSet assume_;
  std::vector<ReductionRule> rules_;
};

// Clear assured denominators and strip assured monomial factors and rational
// content from a constraint, then scale the leading coefficient to one when
// it is rational. The result generates the same locus under the assumptions.
Expr normalize_constraint(const Expr& c, const AssumptionSet& assume);

// Convenience wrapper: reduce e modulo the given constraints.
Expr reduce_mod(const Expr& e, const std::vector<Expr>& constraints,
                const AssumptionSet& assume);

}  // namespace dforge
