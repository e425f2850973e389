#pragma once
#include <cstdlib>
#include <random>
#include <string>
#include <vector>

#include "dforge/expr.hpp"

namespace dforge::testing {

inline unsigned test_seed() {
  if (const char* env = std::getenv("DIRAC_FORGE_SEED"))
    return static_cast<unsigned>(std::strtoul(env, nullptr, 10));
  return 20260814u;
}

// Random polynomial over the given atoms: up to max_terms monomials of
// total degree <= max_deg with small nonzero integer coefficients.
inline Expr random_poly(std::mt19937& rng, SymbolsPtr syms, const std::vector<AtomId>& atoms,
                        int max_terms, int max_deg) {
  std::uniform_int_distribution<int> terms(1, max_terms);
  std::uniform_int_distribution<int> deg(0, max_deg);
  std::uniform_int_distribution<int> coeff(-4, 4);
  std::uniform_int_distribution<std::size_t> pick(0, atoms.empty() ? 0 : atoms.size() - 1);
  Expr acc = Expr::zero(syms);
  int n = terms(rng);
  for (int t = 0; t < n; ++t) {
    int c = coeff(rng);
    if (c == 0) c = 1;
    Expr mono = Expr::integer(syms, c);
    int d = deg(rng);
    for (int k = 0; k < d && !atoms.empty(); ++k)
      mono = mono * Expr::atom(syms, atoms[pick(rng)]);
    acc = acc + mono;
  }
  return acc;
}

// Random nonzero polynomial.
inline Expr random_nonzero_poly(std::mt19937& rng, SymbolsPtr syms,
                                const std::vector<AtomId>& atoms, int max_terms, int max_deg) {
  for (int attempt = 0; attempt < 64; ++attempt) {
    Expr e = random_poly(rng, syms, atoms, max_terms, max_deg);
    if (!e.is_zero()) return e;
  }
  return Expr::one(syms);
}

}  // namespace dforge::testing
