#pragma once
#include <gmpxx.h>

#include <utility>
#include <vector>

#include "dforge/atoms.hpp"

namespace dforge {

// Monomial: factors sorted ascending in the canonical atom order, exponents
// nonzero (negative exponents never appear here; rational structure lives in
// Expr). deg caches the signed total degree.
struct Monomial {
  std::vector<std::pair<AtomId, int>> f;
  int deg = 0;
};

bool mono_equal(const Monomial& a, const Monomial& b);
// Graded lexicographic order: total degree first; at equal degree scan the
// merged factor lists in ascending atom order and the monomial with the
// larger exponent on the first differing atom sorts larger.
int mono_cmp(const Symbols& s, const Monomial& a, const Monomial& b);
Monomial mono_mul(const Symbols& s, const Monomial& a, const Monomial& b);
bool mono_divides(const Monomial& a, const Monomial& b);  // a | b
Monomial mono_div(const Symbols& s, const Monomial& b, const Monomial& a);  // b / a
Monomial mono_gcd(const Symbols& s, const Monomial& a, const Monomial& b);
Monomial mono_lcm(const Symbols& s, const Monomial& a, const Monomial& b);
int mono_exponent(const Monomial& m, AtomId a);

// Sparse polynomial with integer coefficients: terms in strictly descending
// monomial order, coefficients nonzero.
struct Poly {
  std::vector<std::pair<Monomial, mpz_class>> t;
  bool is_zero() const { return t.empty(); }
  bool is_constant() const { return t.empty() || (t.size() == 1 && t[0].first.f.empty()); }
};

Poly poly_zero();
Poly poly_const(const mpz_class& c);
Poly poly_atom(AtomId a, int exp = 1);
Poly poly_normalize(const Symbols& s, std::vector<std::pair<Monomial, mpz_class>> terms);

Poly poly_add(const Symbols& s, const Poly& a, const Poly& b);
Poly poly_sub(const Symbols& s, const Poly& a, const Poly& b);
Poly poly_neg(const Poly& a);
Poly poly_mul(const Symbols& s, const Poly& a, const Poly& b);
Poly poly_mul_term(const Symbols& s, const Poly& a, const Monomial& m, const mpz_class& c);
Poly poly_pow(const Symbols& s, const Poly& a, unsigned n);

bool poly_equal(const Poly& a, const Poly& b);
// Total order on polynomials used for canonical sorting of expressions:
// term-by-term (monomial, then coefficient), longer poly wins ties.
int poly_cmp(const Symbols& s, const Poly& a, const Poly& b);

Poly poly_derivative(const Symbols& s, const Poly& p, AtomId a);
int poly_degree_in(const Poly& p, AtomId a);
bool poly_contains(const Poly& p, AtomId a);
void poly_collect_atoms(const Poly& p, std::vector<AtomId>& out);

// Positive gcd of all integer coefficients (0 for the zero poly).
mpz_class poly_content(const Poly& p);

// Exact division; nullopt when b does not divide a.
std::optional<Poly> poly_divexact(const Symbols& s, const Poly& a, const Poly& b);

// Multivariate gcd by primitive pseudo-remainder sequences; result has
// positive leading coefficient.
Poly poly_gcd(const Symbols& s, Poly a, Poly b);

// Coefficient of x^k when p is viewed as univariate in atom x.
Poly poly_coeff_in(const Symbols& s, const Poly& p, AtomId x, int k);

std::string poly_str(const Symbols& s, const Poly& p);

}  // namespace dforge
