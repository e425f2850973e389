#pragma once
#include <gmpxx.h>

#include <optional>
#include <string>
#include <string_view>

#include "dforge/poly.hpp"

namespace dforge {

// Exact rational function in the atoms of a shared symbol table. Canonical
// form: num/den with gcd(num, den) = 1 (integer content included) and the
// leading coefficient of den positive; zero is 0/1. Equality of canonical
// forms is therefore structural equality.
class Expr {
 public:
  Expr() = default;  // empty handle; usable only for assignment

  static Expr zero(SymbolsPtr s);
  static Expr one(SymbolsPtr s);
  static Expr integer(SymbolsPtr s, long v);
  static Expr integer(SymbolsPtr s, const mpz_class& v);
  static Expr rational(SymbolsPtr s, const mpq_class& v);
  static Expr atom(SymbolsPtr s, AtomId a);
  static Expr from_poly(SymbolsPtr s, Poly p);
  static Expr fraction(SymbolsPtr s, Poly num, Poly den);  // canonicalizes

  const SymbolsPtr& symbols() const { return syms_; }
  const Poly& num() const { return num_; }
  const Poly& den() const { return den_; }

  bool is_zero() const { return num_.is_zero(); }
  bool is_rational() const { return num_.is_constant() && den_.is_constant(); }
  std::optional<mpq_class> as_rational() const;

  bool contains(AtomId a) const { return poly_contains(num_, a) || poly_contains(den_, a); }
  void collect_atoms(std::vector<AtomId>& out) const;
  std::vector<AtomId> atoms() const;

  Expr operator-() const;
  Expr operator+(const Expr& o) const;
  Expr operator-(const Expr& o) const;
  Expr operator*(const Expr& o) const;
  Expr operator/(const Expr& o) const;  // kernel_error on division by zero
  Expr pow(int n) const;                // negative exponents allowed

  friend bool operator==(const Expr& a, const Expr& b) {
    return poly_equal(a.num_, b.num_) && poly_equal(a.den_, b.den_);
  }
  friend bool operator!=(const Expr& a, const Expr& b) { return !(a == b); }

  // Deterministic total order on canonical forms (numerator first).
  static int cmp(const Expr& a, const Expr& b);

  // Canonical printable form; parsing it back yields an equal Expr.
  std::string str() const;

 private:
  Expr(SymbolsPtr s, Poly n, Poly d) : syms_(std::move(s)), num_(std::move(n)), den_(std::move(d)) {}
  static Expr make(SymbolsPtr s, Poly num, Poly den);

  SymbolsPtr syms_;
  Poly num_;
  Poly den_ = poly_const(1);
};

// Parse the expression grammar: + - * / ^ with usual precedence, unary minus,
// integer literals, parentheses, identifiers with optional [index] suffix and
// derivative markers (primes, or trailing dot/ddot aliases). All names must
// resolve against the symbol table; derivative atoms of declared coordinates
// and gauge functions are interned on demand.
Expr parse_expression(SymbolsPtr syms, std::string_view text);

}  // namespace dforge
