#include "dforge/expr.hpp"

#include <sstream>

namespace dforge {

Expr Expr::make(SymbolsPtr s, Poly num, Poly den) {
  if (den.is_zero()) throw kernel_error("division by zero");
  if (num.is_zero()) return Expr(std::move(s), poly_zero(), poly_const(1));
  Poly g = poly_gcd(*s, num, den);
  if (!(g.is_constant() && g.t.front().second == 1)) {
    num = *poly_divexact(*s, num, g);
    den = *poly_divexact(*s, den, g);
  }
  if (den.t.front().second < 0) {
    num = poly_neg(num);
    den = poly_neg(den);
  }
  return Expr(std::move(s), std::move(num), std::move(den));
}

Expr Expr::zero(SymbolsPtr s) { return Expr(std::move(s), poly_zero(), poly_const(1)); }
Expr Expr::one(SymbolsPtr s) { return Expr(std::move(s), poly_const(1), poly_const(1)); }
Expr Expr::integer(SymbolsPtr s, long v) { return Expr(std::move(s), poly_const(mpz_class(v)), poly_const(1)); }
Expr Expr::integer(SymbolsPtr s, const mpz_class& v) { return Expr(std::move(s), poly_const(v), poly_const(1)); }

Expr Expr::rational(SymbolsPtr s, const mpq_class& v) {
  mpq_class c = v;
  c.canonicalize();
  return Expr(std::move(s), poly_const(c.get_num()), poly_const(c.get_den()));
}

Expr Expr::atom(SymbolsPtr s, AtomId a) { return Expr(std::move(s), poly_atom(a), poly_const(1)); }
Expr Expr::from_poly(SymbolsPtr s, Poly p) { return Expr(std::move(s), std::move(p), poly_const(1)); }
Expr Expr::fraction(SymbolsPtr s, Poly num, Poly den) { return make(std::move(s), std::move(num), std::move(den)); }

std::optional<mpq_class> Expr::as_rational() const {
  if (!is_rational()) return std::nullopt;
  mpz_class n = num_.is_zero() ? mpz_class(0) : num_.t.front().second;
  mpz_class d = den_.t.front().second;
  mpq_class q(n, d);
  q.canonicalize();
  return q;
}

void Expr::collect_atoms(std::vector<AtomId>& out) const {
  poly_collect_atoms(num_, out);
  poly_collect_atoms(den_, out);
}

std::vector<AtomId> Expr::atoms() const {
  std::vector<AtomId> out;
  collect_atoms(out);
  return out;
}

Expr Expr::operator-() const { return Expr(syms_, poly_neg(num_), den_); }

Expr Expr::operator+(const Expr& o) const {
  const Symbols& s = *syms_;
  if (poly_equal(den_, o.den_))
    return make(syms_, poly_add(s, num_, o.num_), den_);
  Poly n = poly_add(s, poly_mul(s, num_, o.den_), poly_mul(s, o.num_, den_));
  return make(syms_, std::move(n), poly_mul(s, den_, o.den_));
}

Expr Expr::operator-(const Expr& o) const { return *this + (-o); }

Expr Expr::operator*(const Expr& o) const {
  const Symbols& s = *syms_;
  return make(syms_, poly_mul(s, num_, o.num_), poly_mul(s, den_, o.den_));
}

Expr Expr::operator/(const Expr& o) const {
  if (o.is_zero()) throw kernel_error("division by zero");
  const Symbols& s = *syms_;
  return make(syms_, poly_mul(s, num_, o.den_), poly_mul(s, den_, o.num_));
}

Expr Expr::pow(int n) const {
  const Symbols& s = *syms_;
  if (n == 0) return one(syms_);
  if (n > 0)
    return make(syms_, poly_pow(s, num_, static_cast<unsigned>(n)),
                poly_pow(s, den_, static_cast<unsigned>(n)));
  if (is_zero()) throw kernel_error("zero raised to a negative power");
  return make(syms_, poly_pow(s, den_, static_cast<unsigned>(-n)),
              poly_pow(s, num_, static_cast<unsigned>(-n)));
}

int Expr::cmp(const Expr& a, const Expr& b) {
  int c = poly_cmp(*a.syms_, a.num_, b.num_);
  if (c != 0) return c;
  return poly_cmp(*a.syms_, a.den_, b.den_);
}

namespace {

// A denominator can drop its parentheses only when it is a single positive
// integer or a single bare atom; anything else would reassociate under the
// left-to-right parse of '*' and '/'.
bool den_needs_parens(const Poly& den) {
  if (den.t.size() != 1) return true;
  const auto& [m, c] = den.t.front();
  if (m.f.empty()) return c < 0;
  return !(c == 1 && m.f.size() == 1 && m.f[0].second == 1);
}

}  // namespace

std::string Expr::str() const {
  const Symbols& s = *syms_;
  if (den_.is_constant() && !den_.is_zero() && den_.t.front().second == 1)
    return poly_str(s, num_);
  std::ostringstream os;
  if (num_.t.size() > 1)
    os << '(' << poly_str(s, num_) << ')';
  else
    os << poly_str(s, num_);
  os << '/';
  if (den_needs_parens(den_))
    os << '(' << poly_str(s, den_) << ')';
  else
    os << poly_str(s, den_);
  return os.str();
}

}  // namespace dforge
