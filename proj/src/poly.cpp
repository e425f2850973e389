#include "dforge/poly.hpp"

#include <algorithm>
#include <sstream>

namespace dforge {

bool mono_equal(const Monomial& a, const Monomial& b) { return a.f == b.f; }

int mono_cmp(const Symbols& s, const Monomial& a, const Monomial& b) {
  if (a.deg != b.deg) return a.deg < b.deg ? -1 : 1;
  std::size_t i = 0, j = 0;
  while (i < a.f.size() && j < b.f.size()) {
    int c = s.compare(a.f[i].first, b.f[j].first);
    if (c < 0) return 1;   // a holds a factor on the smaller atom: a is larger
    if (c > 0) return -1;
    if (a.f[i].second != b.f[j].second)
      return a.f[i].second > b.f[j].second ? 1 : -1;
    ++i;
    ++j;
  }
  if (i < a.f.size()) return 1;
  if (j < b.f.size()) return -1;
  return 0;
}

Monomial mono_mul(const Symbols& s, const Monomial& a, const Monomial& b) {
  Monomial r;
  r.deg = a.deg + b.deg;
  r.f.reserve(a.f.size() + b.f.size());
  std::size_t i = 0, j = 0;
  while (i < a.f.size() && j < b.f.size()) {
    int c = s.compare(a.f[i].first, b.f[j].first);
    if (c < 0) {
      r.f.push_back(a.f[i++]);
    } else if (c > 0) {
      r.f.push_back(b.f[j++]);
    } else {
      int e = a.f[i].second + b.f[j].second;
      if (e != 0) r.f.emplace_back(a.f[i].first, e);
      ++i;
      ++j;
    }
  }
  while (i < a.f.size()) r.f.push_back(a.f[i++]);
  while (j < b.f.size()) r.f.push_back(b.f[j++]);
  return r;
}

bool mono_divides(const Monomial& a, const Monomial& b) {
  std::size_t j = 0;
  for (const auto& [atom, exp] : a.f) {
    while (j < b.f.size() && b.f[j].first != atom) ++j;
    if (j == b.f.size() || b.f[j].second < exp) return false;
  }
  return true;
}

Monomial mono_div(const Symbols& s, const Monomial& b, const Monomial& a) {
  Monomial inv;
  inv.deg = -a.deg;
  inv.f.reserve(a.f.size());
  for (const auto& [atom, exp] : a.f) inv.f.emplace_back(atom, -exp);
  return mono_mul(s, b, inv);
}

Monomial mono_gcd(const Symbols& s, const Monomial& a, const Monomial& b) {
  Monomial r;
  std::size_t i = 0, j = 0;
  while (i < a.f.size() && j < b.f.size()) {
    int c = s.compare(a.f[i].first, b.f[j].first);
    if (c < 0) ++i;
    else if (c > 0) ++j;
    else {
      int e = std::min(a.f[i].second, b.f[j].second);
      if (e > 0) {
        r.f.emplace_back(a.f[i].first, e);
        r.deg += e;
      }
      ++i; ++j;
    }
  }
  return r;
}

Monomial mono_lcm(const Symbols& s, const Monomial& a, const Monomial& b) {
  return mono_mul(s, b, mono_div(s, a, mono_gcd(s, a, b)));
}

int mono_exponent(const Monomial& m, AtomId a) {
  for (const auto& [atom, exp] : m.f)
    if (atom == a) return exp;
  return 0;
}

Poly poly_zero() { return Poly{}; }

Poly poly_const(const mpz_class& c) {
  Poly p;
  if (c != 0) p.t.emplace_back(Monomial{}, c);
  return p;
}

Poly poly_atom(AtomId a, int exp) {
  if (exp < 0) throw kernel_error("poly_atom: negative exponent");
  Poly p;
  if (exp == 0) return poly_const(1);
  Monomial m;
  m.f.emplace_back(a, exp);
  m.deg = exp;
  p.t.emplace_back(std::move(m), mpz_class(1));
  return p;
}

Poly poly_normalize(const Symbols& s, std::vector<std::pair<Monomial, mpz_class>> terms) {
  std::sort(terms.begin(), terms.end(), [&](const auto& x, const auto& y) {
    return mono_cmp(s, x.first, y.first) > 0;
  });
  Poly p;
  for (auto& [m, c] : terms) {
    if (c == 0) continue;
    if (!p.t.empty() && mono_equal(p.t.back().first, m)) {
      p.t.back().second += c;
      if (p.t.back().second == 0) p.t.pop_back();
    } else {
      p.t.emplace_back(std::move(m), std::move(c));
    }
  }
  return p;
}

Poly poly_add(const Symbols& s, const Poly& a, const Poly& b) {
  Poly r;
  r.t.reserve(a.t.size() + b.t.size());
  std::size_t i = 0, j = 0;
  while (i < a.t.size() && j < b.t.size()) {
    int c = mono_cmp(s, a.t[i].first, b.t[j].first);
    if (c > 0) {
      r.t.push_back(a.t[i++]);
    } else if (c < 0) {
      r.t.push_back(b.t[j++]);
    } else {
      mpz_class v = a.t[i].second + b.t[j].second;
      if (v != 0) r.t.emplace_back(a.t[i].first, std::move(v));
      ++i;
      ++j;
    }
  }
  while (i < a.t.size()) r.t.push_back(a.t[i++]);
  while (j < b.t.size()) r.t.push_back(b.t[j++]);
  return r;
}

Poly poly_neg(const Poly& a) {
  Poly r = a;
  for (auto& [m, c] : r.t) c = -c;
  return r;
}

Poly poly_sub(const Symbols& s, const Poly& a, const Poly& b) {
  return poly_add(s, a, poly_neg(b));
}

Poly poly_mul_term(const Symbols& s, const Poly& a, const Monomial& m, const mpz_class& c) {
  if (c == 0) return poly_zero();
  Poly r;
  r.t.reserve(a.t.size());
  for (const auto& [am, ac] : a.t) r.t.emplace_back(mono_mul(s, am, m), ac * c);
  // multiplying by a fixed monomial preserves the strict term order
  return r;
}

Poly poly_mul(const Symbols& s, const Poly& a, const Poly& b) {
  if (a.is_zero() || b.is_zero()) return poly_zero();
  std::vector<std::pair<Monomial, mpz_class>> acc;
  acc.reserve(a.t.size() * b.t.size());
  for (const auto& [am, ac] : a.t)
    for (const auto& [bm, bc] : b.t) acc.emplace_back(mono_mul(s, am, bm), ac * bc);
  return poly_normalize(s, std::move(acc));
}

Poly poly_pow(const Symbols& s, const Poly& a, unsigned n) {
  Poly r = poly_const(1);
  Poly base = a;
  while (n) {
    if (n & 1u) r = poly_mul(s, r, base);
    n >>= 1u;
    if (n) base = poly_mul(s, base, base);
  }
  return r;
}

bool poly_equal(const Poly& a, const Poly& b) {
  if (a.t.size() != b.t.size()) return false;
  for (std::size_t i = 0; i < a.t.size(); ++i)
    if (a.t[i].second != b.t[i].second || !mono_equal(a.t[i].first, b.t[i].first)) return false;
  return true;
}

int poly_cmp(const Symbols& s, const Poly& a, const Poly& b) {
  std::size_t n = std::min(a.t.size(), b.t.size());
  for (std::size_t i = 0; i < n; ++i) {
    int c = mono_cmp(s, a.t[i].first, b.t[i].first);
    if (c != 0) return c;
    int cc = cmp(a.t[i].second, b.t[i].second);
    if (cc != 0) return cc < 0 ? -1 : 1;
  }
  if (a.t.size() != b.t.size()) return a.t.size() < b.t.size() ? -1 : 1;
  return 0;
}

Poly poly_derivative(const Symbols& s, const Poly& p, AtomId a) {
  std::vector<std::pair<Monomial, mpz_class>> acc;
  for (const auto& [m, c] : p.t) {
    int e = mono_exponent(m, a);
    if (e == 0) continue;
    Monomial dm;
    dm.deg = m.deg - 1;
    for (const auto& [atom, exp] : m.f) {
      int ne = (atom == a) ? exp - 1 : exp;
      if (ne != 0) dm.f.emplace_back(atom, ne);
    }
    acc.emplace_back(std::move(dm), c * e);
  }
  return poly_normalize(s, std::move(acc));
}

int poly_degree_in(const Poly& p, AtomId a) {
  int d = 0;
  for (const auto& [m, c] : p.t) d = std::max(d, mono_exponent(m, a));
  return d;
}

bool poly_contains(const Poly& p, AtomId a) {
  for (const auto& [m, c] : p.t)
    for (const auto& [atom, exp] : m.f)
      if (atom == a) return true;
  return false;
}

void poly_collect_atoms(const Poly& p, std::vector<AtomId>& out) {
  for (const auto& [m, c] : p.t)
    for (const auto& [atom, exp] : m.f)
      if (std::find(out.begin(), out.end(), atom) == out.end()) out.push_back(atom);
}

mpz_class poly_content(const Poly& p) {
  mpz_class g = 0;
  for (const auto& [m, c] : p.t) {
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), c.get_mpz_t());
    if (g == 1) break;
  }
  return g;
}

std::optional<Poly> poly_divexact(const Symbols& s, const Poly& a, const Poly& b) {
  if (b.is_zero()) return std::nullopt;
  Poly r = a;
  Poly q;
  while (!r.is_zero()) {
    const auto& [rm, rc] = r.t.front();
    const auto& [bm, bc] = b.t.front();
    if (!mono_divides(bm, rm)) return std::nullopt;
    mpz_class qc;
    if (!mpz_divisible_p(rc.get_mpz_t(), bc.get_mpz_t())) return std::nullopt;
    qc = rc / bc;
    Monomial qm = mono_div(s, rm, bm);
    q.t.emplace_back(qm, qc);
    r = poly_sub(s, r, poly_mul_term(s, b, qm, qc));
  }
  return poly_normalize(s, std::move(q.t));
}

Poly poly_coeff_in(const Symbols& s, const Poly& p, AtomId x, int k) {
  std::vector<std::pair<Monomial, mpz_class>> acc;
  for (const auto& [m, c] : p.t) {
    if (mono_exponent(m, x) != k) continue;
    Monomial rm;
    for (const auto& [atom, exp] : m.f)
      if (atom != x) {
        rm.f.emplace_back(atom, exp);
        rm.deg += exp;
      }
    acc.emplace_back(std::move(rm), c);
  }
  return poly_normalize(s, std::move(acc));
}

namespace {

Poly sign_normalize(const Poly& p) {
  if (!p.is_zero() && p.t.front().second < 0) return poly_neg(p);
  return p;
}

Poly divide_content(const Poly& p, const mpz_class& c) {
  Poly r = p;
  for (auto& [m, v] : r.t) v /= c;
  return r;
}

// Content of p viewed as univariate in x: gcd of the coefficient polys.
Poly content_in(const Symbols& s, const Poly& p, AtomId x) {
  int d = poly_degree_in(p, x);
  Poly g = poly_zero();
  for (int k = 0; k <= d; ++k) {
    Poly ck = poly_coeff_in(s, p, x, k);
    if (ck.is_zero()) continue;
    g = poly_gcd(s, g, ck);
    if (g.is_constant() && !g.is_zero() && g.t.front().second == 1) break;
  }
  return g;
}

// Pseudo-remainder of a by b in x (both with deg_x(a) >= deg_x(b) > 0).
Poly pseudo_rem(const Symbols& s, Poly a, const Poly& b, AtomId x) {
  int db = poly_degree_in(b, x);
  Poly lcb = poly_coeff_in(s, b, x, db);
  while (!a.is_zero()) {
    int da = poly_degree_in(a, x);
    if (da < db) break;
    Poly lca = poly_coeff_in(s, a, x, da);
    // lcb*a - lca*x^(da-db)*b kills the leading x-term
    Poly shift = poly_mul(s, lca, poly_atom(x, da - db));
    a = poly_sub(s, poly_mul(s, lcb, a), poly_mul(s, shift, b));
  }
  return a;
}

}  // namespace

Poly poly_gcd(const Symbols& s, Poly a, Poly b) {
  if (a.is_zero()) return sign_normalize(b);
  if (b.is_zero()) return sign_normalize(a);
  mpz_class ca = poly_content(a);
  mpz_class cb = poly_content(b);
  mpz_class c;
  mpz_gcd(c.get_mpz_t(), ca.get_mpz_t(), cb.get_mpz_t());
  a = divide_content(a, ca);
  b = divide_content(b, cb);
  if (a.is_constant() || b.is_constant()) return poly_const(c);

  // Main variable: the largest atom present in either operand.
  std::vector<AtomId> atoms;
  poly_collect_atoms(a, atoms);
  poly_collect_atoms(b, atoms);
  AtomId x = atoms.front();
  for (AtomId id : atoms)
    if (s.compare(id, x) > 0) x = id;

  if (!poly_contains(a, x)) {
    Poly g = poly_gcd(s, a, content_in(s, b, x));
    return sign_normalize(poly_mul(s, poly_const(c), g));
  }
  if (!poly_contains(b, x)) {
    Poly g = poly_gcd(s, content_in(s, a, x), b);
    return sign_normalize(poly_mul(s, poly_const(c), g));
  }

  Poly conta = content_in(s, a, x);
  Poly contb = content_in(s, b, x);
  Poly gcont = poly_gcd(s, conta, contb);
  Poly pa = *poly_divexact(s, a, conta);
  Poly pb = *poly_divexact(s, b, contb);
  if (poly_degree_in(pa, x) < poly_degree_in(pb, x)) std::swap(pa, pb);
  while (!pb.is_zero()) {
    Poly r = pseudo_rem(s, pa, pb, x);
    pa = std::move(pb);
    if (r.is_zero()) {
      pb = poly_zero();
    } else {
      mpz_class rc = poly_content(r);
      r = divide_content(r, rc);
      Poly rcont = content_in(s, r, x);
      pb = *poly_divexact(s, r, rcont);
    }
  }
  // pa is a gcd of the primitive parts up to content in x; strip it.
  mpz_class pac = poly_content(pa);
  pa = divide_content(pa, pac);
  Poly pacont = content_in(s, pa, x);
  pa = *poly_divexact(s, pa, pacont);
  Poly g = poly_mul(s, poly_const(c), poly_mul(s, gcont, pa));
  return sign_normalize(g);
}

std::string poly_str(const Symbols& s, const Poly& p) {
  if (p.is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [m, c] : p.t) {
    mpz_class ac = abs(c);
    if (first) {
      if (c < 0) os << '-';
      first = false;
    } else {
      os << (c < 0 ? " - " : " + ");
    }
    if (m.f.empty()) {
      os << ac.get_str();
      continue;
    }
    bool printed = false;
    if (ac != 1) {
      os << ac.get_str();
      printed = true;
    }
    for (const auto& [atom, exp] : m.f) {
      if (printed) os << '*';
      os << s.display(atom);
      if (exp != 1) os << '^' << exp;
      printed = true;
    }
  }
  return os.str();
}

}  // namespace dforge
