#include "dforge/calculus.hpp"

#include <algorithm>
#include <map>

namespace dforge {

Expr differentiate(const Expr& e, AtomId a) {
  const SymbolsPtr& sp = e.symbols();
  const Symbols& s = *sp;
  Poly dn = poly_derivative(s, e.num(), a);
  Poly dd = poly_derivative(s, e.den(), a);
  if (dd.is_zero()) return Expr::fraction(sp, std::move(dn), e.den());
  Poly num = poly_sub(s, poly_mul(s, dn, e.den()), poly_mul(s, e.num(), dd));
  Poly den = poly_mul(s, e.den(), e.den());
  return Expr::fraction(sp, std::move(num), std::move(den));
}

Expr d_dtau(const Expr& e) {
  SymbolsPtr sp = e.symbols();
  Symbols& s = *sp;
  Expr acc = Expr::zero(sp);
  for (AtomId a : e.atoms()) {
    const Atom& at = s.at(a);
    switch (at.kind) {
      case AtomKind::coordinate:
      case AtomKind::derivative:
      case AtomKind::gauge_function: {
        Expr d = differentiate(e, a);
        if (!d.is_zero()) acc = acc + d * Expr::atom(sp, s.derivative_of(a));
        break;
      }
      case AtomKind::evolution:
        acc = acc + differentiate(e, a);
        break;
      case AtomKind::parameter:
        break;
      case AtomKind::momentum:
      case AtomKind::multiplier:
        throw kernel_error("d/dtau is undefined for " + std::string(kind_name(at.kind)) +
                           " atom '" + at.name + "'");
    }
  }
  return acc;
}

Expr poisson(const Expr& f, const Expr& g,
             const std::vector<std::pair<AtomId, AtomId>>& pairs) {
  const SymbolsPtr& sp = f.symbols();
  const Symbols& s = *sp;
  for (const Expr* e : {&f, &g})
    for (AtomId a : e->atoms())
      if (s.at(a).kind == AtomKind::derivative)
        throw kernel_error("Poisson bracket requires phase-space functions; found velocity atom '" +
                           s.display(a) + "'");
  Expr acc = Expr::zero(sp);
  for (const auto& [q, p] : pairs) {
    Expr t = differentiate(f, q) * differentiate(g, p) - differentiate(f, p) * differentiate(g, q);
    if (!t.is_zero()) acc = acc + t;
  }
  return acc;
}

Expr substitute_atom(const Expr& e, AtomId a, const Expr& value) {
  if (!e.contains(a)) return e;
  const SymbolsPtr& sp = e.symbols();
  const Symbols& s = *sp;
  auto horner = [&](const Poly& p) -> Expr {
    int d = poly_degree_in(p, a);
    Expr r = Expr::from_poly(sp, poly_coeff_in(s, p, a, d));
    for (int k = d - 1; k >= 0; --k)
      r = r * value + Expr::from_poly(sp, poly_coeff_in(s, p, a, k));
    return r;
  };
  Expr num = horner(e.num());
  Expr den = horner(e.den());
  if (den.is_zero())
    throw kernel_error("substitution for '" + s.display(a) + "' makes a denominator vanish");
  return num / den;
}

Expr substitute(const Expr& e, const std::vector<std::pair<AtomId, Expr>>& subs) {
  Expr r = e;
  for (const auto& [a, v] : subs) r = substitute_atom(r, a, v);
  return r;
}

Expr apply_power_substitution(const Expr& e, AtomId atom, int power, const Expr& value) {
  if (power < 1) throw kernel_error("substitution power must be positive");
  auto rewrite = [&](const Poly& p) {
    Expr acc = Expr::zero(e.symbols());
    for (const auto& [mono, coeff] : p.t) {
      Monomial rest;
      int q = 0;
      for (const auto& [a, exp] : mono.f) {
        int keep = exp;
        if (a == atom) {
          q = exp / power;
          keep = exp % power;
        }
        if (keep) {
          rest.f.emplace_back(a, keep);
          rest.deg += keep;
        }
      }
      Poly base;
      base.t.emplace_back(std::move(rest), coeff);
      acc = acc + Expr::from_poly(e.symbols(), std::move(base)) * value.pow(q);
    }
    return acc;
  };
  return rewrite(e.num()) / rewrite(e.den());
}

namespace {

std::optional<AtomId> family_jet(Symbols& s, const std::string& name, AtomKind kind, int k) {
  if (kind == AtomKind::coordinate)
    return k == 0 ? s.find(AtomKind::coordinate, name, 0) : s.find(AtomKind::derivative, name, k);
  return s.find(AtomKind::gauge_function, name, k);
}

AtomId family_jet_intern(Symbols& s, const std::string& name, AtomKind kind, int k) {
  if (kind == AtomKind::coordinate)
    return k == 0 ? s.intern(AtomKind::coordinate, name, 0) : s.intern(AtomKind::derivative, name, k);
  return s.intern(AtomKind::gauge_function, name, k);
}

int family_max_order(const Symbols& s, const Expr& e, const std::string& name, AtomKind kind) {
  int maxk = -1;
  for (AtomId a : e.atoms()) {
    const Atom& at = s.at(a);
    if (kind == AtomKind::coordinate) {
      if ((at.kind == AtomKind::coordinate || at.kind == AtomKind::derivative) && at.name == name)
        maxk = std::max(maxk, at.order);
    } else if (at.kind == AtomKind::gauge_function && at.name == name) {
      maxk = std::max(maxk, at.order);
    }
  }
  return maxk;
}

bool is_dependent(const Atom& a) {
  return a.kind == AtomKind::coordinate || a.kind == AtomKind::derivative ||
         a.kind == AtomKind::gauge_function;
}

}  // namespace

Expr euler_operator(const Expr& e, const std::string& name, AtomKind kind) {
  SymbolsPtr sp = e.symbols();
  Symbols& s = *sp;
  int maxk = family_max_order(s, e, name, kind);
  Expr acc = Expr::zero(sp);
  for (int k = 0; k <= maxk; ++k) {
    auto a = family_jet(s, name, kind, k);
    if (!a) continue;
    Expr d = differentiate(e, *a);
    if (d.is_zero()) continue;
    for (int j = 0; j < k; ++j) d = d_dtau(d);
    acc = (k % 2 == 0) ? acc + d : acc - d;
  }
  return acc;
}

std::vector<std::pair<std::string, AtomKind>> dependent_families(const Expr& e) {
  const Symbols& s = *e.symbols();
  std::vector<std::pair<std::string, AtomKind>> fams;
  for (AtomId a : e.atoms()) {
    const Atom& at = s.at(a);
    std::pair<std::string, AtomKind> key;
    if (at.kind == AtomKind::coordinate || at.kind == AtomKind::derivative)
      key = {at.name, AtomKind::coordinate};
    else if (at.kind == AtomKind::gauge_function)
      key = {at.name, AtomKind::gauge_function};
    else
      continue;
    if (std::find(fams.begin(), fams.end(), key) == fams.end()) fams.push_back(key);
  }
  std::sort(fams.begin(), fams.end(), [](const auto& x, const auto& y) {
    if (x.second != y.second) return static_cast<int>(x.second) < static_cast<int>(y.second);
    return x.first < y.first;
  });
  return fams;
}

namespace {

int monomial_dependent_degree(const Symbols& s, const Monomial& m) {
  int d = 0;
  for (const auto& [atom, exp] : m.f)
    if (is_dependent(s.at(atom))) d += exp;
  return d;
}

// Antiderivative with respect to a single atom, valid for Laurent fragments
// whose denominator is either free of the atom or a single term. nullopt
// marks a logarithmic (exponent -1) or structural obstruction.
std::optional<Expr> integrate_in_atom(const Expr& e, AtomId a) {
  SymbolsPtr sp = e.symbols();
  const Symbols& s = *sp;
  if (e.is_zero()) return Expr::zero(sp);
  const Poly& den = e.den();
  int den_exp = 0;
  if (poly_contains(den, a)) {
    if (den.t.size() > 1) return std::nullopt;
    den_exp = mono_exponent(den.t.front().first, a);
  }
  Expr acc = Expr::zero(sp);
  Expr den_e = Expr::fraction(sp, poly_const(1), den);
  for (const auto& [m, c] : e.num().t) {
    int n = mono_exponent(m, a) - den_exp;
    if (n == -1) return std::nullopt;
    Poly term;
    term.t.emplace_back(m, c);
    Expr t = Expr::from_poly(sp, term) * den_e;
    acc = acc + t * Expr::atom(sp, a) / Expr::integer(sp, n + 1);
  }
  return acc;
}

}  // namespace

ExactnessResult exact_total_derivative(const Expr& e) {
  SymbolsPtr sp = e.symbols();
  Symbols& s = *sp;
  for (AtomId a : e.atoms()) {
    const Atom& at = s.at(a);
    if (at.kind == AtomKind::momentum || at.kind == AtomKind::multiplier)
      throw kernel_error("total-derivative test applies to configuration-space expressions; found '" +
                         at.name + "'");
  }

  ExactnessResult res;
  auto fams = dependent_families(e);
  bool all_zero = true;
  for (const auto& [name, kind] : fams) {
    Expr r = euler_operator(e, name, kind);
    if (!r.is_zero()) all_zero = false;
    res.residuals.emplace_back(name, std::move(r));
  }
  res.is_exact = all_zero;
  if (!all_zero) {
    res.note = "nonvanishing Euler residual";
    return res;
  }
  if (e.is_zero()) {
    res.primitive = Expr::zero(sp);
    return res;
  }

  // Laurent restriction: a denominator that mixes dependent atoms across
  // several terms is outside the reconstructible fragment.
  bool den_dependent = false;
  for (AtomId a : e.atoms())
    if (poly_contains(e.den(), a) && is_dependent(s.at(a))) den_dependent = true;
  if (den_dependent && e.den().t.size() > 1) {
    res.note = "denominator is not a monomial in the dependent atoms; no rational primitive";
    return res;
  }
  int den_dep_deg = den_dependent ? monomial_dependent_degree(s, e.den().t.front().first) : 0;

  // Split into sectors of fixed dependent degree; the total derivative
  // preserves that degree, so each sector is separately exact.
  std::map<int, Expr> sectors;
  Expr den_inv = Expr::fraction(sp, poly_const(1), e.den());
  for (const auto& [m, c] : e.num().t) {
    int d = monomial_dependent_degree(s, m) - den_dep_deg;
    Poly term;
    term.t.emplace_back(m, c);
    Expr t = Expr::from_poly(sp, term) * den_inv;
    auto it = sectors.find(d);
    if (it == sectors.end()) sectors.emplace(d, t);
    else it->second = it->second + t;
  }

  Expr primitive = Expr::zero(sp);
  for (auto& [d, sector] : sectors) {
    if (sector.is_zero()) continue;
    bool has_dep = false;
    for (AtomId a : sector.atoms())
      if (is_dependent(s.at(a))) has_dep = true;

    if (!has_dep) {
      auto f = integrate_in_atom(sector, s.tau());
      if (!f) {
        res.note = "explicit tau part has no rational antiderivative";
        return res;
      }
      primitive = primitive + *f;
      continue;
    }

    if (d != 0) {
      // Scaling homotopy: every term of d(sector)/d a^(k) has dependent
      // degree d-1, so the path integral reduces to division by d.
      Expr fd = Expr::zero(sp);
      for (const auto& [name, kind] : dependent_families(sector)) {
        int maxk = family_max_order(s, sector, name, kind);
        for (int k = 1; k <= maxk; ++k) {
          auto ak = family_jet(s, name, kind, k);
          if (!ak) continue;
          Expr p = differentiate(sector, *ak);
          if (p.is_zero()) continue;
          for (int j = 0; j < k; ++j) {
            AtomId low = family_jet_intern(s, name, kind, k - 1 - j);
            Expr contrib = Expr::atom(sp, low) * p;
            fd = (j % 2 == 0) ? fd + contrib : fd - contrib;
            if (j + 1 < k) p = d_dtau(p);
          }
        }
      }
      primitive = primitive + fd / Expr::integer(sp, d);
      continue;
    }

    // Degree-zero sector: peel the top jet by parts until only explicit
    // tau-dependence remains.
    Expr work = sector;
    for (int guard = 0; ; ++guard) {
      if (guard > 200) {
        res.note = "integration by parts did not terminate";
        return res;
      }
      std::optional<AtomId> top;
      for (AtomId a : work.atoms()) {
        const Atom& at = s.at(a);
        if (!is_dependent(at) || at.order == 0) continue;
        if (!top || at.order > s.at(*top).order ||
            (at.order == s.at(*top).order && s.compare(a, *top) > 0))
          top = a;
      }
      if (!top) {
        bool dep_left = false;
        for (AtomId a : work.atoms())
          if (is_dependent(s.at(a))) dep_left = true;
        if (dep_left) {
          res.note = "degree-zero sector is not a rational total derivative";
          return res;
        }
        auto f = integrate_in_atom(work, s.tau());
        if (!f) {
          res.note = "explicit tau part has no rational antiderivative";
          return res;
        }
        primitive = primitive + *f;
        break;
      }
      Expr c = differentiate(work, *top);
      if (c.contains(*top)) {
        res.note = "top jet enters nonlinearly; no rational primitive found";
        return res;
      }
      const Atom ta = s.at(*top);
      AtomId lower = family_jet_intern(s, ta.name,
                                       ta.kind == AtomKind::gauge_function
                                           ? AtomKind::gauge_function
                                           : AtomKind::coordinate,
                                       ta.order - 1);
      auto f1 = integrate_in_atom(c, lower);
      if (!f1) {
        res.note = "logarithmic obstruction while integrating by parts";
        return res;
      }
      primitive = primitive + *f1;
      work = work - d_dtau(*f1);
    }
  }

  if (d_dtau(primitive) != e) {
    res.note = "reconstructed primitive failed verification";
    return res;
  }
  res.primitive = primitive;
  return res;
}

}  // namespace dforge
