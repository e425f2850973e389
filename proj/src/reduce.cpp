#include "dforge/reduce.hpp"

namespace dforge {

namespace {

constexpr std::size_t kMaxRules = 32;
constexpr int kMaxCompletionDegree = 6;
constexpr int kMaxRewriteSteps = 20000;

bool is_phase_atom(const Atom& a) {
  return a.kind == AtomKind::coordinate || a.kind == AtomKind::momentum;
}

Monomial phase_part(const Symbols& s, const Monomial& m) {
  Monomial r;
  for (const auto& [atom, exp] : m.f)
    if (is_phase_atom(s.at(atom))) {
      r.f.emplace_back(atom, exp);
      r.deg += exp;
    }
  return r;
}

}  // namespace

Expr normalize_constraint(const Expr& c, const AssumptionSet& assume) {
  if (c.is_zero()) return c;
  SymbolsPtr sp = c.symbols();
  const Symbols& s = *sp;
  if (!c.den().is_constant()) {
    Expr den = Expr::from_poly(sp, c.den());
    if (!assume.assured_nonzero(den))
      throw analysis_error("cannot clear the denominator of constraint '" + c.str() +
                           "': '" + den.str() + "' is not assured nonzero");
  }
  Poly n = c.num();
  // Strip the largest monomial factor made of assured-nonzero atoms.
  Monomial common = n.t.front().first;
  for (const auto& [m, coef] : n.t) common = mono_gcd(s, common, m);
  Monomial strip;
  for (const auto& [atom, exp] : common.f)
    if (assume.nonzero_atom(s.at(atom).name)) {
      strip.f.emplace_back(atom, exp);
      strip.deg += exp;
    }
  if (strip.deg > 0) {
    Poly stripped;
    for (const auto& [m, coef] : n.t) stripped.t.emplace_back(mono_div(s, m, strip), coef);
    n = poly_normalize(s, std::move(stripped.t));
  }
  mpz_class content = poly_content(n);
  if (content > 1) {
    for (auto& [m, coef] : n.t) coef /= content;
  }
  if (n.t.front().second < 0) n = poly_neg(n);
  return Expr::from_poly(sp, std::move(n));
}

ConstraintSurface::ConstraintSurface(SymbolsPtr syms, AssumptionSet assume)
    : syms_(std::move(syms)), assume_(std::move(assume)) {}

bool ConstraintSurface::try_add_rule(const Expr& normalized) {
  if (normalized.is_zero()) return false;
  const Symbols& s = *syms_;
  if (normalized.is_rational())
    throw analysis_error("inconsistent constraint surface: '" + normalized.str() +
                         "' reduces to a nonzero constant");
  for (const auto& r : rules_)
    if (r.constraint == normalized) return false;

  const Poly& n = normalized.num();
  // Leading phase-space monomial and the terms that carry it.
  Monomial pivot;
  bool have = false;
  for (const auto& [m, coef] : n.t) {
    Monomial pm = phase_part(s, m);
    if (!have || mono_cmp(s, pm, pivot) > 0) {
      pivot = pm;
      have = true;
    }
  }
  if (!have || pivot.deg == 0)
    throw analysis_error("constraint '" + normalized.str() +
                         "' has no phase-space content to solve for");
  Poly coeff_p, rhs_p;
  for (const auto& [m, coef] : n.t) {
    if (mono_equal(phase_part(s, m), pivot))
      coeff_p.t.emplace_back(mono_div(s, m, pivot), coef);
    else
      rhs_p.t.emplace_back(m, -coef);
  }
  Expr coeff = Expr::from_poly(syms_, poly_normalize(s, std::move(coeff_p.t)));
  Expr rhs = Expr::from_poly(syms_, poly_normalize(s, std::move(rhs_p.t)));
  if (!assume_.assured_nonzero(coeff)) return false;
  rules_.push_back(ReductionRule{std::move(pivot), std::move(coeff), std::move(rhs), normalized});
  return true;
}

void ConstraintSurface::add(const Expr& constraint) {
  Expr n = normalize_constraint(constraint, assume_);
  if (n.is_zero()) return;
  if (n.is_rational())
    throw analysis_error("inconsistent constraint surface: '" + constraint.str() +
                         "' reduces to a nonzero constant");
  if (!try_add_rule(n)) {
    // Re-run extraction to produce the precise complaint.
    const Symbols& s = *syms_;
    Monomial pivot;
    bool have = false;
    for (const auto& [m, coef] : n.num().t) {
      Monomial pm = phase_part(s, m);
      if (!have || mono_cmp(s, pm, pivot) > 0) {
        pivot = pm;
        have = true;
      }
    }
    Poly coeff_p;
    for (const auto& [m, coef] : n.num().t)
      if (mono_equal(phase_part(s, m), pivot)) coeff_p.t.emplace_back(mono_div(s, m, pivot), coef);
    Expr coeff = Expr::from_poly(syms_, poly_normalize(s, std::move(coeff_p.t)));
    throw analysis_error("cannot orient constraint '" + n.str() +
                         "' as a rewrite rule: leading coefficient '" + coeff.str() +
                         "' is not assured nonzero");
  }
}

Expr ConstraintSurface::reduce_once(const Expr& e) const {
  const Symbols& s = *syms_;
  auto reduce_poly = [&](const Poly& p) -> Expr {
    Expr x = Expr::from_poly(syms_, p);
    for (int step = 0; step < kMaxRewriteSteps; ++step) {
      bool hit = false;
      for (const auto& [m, coef] : x.num().t) {
        for (const auto& r : rules_) {
          if (!mono_divides(r.pivot, m)) continue;
          Poly lead;
          lead.t.emplace_back(m, coef);
          Expr term = Expr::fraction(syms_, std::move(lead), x.den());
          Poly rest;
          rest.t.emplace_back(mono_div(s, m, r.pivot), coef);
          Expr repl = Expr::fraction(syms_, std::move(rest), x.den()) * r.rhs / r.coeff;
          x = x - term + repl;
          hit = true;
          break;
        }
        if (hit) break;
      }
      if (!hit) return x;
    }
    throw analysis_error("constraint rewriting exceeded the step bound");
  };
  Expr num = reduce_poly(e.num());
  Expr den = reduce_poly(e.den());
  if (den.is_zero())
    throw analysis_error("denominator of '" + e.str() + "' vanishes on the constraint surface");
  return num / den;
}

Expr ConstraintSurface::reduce(const Expr& e) const {
  Expr cur = e;
  for (int round = 0; round < 50; ++round) {
    Expr next = reduce_once(cur);
    if (next == cur) return cur;
    cur = next;
  }
  throw analysis_error("surface reduction did not reach a fixed point");
}

void ConstraintSurface::complete() {
  bool changed = true;
  while (changed && rules_.size() < kMaxRules) {
    changed = false;
    for (std::size_t i = 0; i < rules_.size() && rules_.size() < kMaxRules; ++i) {
      for (std::size_t j = i + 1; j < rules_.size() && rules_.size() < kMaxRules; ++j) {
        const Symbols& s = *syms_;
        Monomial g = mono_gcd(s, rules_[i].pivot, rules_[j].pivot);
        if (g.deg == 0) continue;  // disjoint pivots give trivial pairs
        Monomial lcm = mono_lcm(s, rules_[i].pivot, rules_[j].pivot);
        Poly ci, cj;
        ci.t.emplace_back(mono_div(s, lcm, rules_[i].pivot), mpz_class(1));
        cj.t.emplace_back(mono_div(s, lcm, rules_[j].pivot), mpz_class(1));
        Expr li = Expr::from_poly(syms_, std::move(ci));
        Expr lj = Expr::from_poly(syms_, std::move(cj));
        Expr spoly = rules_[j].coeff * li * rules_[i].rhs - rules_[i].coeff * lj * rules_[j].rhs;
        Expr r = reduce(spoly);
        if (r.is_zero()) continue;
        Expr n = normalize_constraint(r, assume_);
        if (n.is_zero()) continue;
        if (n.is_rational())
          throw analysis_error("inconsistent constraint surface: completion produced '" +
                               n.str() + "'");
        int dep_deg = 0;
        for (const auto& [m, coef] : n.num().t)
          dep_deg = std::max(dep_deg, phase_part(s, m).deg);
        if (dep_deg > kMaxCompletionDegree) continue;
        if (try_add_rule(n)) changed = true;
      }
    }
  }
}

Expr reduce_mod(const Expr& e, const std::vector<Expr>& constraints,
                const AssumptionSet& assume) {
  ConstraintSurface surf(e.symbols(), assume);
  for (const Expr& c : constraints) surf.add(c);
  surf.complete();
  return surf.reduce(e);
}

}  // namespace dforge
