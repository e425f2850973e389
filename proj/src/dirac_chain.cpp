#include "dforge/dirac_chain.hpp"

#include <algorithm>

namespace dforge {

namespace {

bool has_phase_atom(const Expr& e) {
  const Symbols& s = *e.symbols();
  for (AtomId a : e.atoms()) {
    AtomKind k = s.at(a).kind;
    if (k == AtomKind::coordinate || k == AtomKind::momentum) return true;
  }
  return false;
}

void relabel(HamiltonianSystem& hs) {
  for (std::size_t i = 0; i < hs.constraints.size(); ++i)
    hs.constraints[i].label = "C" + std::to_string(i + 1);
}

Expr substitute_determined(const HamiltonianSystem& hs, Expr e) {
  for (const auto& m : hs.multipliers)
    if (m.determined && e.contains(m.atom)) e = substitute_atom(e, m.atom, m.value);
  return e;
}

}  // namespace

ChainReport stabilize(HamiltonianSystem& hs) {
  SymbolsPtr sp = hs.syms;
  ChainReport rep;
  relabel(hs);

  ConstraintSurface surf(sp, hs.assumptions);
  for (const auto& c : hs.constraints) surf.add(c.expr);
  surf.complete();

  std::vector<bool> checked(hs.constraints.size(), false);

  for (int guard = 0;; ++guard) {
    if (guard > 64) throw analysis_error("constraint chain failed to terminate");
    std::optional<std::size_t> pick;
    for (std::size_t i = 0; i < hs.constraints.size(); ++i) {
      if (checked[i]) continue;
      if (!pick) {
        pick = i;
        continue;
      }
      const auto& a = hs.constraints[i];
      const auto& b = hs.constraints[*pick];
      if (a.stage < b.stage || (a.stage == b.stage && Expr::cmp(a.expr, b.expr) > 0)) pick = i;
    }
    if (!pick) break;
    const std::size_t i = *pick;
    rep.rounds += 1;
    const std::string label = hs.constraints[i].label;

    Expr cond = poisson(hs.constraints[i].expr, hs.total_hamiltonian(), hs.pairs);
    cond = substitute_determined(hs, cond);
    cond = surf.reduce(cond);
    if (cond.is_zero()) {
      checked[i] = true;
      rep.log.push_back(label + ": preserved");
      continue;
    }

    std::vector<std::size_t> mults;
    for (std::size_t m = 0; m < hs.multipliers.size(); ++m)
      if (!hs.multipliers[m].determined && cond.contains(hs.multipliers[m].atom))
        mults.push_back(m);

    if (mults.empty()) {
      Expr nc = normalize_constraint(cond, hs.assumptions);
      if (nc.is_rational() || !has_phase_atom(nc))
        throw analysis_error("inconsistent dynamics: consistency of " + label +
                             " demands '" + nc.str() + "' = 0 with no phase-space content");
      HamiltonianSystem::Constraint c;
      c.expr = nc;
      c.stage = hs.constraints[i].stage + 1;
      c.origin = "stability of " + label;
      hs.constraints.push_back(c);
      checked.push_back(false);
      relabel(hs);
      surf.add(nc);
      surf.complete();
      checked[i] = true;
      rep.log.push_back(label + " -> " + hs.constraints.back().label + ": " + nc.str() +
                        " (stage " + std::to_string(c.stage) + ")");
      continue;
    }

    // Affine multiplier solve.
    std::vector<std::pair<std::size_t, Expr>> cands;
    for (std::size_t m : mults) {
      Expr coeff = differentiate(cond, hs.multipliers[m].atom);
      for (std::size_t m2 : mults)
        if (coeff.contains(hs.multipliers[m2].atom))
          throw analysis_error("consistency condition of " + label +
                               " is nonlinear in the multipliers");
      coeff = surf.reduce(coeff);
      if (hs.assumptions.assured_nonzero(coeff)) cands.emplace_back(m, coeff);
    }
    if (cands.empty())
      throw analysis_error("cannot solve the consistency condition of " + label +
                           " for a multiplier: no assured-invertible coefficient");
    // Deterministic choice: the candidate whose primary constraint sorts
    // lowest in the canonical expression order.
    std::size_t best = 0;
    for (std::size_t k = 1; k < cands.size(); ++k) {
      const Expr& ek = hs.constraints[hs.multipliers[cands[k].first].primary_index].expr;
      const Expr& eb = hs.constraints[hs.multipliers[cands[best].first].primary_index].expr;
      if (Expr::cmp(ek, eb) < 0) best = k;
    }
    auto& mult = hs.multipliers[cands[best].first];
    Expr rest = substitute_atom(cond, mult.atom, Expr::zero(sp));
    Expr value = surf.reduce(-rest / cands[best].second);
    mult.determined = true;
    mult.value = value;
    mult.determined_by = label;
    for (auto& other : hs.multipliers)
      if (other.determined && other.atom != mult.atom && other.value.contains(mult.atom))
        other.value = substitute_atom(other.value, mult.atom, value);
    checked[i] = true;
    rep.log.push_back(label + " -> " + sp->at(mult.atom).name + " = " + value.str());
  }

  // Closure certificate: every condition must now vanish on the final
  // surface with the determined multipliers in place.
  for (std::size_t i = 0; i < hs.constraints.size(); ++i) {
    Expr cond = poisson(hs.constraints[i].expr, hs.total_hamiltonian(), hs.pairs);
    cond = substitute_determined(hs, cond);
    if (!surf.reduce(cond).is_zero())
      throw analysis_error("stabilization closure certificate failed for " +
                           hs.constraints[i].label);
  }
  return rep;
}

void classify(HamiltonianSystem& hs) {
  SymbolsPtr sp = hs.syms;
  const std::size_t n = hs.constraints.size();
  ConstraintSurface surf(sp, hs.assumptions);
  for (const auto& c : hs.constraints) surf.add(c.expr);
  surf.complete();

  // A[j][i] = {C_i, C_j} reduced; kernel vectors x solve sum_i x_i A[j][i] = 0.
  std::vector<std::vector<Expr>> A(n, std::vector<Expr>());
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i)
      A[j].push_back(surf.reduce(poisson(hs.constraints[i].expr, hs.constraints[j].expr, hs.pairs)));

  std::vector<bool> row_used(n, false);
  std::vector<std::optional<std::size_t>> pivot_row(n);
  for (std::size_t col = 0; col < n; ++col) {
    std::optional<std::size_t> prow;
    bool saw = false;
    Expr offender = Expr::zero(sp);
    for (std::size_t r = 0; r < n; ++r) {
      if (row_used[r] || A[r][col].is_zero()) continue;
      saw = true;
      if (hs.assumptions.assured_nonzero(A[r][col])) {
        prow = r;
        break;
      }
      offender = A[r][col];
    }
    if (!prow) {
      if (saw)
        throw analysis_error("rank decision for the constraint bracket matrix requires an "
                             "unavailable assumption on '" + offender.str() + "'");
      continue;
    }
    std::size_t r = *prow;
    row_used[r] = true;
    pivot_row[col] = r;
    Expr inv = Expr::one(sp) / A[r][col];
    for (std::size_t c2 = 0; c2 < n; ++c2) A[r][c2] = surf.reduce(A[r][c2] * inv);
    for (std::size_t rr = 0; rr < n; ++rr) {
      if (rr == r || A[rr][col].is_zero()) continue;
      Expr f = A[rr][col];
      for (std::size_t c2 = 0; c2 < n; ++c2)
        A[rr][c2] = surf.reduce(A[rr][c2] - f * A[r][c2]);
    }
  }

  hs.first_class_combinations.clear();
  std::vector<bool> first(n, false);
  for (std::size_t f = 0; f < n; ++f) {
    if (pivot_row[f]) continue;
    std::vector<Expr> v(n, Expr::zero(sp));
    v[f] = Expr::one(sp);
    for (std::size_t c = 0; c < n; ++c)
      if (pivot_row[c] && !A[*pivot_row[c]][f].is_zero()) v[c] = -A[*pivot_row[c]][f];
    std::size_t lead = 0;
    while (lead < n && v[lead].is_zero()) ++lead;
    if (hs.assumptions.assured_nonzero(v[lead]) || v[lead].is_rational()) {
      Expr inv = Expr::one(sp) / v[lead];
      for (auto& e : v)
        if (!e.is_zero()) e = surf.reduce(e * inv);
    }
    first[lead] = true;
    hs.first_class_combinations.push_back(std::move(v));
  }
  for (std::size_t i = 0; i < n; ++i)
    hs.constraints[i].cls = first[i] ? HamiltonianSystem::Constraint::Class::first
                                     : HamiltonianSystem::Constraint::Class::second;
}

namespace {

struct SolveCandidate {
  AtomId atom;
  Expr value;
  int priority;  // 1 rational coefficient, 2 assured parameter coefficient
};

std::optional<SolveCandidate> atom_solve(const Expr& e, const AssumptionSet& assume) {
  SymbolsPtr sp = e.symbols();
  const Symbols& s = *sp;
  std::optional<SolveCandidate> best;
  for (AtomId a : e.atoms()) {
    AtomKind k = s.at(a).kind;
    if (k != AtomKind::coordinate && k != AtomKind::momentum) continue;
    if (poly_contains(e.den(), a)) continue;
    if (poly_degree_in(e.num(), a) != 1) continue;
    Expr coeff = differentiate(e, a);
    if (coeff.contains(a)) continue;
    int prio;
    if (coeff.is_rational())
      prio = 1;
    else if (assume.assured_nonzero(coeff))
      prio = 2;
    else
      continue;
    if (best && (best->priority < prio ||
                 (best->priority == prio && s.compare(best->atom, a) <= 0)))
      continue;
    Expr rest = substitute_atom(e, a, Expr::zero(sp));
    best = SolveCandidate{a, -rest / coeff, prio};
  }
  return best;
}

}  // namespace

GaugeFixResult fix_gauge(const HamiltonianSystem& hs_in,
                         const std::vector<std::pair<std::string, Expr>>& gauges) {
  HamiltonianSystem hs = hs_in;
  bool need_classes = false;
  for (const auto& c : hs.constraints)
    if (c.cls == HamiltonianSystem::Constraint::Class::unknown) need_classes = true;
  if (need_classes) classify(hs);

  SymbolsPtr sp = hs.syms;
  const Symbols& s = *sp;
  GaugeFixResult res;

  ConstraintSurface surf(sp, hs.assumptions);
  for (const auto& c : hs.constraints) surf.add(c.expr);
  surf.complete();

  std::vector<bool> removed(hs.constraints.size(), false);
  std::vector<std::pair<AtomId, Expr>> solved;  // applied in order
  auto apply_solved = [&](Expr e) {
    for (const auto& [a, v] : solved) e = substitute_atom(e, a, v);
    return e;
  };
  auto record_solved = [&](AtomId a, const Expr& v, const std::string& from) {
    solved.emplace_back(a, v);
    res.eliminations.emplace_back(s.display(a), v);
    res.log.push_back(from + " solves " + s.display(a) + " = " + v.str());
  };

  std::vector<std::size_t> partners;
  for (const auto& [gname, chi] : gauges) {
    std::optional<std::size_t> partner;
    for (std::size_t j = 0; j < hs.constraints.size(); ++j) {
      if (hs.constraints[j].cls != HamiltonianSystem::Constraint::Class::first || removed[j])
        continue;
      Expr br = surf.reduce(poisson(chi, hs.constraints[j].expr, hs.pairs));
      if (br.is_zero()) continue;
      if (partner)
        throw analysis_error("gauge '" + gname + "' pairs ambiguously with " +
                             hs.constraints[*partner].label + " and " + hs.constraints[j].label);
      partner = j;
    }
    if (!partner)
      throw analysis_error("gauge '" + gname +
                           "' has vanishing bracket with every first-class constraint");
    if (std::find(partners.begin(), partners.end(), *partner) != partners.end())
      throw analysis_error("two gauges pair with the same first-class constraint " +
                           hs.constraints[*partner].label);
    partners.push_back(*partner);
    res.log.push_back("gauge '" + gname + "' pairs with " + hs.constraints[*partner].label);

    Expr chi_sub = apply_solved(chi);
    if (auto sf = atom_solve(chi_sub, hs.assumptions)) {
      record_solved(sf->atom, sf->value, "gauge '" + gname + "'");
    } else {
      HamiltonianSystem::Constraint c;
      c.expr = chi_sub;
      c.stage = 0;
      c.origin = "gauge condition " + gname;
      c.cls = HamiltonianSystem::Constraint::Class::second;
      c.label = gname;
      hs.constraints.push_back(c);
      removed.push_back(false);
      res.log.push_back("gauge '" + gname + "' kept as a constraint (no solvable atom)");
    }

    removed[*partner] = true;
    Expr pexpr = apply_solved(hs.constraints[*partner].expr);
    if (auto sf = atom_solve(pexpr, hs.assumptions)) {
      record_solved(sf->atom, sf->value, hs.constraints[*partner].label);
    } else {
      // The relation still holds on the reduced surface; together with the
      // imposed gauge it now forms a second-class pair.
      removed[*partner] = false;
      hs.constraints[*partner].cls = HamiltonianSystem::Constraint::Class::second;
      res.log.push_back(hs.constraints[*partner].label +
                        " kept as a second-class relation (no solvable atom)");
    }
  }

  // Tentative solved forms for the other second-class constraints; accept
  // them only where they complete canonical pairs.
  struct Tentative {
    std::size_t constraint;
    AtomId atom;
    Expr value;
  };
  std::vector<Tentative> tent;
  for (std::size_t j = 0; j < hs.constraints.size(); ++j) {
    if (removed[j] || hs.constraints[j].cls != HamiltonianSystem::Constraint::Class::second)
      continue;
    Expr e = apply_solved(hs.constraints[j].expr);
    if (e.is_zero()) continue;
    if (auto sf = atom_solve(e, hs.assumptions)) {
      bool dup = false;
      for (const auto& [sa, sv] : solved)
        if (sa == sf->atom) dup = true;
      for (const auto& t : tent)
        if (t.atom == sf->atom) dup = true;
      if (!dup) tent.push_back(Tentative{j, sf->atom, sf->value});
    }
  }
  auto solved_atom = [&](AtomId a) {
    for (const auto& [sa, sv] : solved)
      if (sa == a) return true;
    for (const auto& t : tent)
      if (t.atom == a) return true;
    return false;
  };
  std::vector<bool> pair_complete(hs.pairs.size(), false);
  for (std::size_t k = 0; k < hs.pairs.size(); ++k)
    pair_complete[k] = solved_atom(hs.pairs[k].first) && solved_atom(hs.pairs[k].second);
  for (const auto& t : tent) {
    bool in_complete = false;
    for (std::size_t k = 0; k < hs.pairs.size(); ++k)
      if (pair_complete[k] && (t.atom == hs.pairs[k].first || t.atom == hs.pairs[k].second))
        in_complete = true;
    if (!in_complete) continue;
    record_solved(t.atom, apply_solved(t.value), hs.constraints[t.constraint].label);
    removed[t.constraint] = true;
  }
  // A pair is dropped only when both of its atoms ended up solved.
  for (std::size_t k = 0; k < hs.pairs.size(); ++k) {
    bool q = false, p = false;
    for (const auto& [sa, sv] : solved) {
      if (sa == hs.pairs[k].first) q = true;
      if (sa == hs.pairs[k].second) p = true;
    }
    if (q && p)
      res.log.push_back("canonical pair (" + s.display(hs.pairs[k].first) + ", " +
                        s.display(hs.pairs[k].second) + ") eliminated");
    else
      res.remaining_pairs.push_back(hs.pairs[k]);
  }

  for (std::size_t j = 0; j < hs.constraints.size(); ++j) {
    if (removed[j]) continue;
    Expr e = apply_solved(hs.constraints[j].expr);
    if (e.is_zero()) {
      res.log.push_back(hs.constraints[j].label + " is satisfied identically after elimination");
      continue;
    }
    HamiltonianSystem::Constraint c = hs.constraints[j];
    c.expr = e;
    res.remaining.push_back(c);
    res.derived_relations.push_back(e);
  }
  return res;
}

GeneratedVariation fcc_generator(const HamiltonianSystem& hs, std::size_t combination_index,
                                 const std::string& eps_name) {
  if (combination_index >= hs.first_class_combinations.size())
    throw analysis_error("no first-class combination with index " +
                         std::to_string(combination_index));
  SymbolsPtr sp = hs.syms;
  Symbols& s = *sp;
  const auto& v = hs.first_class_combinations[combination_index];
  Expr g = Expr::zero(sp);
  for (std::size_t i = 0; i < v.size(); ++i)
    if (!v[i].is_zero()) g = g + v[i] * hs.constraints[i].expr;
  AtomId eps = s.intern(AtomKind::gauge_function, eps_name, 0);
  GeneratedVariation out;
  out.generator = g;
  out.gauge_function = eps_name;
  for (const auto& [q, p] : hs.pairs) {
    Expr dq = poisson(Expr::atom(sp, q), g, hs.pairs);
    Expr dp = poisson(Expr::atom(sp, p), g, hs.pairs);
    if (!dq.is_zero()) out.variations.emplace_back(q, Expr::atom(sp, eps) * dq);
    if (!dp.is_zero()) out.variations.emplace_back(p, Expr::atom(sp, eps) * dp);
  }
  return out;
}

}  // namespace dforge
