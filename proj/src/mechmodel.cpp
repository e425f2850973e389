#include "dforge/mechmodel.hpp"

#include <algorithm>

namespace dforge {

std::vector<Expr> euler_lagrange(const ModelSpec& model) {
  std::vector<Expr> out;
  out.reserve(model.coordinates.size());
  const Symbols& s = *model.syms;
  for (AtomId q : model.coordinates)
    out.push_back(euler_operator(model.lagrangian, s.at(q).name, AtomKind::coordinate));
  return out;
}

Expr HamiltonianSystem::total_hamiltonian() const {
  Expr h = h0;
  for (const auto& m : multipliers)
    h = h + Expr::atom(syms, m.atom) * constraints[m.primary_index].expr;
  return h;
}

Expr HamiltonianSystem::total_hamiltonian_effective() const {
  Expr h = total_hamiltonian();
  for (const auto& m : multipliers)
    if (m.determined) h = substitute_atom(h, m.atom, m.value);
  return h;
}

HamiltonianSystem legendre(const ModelSpec& model) {
  SymbolsPtr sp = model.syms;
  Symbols& s = *sp;
  const std::size_t n = model.coordinates.size();

  HamiltonianSystem hs;
  hs.syms = sp;
  hs.assumptions = model.assumptions;

  std::vector<AtomId> vel(n), mom(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string qname = s.at(model.coordinates[i]).name;
    vel[i] = s.intern(AtomKind::derivative, qname, 1);
    mom[i] = s.intern(AtomKind::momentum, "p_" + qname);
    hs.pairs.emplace_back(model.coordinates[i], mom[i]);
  }

  for (AtomId a : model.lagrangian.atoms()) {
    const Atom& at = s.at(a);
    if (at.kind == AtomKind::derivative && at.order > 1)
      throw model_error("Lagrangian involves a jet of order " + std::to_string(at.order) +
                        " ('" + s.display(a) + "'); first-order Lagrangians only");
  }

  // Momentum map p_A = dL/dv^A, required affine in the velocities.
  std::vector<Expr> pdef;
  pdef.reserve(n);
  for (std::size_t i = 0; i < n; ++i) pdef.push_back(differentiate(model.lagrangian, vel[i]));

  std::vector<std::vector<Expr>> M(n, std::vector<Expr>());
  std::vector<Expr> b;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      Expr mij = differentiate(pdef[i], vel[j]);
      for (AtomId a : mij.atoms())
        if (s.at(a).kind == AtomKind::derivative)
          throw model_error("Lagrangian is not quadratic in the velocities: d^2 L / d" +
                            s.display(vel[i]) + " d" + s.display(vel[j]) +
                            " still involves a velocity");
      M[i].push_back(std::move(mij));
    }
    Expr bi = pdef[i];
    for (std::size_t j = 0; j < n; ++j) bi = substitute_atom(bi, vel[j], Expr::zero(sp));
    b.push_back(std::move(bi));
    hs.momentum_definitions.emplace_back(mom[i], pdef[i]);
  }

  // Gauss-Jordan elimination of [M | p - b] over the function field; pivots
  // must be assured nonzero. Rows that empty out yield primary constraints.
  std::vector<Expr> y;
  for (std::size_t i = 0; i < n; ++i) y.push_back(Expr::atom(sp, mom[i]) - b[i]);

  std::vector<std::optional<std::size_t>> pivot_row_of_col(n);
  std::vector<bool> row_used(n, false);
  for (std::size_t col = 0; col < n; ++col) {
    std::optional<std::size_t> prow;
    bool saw_nonzero = false;
    Expr offender = Expr::zero(sp);
    for (std::size_t r = 0; r < n; ++r) {
      if (row_used[r] || M[r][col].is_zero()) continue;
      saw_nonzero = true;
      if (model.assumptions.assured_nonzero(M[r][col])) {
        prow = r;
        break;
      }
      offender = M[r][col];
    }
    if (!prow) {
      if (saw_nonzero)
        throw model_error("cannot decide invertibility of the kinetic block: entry '" +
                          offender.str() + "' needs a nonzero assumption");
      continue;  // column has no pivot; velocity stays unsolved
    }
    std::size_t r = *prow;
    row_used[r] = true;
    pivot_row_of_col[col] = r;
    Expr inv = Expr::one(sp) / M[r][col];
    for (std::size_t j = 0; j < n; ++j) M[r][j] = M[r][j] * inv;
    y[r] = y[r] * inv;
    for (std::size_t rr = 0; rr < n; ++rr) {
      if (rr == r || M[rr][col].is_zero()) continue;
      Expr f = M[rr][col];
      for (std::size_t j = 0; j < n; ++j) M[rr][j] = M[rr][j] - f * M[r][j];
      y[rr] = y[rr] - f * y[r];
    }
  }

  std::vector<std::size_t> unsolved_cols;
  for (std::size_t col = 0; col < n; ++col)
    if (!pivot_row_of_col[col]) unsolved_cols.push_back(col);

  // Solved velocities: v^col = y_row - sum over unsolved columns.
  for (std::size_t col = 0; col < n; ++col) {
    if (!pivot_row_of_col[col]) continue;
    std::size_t r = *pivot_row_of_col[col];
    Expr v = y[r];
    for (std::size_t u : unsolved_cols)
      if (!M[r][u].is_zero()) v = v - M[r][u] * Expr::atom(sp, vel[u]);
    hs.solved_velocities.emplace_back(vel[col], std::move(v));
  }

  // Primary constraints from the emptied rows.
  std::vector<std::size_t> primary_rows;
  for (std::size_t r = 0; r < n; ++r) {
    if (row_used[r]) continue;
    bool empty = true;
    for (std::size_t j = 0; j < n; ++j)
      if (!M[r][j].is_zero()) empty = false;
    if (!empty)
      throw model_error("kinetic block elimination left an undecidable row");
    if (y[r].is_zero()) continue;  // redundant row
    Expr c = normalize_constraint(y[r], model.assumptions);
    HamiltonianSystem::Constraint pc;
    pc.expr = std::move(c);
    pc.stage = 1;
    pc.origin = "null direction of the kinetic block";
    hs.constraints.push_back(std::move(pc));
    primary_rows.push_back(r);
  }

  // Canonical energy, with solved velocities substituted.
  Expr E = -model.lagrangian;
  for (std::size_t i = 0; i < n; ++i)
    E = E + Expr::atom(sp, mom[i]) * Expr::atom(sp, vel[i]);
  for (const auto& [v, val] : hs.solved_velocities) E = substitute_atom(E, v, val);

  // The energy must be affine in the unsolved velocities with coefficients
  // that vanish on the primary surface; then dropping them is legitimate.
  std::vector<Expr> primaries;
  for (const auto& c : hs.constraints) primaries.push_back(c.expr);
  for (std::size_t u : unsolved_cols) {
    Expr coeff = differentiate(E, vel[u]);
    for (AtomId a : coeff.atoms())
      if (s.at(a).kind == AtomKind::derivative)
        throw analysis_error("canonical energy is not affine in '" + s.display(vel[u]) + "'");
    Expr red = reduce_mod(coeff, primaries, model.assumptions);
    if (!red.is_zero())
      throw analysis_error("canonical energy depends on the undetermined velocity '" +
                           s.display(vel[u]) + "' beyond the primary constraints");
  }
  for (std::size_t u : unsolved_cols) E = substitute_atom(E, vel[u], Expr::zero(sp));
  for (AtomId a : E.atoms())
    if (s.at(a).kind == AtomKind::derivative)
      throw analysis_error("canonical Hamiltonian still involves a velocity");
  hs.h0 = std::move(E);

  // Multipliers, one per primary constraint. A constraint that is exactly
  // one momentum atom borrows that coordinate's name.
  for (std::size_t k = 0; k < hs.constraints.size(); ++k) {
    const Expr& c = hs.constraints[k].expr;
    std::string mname;
    if (c.den().is_constant() && c.num().t.size() == 1 && c.num().t.front().second == 1 &&
        c.num().t.front().first.f.size() == 1 && c.num().t.front().first.f[0].second == 1 &&
        s.at(c.num().t.front().first.f[0].first).kind == AtomKind::momentum) {
      const std::string& pname = s.at(c.num().t.front().first.f[0].first).name;
      mname = "lambda_" + pname.substr(2);  // strip the "p_" prefix
    } else {
      mname = "lambda_" + std::to_string(k + 1);
    }
    HamiltonianSystem::Multiplier mult;
    mult.atom = s.intern(AtomKind::multiplier, mname);
    mult.primary_index = k;
    mult.value = Expr::zero(sp);
    hs.multipliers.push_back(std::move(mult));
  }

  return hs;
}

Expr noether_identity(const ModelSpec& model, const std::vector<IdentityCoefficient>& coeffs) {
  std::vector<Expr> el = euler_lagrange(model);
  Expr acc = Expr::zero(model.syms);
  for (const auto& c : coeffs) {
    if (c.coordinate >= el.size()) throw kernel_error("identity coefficient out of range");
    Expr term = el[c.coordinate];
    for (int k = 0; k < c.order; ++k) term = d_dtau(term);
    acc = acc + c.value * term;
  }
  return acc;
}

}  // namespace dforge
