#include "dforge/gaugeprin.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace dforge {
namespace {

std::set<AtomId> atoms_of(const Expr& e) {
  auto v = e.atoms();
  return {v.begin(), v.end()};
}

// Highest jet order of the named coordinate family present in e (-1 if the
// family does not appear at all).
int family_max_jet(const Expr& e, const Symbols& s, const std::string& name) {
  int top = -1;
  for (AtomId id : atoms_of(e)) {
    const Atom& a = s.at(id);
    if (a.name != name) continue;
    if (a.kind == AtomKind::coordinate) top = std::max(top, 0);
    if (a.kind == AtomKind::derivative) top = std::max(top, a.order);
  }
  return top;
}

Expr generator_entry(const LieGroupAction& a, std::size_t k, std::size_t i, std::size_t j,
                     const SymbolsPtr& syms) {
  if (a.kind == ActionKind::phase) return i == j ? Expr::one(syms) : Expr::zero(syms);
  return a.generators[k][i][j];
}

// delta x_i = sum_j (Gamma_k)^i_j x_j for one generator, without the group
// parameter factor.
std::vector<std::pair<AtomId, Expr>> generator_variation(const LieGroupAction& a, std::size_t k,
                                                         const SymbolsPtr& syms) {
  std::vector<std::pair<AtomId, Expr>> out;
  for (std::size_t i = 0; i < a.sector.size(); ++i) {
    Expr v = Expr::zero(syms);
    for (std::size_t j = 0; j < a.sector.size(); ++j)
      v = v + generator_entry(a, k, i, j, syms) * Expr::atom(syms, a.sector[j]);
    out.emplace_back(a.sector[i], v);
  }
  return out;
}

// Flip the sign of every jet of the sector coordinate families.
Expr sector_parity(const Expr& e, const LieGroupAction& a) {
  SymbolsPtr syms = e.symbols();
  std::set<std::string> names;
  for (AtomId id : a.sector) names.insert(syms->at(id).name);
  Expr out = e;
  for (AtomId id : atoms_of(e)) {
    const Atom atom = syms->at(id);
    if (!names.count(atom.name)) continue;
    if (atom.kind != AtomKind::coordinate && atom.kind != AtomKind::derivative) continue;
    out = substitute_atom(out, id, -Expr::atom(syms, id));
  }
  return out;
}

long binomial(int n, int k) {
  long r = 1;
  for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return r;
}

}  // namespace

Expr apply_variation(const Expr& e, const LocalTransformation& t) {
  SymbolsPtr syms = e.symbols();
  Expr out = Expr::zero(syms);
  for (const auto& [id, delta] : t.variations) {
    const Atom atom = syms->at(id);
    if (atom.kind == AtomKind::momentum) {
      out = out + differentiate(e, id) * delta;
      continue;
    }
    if (atom.kind != AtomKind::coordinate)
      throw model_error("transformation '" + t.name + "' varies '" + syms->display(id) +
                        "', which is neither a coordinate nor a momentum");
    int top = family_max_jet(e, *syms, atom.name);
    Expr delta_j = delta;  // (d/dtau)^j of delta q
    for (int j = 0; j <= top; ++j) {
      if (j > 0) delta_j = d_dtau(delta_j);
      auto jet = j == 0 ? std::optional<AtomId>(id)
                        : syms->find(AtomKind::derivative, atom.name, j);
      if (!jet) continue;
      out = out + differentiate(e, *jet) * delta_j;
    }
  }
  return out;
}

LocalTransformation as_transformation(const GeneratedVariation& v) {
  LocalTransformation t;
  t.name = "generated by " + v.generator.str();
  t.variations = v.variations;
  t.gauge_functions = {v.gauge_function};
  return t;
}

std::vector<std::vector<std::vector<Expr>>> structure_constants(const LieGroupAction& a) {
  SymbolsPtr syms;
  if (!a.sector.empty() && !a.generators.empty() && !a.generators[0].empty() &&
      !a.generators[0][0].empty())
    syms = a.generators[0][0][0].symbols();
  const std::size_t kk = a.params.size();
  const std::size_t n = a.sector.size();
  std::vector c(kk, std::vector(kk, std::vector<Expr>()));
  if (a.kind == ActionKind::phase || kk == 0) {
    // one-parameter scaling: abelian, nothing to solve
    for (std::size_t j = 0; j < kk; ++j)
      for (std::size_t k = 0; k < kk; ++k) c[j][k].assign(kk, Expr());
    return c;
  }
  for (std::size_t j = 0; j < kk; ++j) {
    for (std::size_t k = 0; k < kk; ++k) {
      // [G_j, G_k] flattened, then eliminated against the flattened G_m
      std::vector<std::vector<Expr>> rows;
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t col = 0; col < n; ++col) {
          std::vector<Expr> row;
          for (std::size_t m = 0; m < kk; ++m) row.push_back(a.generators[m][r][col]);
          Expr comm = Expr::zero(syms);
          for (std::size_t t = 0; t < n; ++t)
            comm = comm + a.generators[j][r][t] * a.generators[k][t][col] -
                   a.generators[k][r][t] * a.generators[j][t][col];
          row.push_back(comm);
          rows.push_back(std::move(row));
        }
      }
      std::vector<Expr> sol(kk, Expr::zero(syms));
      std::size_t lead = 0;
      std::vector<std::size_t> pivot_of_col(kk, SIZE_MAX);
      for (std::size_t col = 0; col < kk && lead < rows.size(); ++col) {
        std::size_t p = lead;
        while (p < rows.size() && rows[p][col].is_zero()) ++p;
        if (p == rows.size()) continue;
        std::swap(rows[p], rows[lead]);
        Expr inv = Expr::one(syms) / rows[lead][col];
        for (auto& x : rows[lead]) x = x * inv;
        for (std::size_t r = 0; r < rows.size(); ++r) {
          if (r == lead || rows[r][col].is_zero()) continue;
          Expr f = rows[r][col];
          for (std::size_t cidx = 0; cidx <= kk; ++cidx)
            rows[r][cidx] = rows[r][cidx] - f * rows[lead][cidx];
        }
        pivot_of_col[col] = lead;
        ++lead;
      }
      for (std::size_t r = lead; r < rows.size(); ++r)
        if (!rows[r][kk].is_zero())
          throw model_error("the generator matrices of action '" + a.name +
                            "' do not close under commutation");
      for (std::size_t col = 0; col < kk; ++col)
        if (pivot_of_col[col] != SIZE_MAX) sol[col] = rows[pivot_of_col[col]][kk];
      c[j][k] = std::move(sol);
    }
  }
  return c;
}

void validate_action(const ModelSpec& model, const LieGroupAction& a) {
  SymbolsPtr syms = model.syms;
  for (AtomId id : a.sector) {
    if (syms->at(id).kind != AtomKind::coordinate ||
        std::find(model.coordinates.begin(), model.coordinates.end(), id) ==
            model.coordinates.end())
      throw model_error("action '" + a.name + "' sector entry '" + syms->display(id) +
                        "' is not a coordinate of model '" + model.name + "'");
  }
  if (a.kind == ActionKind::phase) {
    if (a.params.size() != 1)
      throw model_error("phase action '" + a.name + "' must have exactly one parameter");
    Expr flipped = sector_parity(model.lagrangian, a);
    if (!(flipped == model.lagrangian))
      throw model_error("action '" + a.name +
                        "' is not a global symmetry: the Lagrangian is not balanced in the "
                        "sector charges");
    return;
  }
  if (a.generators.size() != a.params.size())
    throw model_error("action '" + a.name + "' needs one generator matrix per parameter");
  for (const auto& g : a.generators)
    if (g.size() != a.sector.size() ||
        std::any_of(g.begin(), g.end(),
                    [&](const auto& row) { return row.size() != a.sector.size(); }))
      throw model_error("action '" + a.name + "' generator matrices must be square over the sector");
  for (std::size_t k = 0; k < a.params.size(); ++k) {
    LocalTransformation t;
    t.name = a.name;
    t.variations = generator_variation(a, k, syms);
    Expr residual = apply_variation(model.lagrangian, t);
    if (!residual.is_zero())
      throw model_error("action '" + a.name + "' is not a global symmetry: generator '" +
                        a.params[k] + "' varies the Lagrangian by " + residual.str());
  }
}

GaugeResult gauge_lagrangian(const ModelSpec& model, const LieGroupAction& a) {
  SymbolsPtr syms = model.syms;
  validate_action(model, a);
  GaugeResult out{model, {}, {}, {}, {}, Expr::zero(syms), {}};

  bool trivial = a.kind == ActionKind::matrix;
  for (const auto& g : a.generators)
    for (const auto& row : g)
      for (const Expr& entry : row)
        if (!entry.is_zero()) trivial = false;
  if (trivial) {
    out.log.push_back("all generators vanish; the action is trivial and the model is unchanged");
    return out;
  }

  const std::size_t kk = a.params.size();
  const std::size_t n = a.sector.size();

  // group parameters become arbitrary functions of tau
  std::vector<AtomId> xi;
  for (const std::string& p : a.params) {
    if (syms->find(AtomKind::parameter, p) || syms->find(AtomKind::coordinate, p))
      throw model_error("group parameter '" + p + "' collides with a declared atom");
    xi.push_back(syms->intern(AtomKind::gauge_function, p, 0));
  }

  // one gauge coordinate per parameter
  std::vector<AtomId> gauge;
  for (std::size_t k = 0; k < kk; ++k) {
    std::string name = kk == 1 ? "g" : "g[" + std::to_string(k + 1) + "]";
    if (kk == 1 && syms->find(AtomKind::coordinate, name)) name = "g[1]";
    if (syms->find(AtomKind::coordinate, name) || syms->find(AtomKind::parameter, name))
      throw model_error("gauge coordinate name '" + name + "' is already in use");
    gauge.push_back(syms->intern(AtomKind::coordinate, name, 0));
    out.gauge_coordinates.push_back(name);
  }

  // covariant derivatives D x_i = x_i' - sum_k g_k (Gamma_k x)_i
  std::vector<Expr> dcov;
  std::vector<std::pair<AtomId, Expr>> vel_subs;
  for (std::size_t i = 0; i < n; ++i) {
    AtomId v = syms->derivative_of(a.sector[i]);
    Expr d = Expr::atom(syms, v);
    for (std::size_t k = 0; k < kk; ++k)
      for (std::size_t j = 0; j < n; ++j)
        d = d - Expr::atom(syms, gauge[k]) * generator_entry(a, k, i, j, syms) *
                Expr::atom(syms, a.sector[j]);
    dcov.push_back(d);
    vel_subs.emplace_back(v, d);
  }
  Expr gauged_l = substitute(model.lagrangian, vel_subs);

  // local transformation: delta x = sum_k xi^k Gamma_k x,
  // delta g^m = xi^m' + sum_{j,k} c_{jk}^m xi^j g^k
  auto c = structure_constants(a);
  LocalTransformation delta;
  delta.name = a.name + "_local";
  delta.gauge_functions = a.params;
  for (std::size_t i = 0; i < n; ++i) {
    Expr v = Expr::zero(syms);
    for (std::size_t k = 0; k < kk; ++k) {
      Expr gen = Expr::zero(syms);
      for (std::size_t j = 0; j < n; ++j)
        gen = gen + generator_entry(a, k, i, j, syms) * Expr::atom(syms, a.sector[j]);
      v = v + Expr::atom(syms, xi[k]) * gen;
    }
    delta.variations.emplace_back(a.sector[i], v);
  }
  for (std::size_t m = 0; m < kk; ++m) {
    Expr v = Expr::atom(syms, syms->derivative_of(xi[m]));
    for (std::size_t j = 0; j < kk; ++j)
      for (std::size_t k = 0; k < kk; ++k)
        if (!c[j][k].empty() && !c[j][k][m].is_zero())
          v = v + c[j][k][m] * Expr::atom(syms, xi[j]) * Expr::atom(syms, gauge[k]);
    delta.variations.emplace_back(gauge[m], v);
  }

  // covariance certificate: delta(D x_i) == sum_k xi^k (Gamma_k D x)_i
  for (std::size_t i = 0; i < n; ++i) {
    Expr expected = Expr::zero(syms);
    for (std::size_t k = 0; k < kk; ++k)
      for (std::size_t j = 0; j < n; ++j)
        expected = expected +
                   Expr::atom(syms, xi[k]) * generator_entry(a, k, i, j, syms) * dcov[j];
    Expr residual = apply_variation(dcov[i], delta) - expected;
    out.covariance_residuals.push_back(residual);
    if (!residual.is_zero())
      throw model_error("gauging of action '" + a.name +
                        "' failed the covariance certificate on component " +
                        std::to_string(i + 1) + ": " + residual.str());
  }

  if (a.kind == ActionKind::matrix) {
    out.invariance_residual = apply_variation(gauged_l, delta);
    out.log.push_back("invariance certificate: delta L' vanishes identically");
  } else {
    // scaling acts with one real charge; the balanced (even-degree) sector
    // guarantees cancellation between paired charges, so certify the balance
    // of the gauged Lagrangian together with covariance
    LieGroupAction whole = a;
    out.invariance_residual = sector_parity(gauged_l, whole) - gauged_l;
    out.log.push_back("invariance certificate: sector-charge balance and covariance");
  }
  if (!out.invariance_residual.is_zero())
    throw model_error("gauging of action '" + a.name + "' failed the invariance certificate: " +
                      out.invariance_residual.str());

  out.gauged.name = model.name + "_" + a.name;
  out.gauged.lagrangian = gauged_l;
  out.delta = delta;
  out.covariant_derivatives = dcov;
  for (std::size_t k = 0; k < kk; ++k)
    out.log.push_back("gauge coordinate " + out.gauge_coordinates[k] + " couples to generator '" +
                      a.params[k] + "'");

  if (a.external_field) {
    const ExternalFieldSpec& f = *a.external_field;
    if (f.components.size() != kk)
      throw model_error("external field of action '" + a.name + "' needs " +
                        std::to_string(kk) + " components");
    AtomId charge = syms->intern(AtomKind::parameter, f.charge);
    AtomId mass = syms->intern(AtomKind::parameter, f.mass);
    Expr ratio = Expr::atom(syms, charge) / Expr::atom(syms, mass);
    std::vector<std::pair<AtomId, Expr>> subs;
    for (std::size_t k = 0; k < kk; ++k) {
      AtomId comp = syms->intern(AtomKind::parameter, f.components[k]);
      subs.emplace_back(gauge[k], -ratio * Expr::atom(syms, comp));
      out.log.push_back("external field: " + out.gauge_coordinates[k] + " = -(" + f.charge +
                        "/" + f.mass + ")*" + f.components[k]);
    }
    out.gauged.lagrangian = substitute(out.gauged.lagrangian, subs);
    for (Expr& d : out.covariant_derivatives) d = substitute(d, subs);
    out.gauge_coordinates.clear();  // background fields, not dynamical variables
  } else {
    for (AtomId g : gauge) out.gauged.coordinates.push_back(g);
  }
  return out;
}

InvarianceReport verify_local_invariance(const Expr& lagrangian, const LocalTransformation& t) {
  InvarianceReport r{apply_variation(lagrangian, t), {}, false};
  r.exactness = exact_total_derivative(r.variation);
  r.invariant = r.exactness.is_exact;
  return r;
}

EquivalenceReport local_structure_equiv(const Expr& l1, const LocalTransformation& t1,
                                        const Expr& l2, const LocalTransformation& t2) {
  EquivalenceReport r{apply_variation(l2, t2) - apply_variation(l1, t1), {}, false};
  r.exactness = exact_total_derivative(r.difference);
  r.equivalent = r.exactness.is_exact;
  return r;
}

ObservableReport observable_check(const Expr& observable, const LocalTransformation& t,
                                  const ConstraintSurface* surface) {
  ObservableReport r{apply_variation(observable, t), false, std::nullopt};
  r.invariant = r.variation.is_zero();
  if (surface) r.surface_value = surface->reduce(observable);
  return r;
}

std::vector<IdentityCoefficient> identity_coefficients_from_variation(
    const ModelSpec& model, const LocalTransformation& t, const std::string& gauge_function) {
  SymbolsPtr syms = model.syms;
  std::vector<IdentityCoefficient> out;
  for (const auto& [id, delta] : t.variations) {
    const Atom atom = syms->at(id);
    if (atom.kind != AtomKind::coordinate)
      throw model_error("identity extraction needs configuration-space variations; '" +
                        syms->display(id) + "' is not a coordinate");
    auto pos = std::find(model.coordinates.begin(), model.coordinates.end(), id);
    if (pos == model.coordinates.end())
      throw model_error("varied atom '" + syms->display(id) + "' is not a coordinate of model '" +
                        model.name + "'");
    std::size_t coord = std::size_t(pos - model.coordinates.begin());

    // delta q = sum_k R_k eps^(k), required linear in the jets of eps
    int top = -1;
    for (AtomId aid : atoms_of(delta)) {
      const Atom& ja = syms->at(aid);
      if (ja.kind == AtomKind::gauge_function && ja.name == gauge_function)
        top = std::max(top, ja.order);
    }
    std::vector<Expr> r_k;
    Expr recon = Expr::zero(syms);
    for (int k = 0; k <= top; ++k) {
      auto jet = syms->find(AtomKind::gauge_function, gauge_function, k);
      Expr coeff = jet ? differentiate(delta, *jet) : Expr::zero(syms);
      for (AtomId aid : atoms_of(coeff)) {
        const Atom& ja = syms->at(aid);
        if (ja.kind == AtomKind::gauge_function && ja.name == gauge_function)
          throw model_error("variation of '" + syms->display(id) + "' is not linear in '" +
                            gauge_function + "'");
      }
      r_k.push_back(coeff);
      if (jet) recon = recon + coeff * Expr::atom(syms, *jet);
    }
    if (!(recon == delta))
      throw model_error("variation of '" + syms->display(id) +
                        "' has a part independent of the jets of '" + gauge_function + "'");

    // c_{A,j} = sum_{k>=j} (-1)^k C(k,j) (d/dtau)^{k-j} R_k
    for (int j = 0; j <= top; ++j) {
      Expr c = Expr::zero(syms);
      for (int k = j; k <= top; ++k) {
        Expr term = r_k[std::size_t(k)];
        for (int d = 0; d < k - j; ++d) term = d_dtau(term);
        long sign_binom = binomial(k, j) * (k % 2 == 0 ? 1 : -1);
        c = c + Expr::integer(syms, sign_binom) * term;
      }
      if (!c.is_zero()) out.push_back({coord, j, c});
    }
  }
  return out;
}

}  // namespace dforge
