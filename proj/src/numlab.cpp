#include "dforge/numlab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include "dforge/calculus.hpp"

namespace dforge {
namespace {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Exact evaluation of a polynomial at rational slot values.
mpq_class eval_poly_q(const Poly& p, const std::map<AtomId, mpq_class>& vals) {
  mpq_class acc = 0;
  for (const auto& [mono, coeff] : p.t) {
    mpq_class term(coeff);
    for (const auto& [atom, exp] : mono.f) {
      const mpq_class& v = vals.at(atom);
      for (int i = 0; i < exp; ++i) term *= v;
    }
    acc += term;
  }
  return acc;
}

}  // namespace

double NumericModel::Compiled::eval(const std::vector<double>& slots) const {
  auto part = [&](const std::vector<Term>& terms) {
    double acc = 0;
    for (const Term& t : terms) {
      double v = t.c;
      for (const auto& [slot, exp] : t.pows) {
        double base = slots[slot];
        for (int i = 0; i < exp; ++i) v *= base;
      }
      acc += v;
    }
    return acc;
  };
  double num = part(this->num);
  return den.empty() ? num : num / part(den);
}

NumericModel::NumericModel(const HamiltonianSystem& hs,
                           const std::vector<std::pair<std::string, mpq_class>>& parameter_bindings,
                           NumericOptions opt)
    : syms_(hs.syms), opt_(opt), n_(hs.pairs.size()) {
  for (const auto& [q, p] : hs.pairs) slot_atoms_.push_back(q);
  for (const auto& [q, p] : hs.pairs) slot_atoms_.push_back(p);
  for (AtomId id : slot_atoms_) state_names_.push_back(syms_->display(id));
  slot_atoms_.push_back(syms_->tau());
  for (const auto& m : hs.multipliers) {
    if (m.determined) continue;
    slot_atoms_.push_back(m.atom);
    free_names_.push_back(syms_->display(m.atom));
  }
  free_fns_.resize(free_names_.size());

  for (const auto& [name, value] : parameter_bindings)
    if (auto id = syms_->find(AtomKind::parameter, name))
      bindings_.emplace_back(*id, Expr::rational(syms_, value));

  Expr h = substitute(hs.total_hamiltonian_effective(), bindings_);
  std::vector<Expr> qdots;
  for (std::size_t i = 0; i < n_; ++i) qdots.push_back(differentiate(h, hs.pairs[i].second));
  for (std::size_t i = 0; i < n_; ++i)
    velocity_subs_.emplace_back(syms_->derivative_of(hs.pairs[i].first), qdots[i]);

  for (std::size_t i = 0; i < n_; ++i) {
    rhs_.push_back(compile(qdots[i]));
    self_check(qdots[i], rhs_.back());
  }
  for (std::size_t i = 0; i < n_; ++i) {
    Expr pdot = -differentiate(h, hs.pairs[i].first);
    rhs_.push_back(compile(pdot));
    self_check(pdot, rhs_.back());
  }
  for (const auto& c : hs.constraints) {
    Expr r = substitute(c.expr, bindings_);
    residual_exprs_.push_back(r);
    residuals_.emplace_back(c.label, compile(r));
    self_check(r, residuals_.back().second);
  }
}

NumericModel::Compiled NumericModel::compile(const Expr& e) const {
  std::map<AtomId, std::size_t> slot_of;
  for (std::size_t i = 0; i < slot_atoms_.size(); ++i) slot_of[slot_atoms_[i]] = i;
  auto build = [&](const Poly& p, std::vector<Compiled::Term>& out) {
    for (const auto& [mono, coeff] : p.t) {
      Compiled::Term t;
      t.c = coeff.get_d();
      for (const auto& [atom, exp] : mono.f) {
        auto it = slot_of.find(atom);
        if (it == slot_of.end()) {
          const Atom& a = syms_->at(atom);
          if (a.kind == AtomKind::parameter)
            throw numerical_error("parameter '" + a.name + "' has no numeric binding");
          throw numerical_error("expression depends on '" + syms_->display(atom) +
                                "', which has no numeric slot");
        }
        t.pows.emplace_back(it->second, exp);
      }
      out.push_back(std::move(t));
    }
  };
  Compiled c;
  build(e.num(), c.num);
  const Poly& d = e.den();
  bool unit = d.t.size() == 1 && d.t[0].first.f.empty() && d.t[0].second == 1;
  if (!unit) build(d, c.den);
  return c;
}

void NumericModel::self_check(const Expr& e, const Compiled& c) const {
  static unsigned salt = 0;
  std::mt19937 rng(opt_.seed + 0x9e37 * salt++);
  std::uniform_int_distribution<int> pick(-24, 24);
  int made = 0, guard = 0;
  while (made < 10 && guard < 1000) {
    ++guard;
    std::map<AtomId, mpq_class> vals;
    std::vector<double> slots(slot_atoms_.size());
    for (std::size_t i = 0; i < slot_atoms_.size(); ++i) {
      mpq_class v(pick(rng), 8);
      v.canonicalize();
      vals[slot_atoms_[i]] = v;
      slots[i] = v.get_d();
    }
    mpq_class den = eval_poly_q(e.den(), vals);
    if (abs(den) < mpq_class(1, 4)) continue;  // stay away from poles
    mpq_class exact = eval_poly_q(e.num(), vals) / den;
    double got = c.eval(slots);
    double want = exact.get_d();
    if (std::abs(got - want) > 1e-12 * std::max(1.0, std::abs(want)))
      throw numerical_error("compiled evaluator disagrees with exact arithmetic on " + e.str());
    ++made;
  }
  if (made < 10) throw numerical_error("could not sample the evaluator of " + e.str());
}

void NumericModel::set_multiplier(const std::string& name, MultiplierFn fn) {
  for (std::size_t j = 0; j < free_names_.size(); ++j) {
    if (free_names_[j] == name) {
      free_fns_[j] = std::move(fn);
      return;
    }
  }
  throw numerical_error("'" + name + "' is not a free multiplier of this system");
}

void NumericModel::add_observable(const std::string& name, const Expr& e) {
  Expr x = substitute(substitute(e, velocity_subs_), bindings_);
  for (AtomId id : x.atoms())
    if (syms_->at(id).kind == AtomKind::derivative)
      throw numerical_error("observable '" + name + "' contains the higher jet '" +
                            syms_->display(id) + "'");
  Compiled c = compile(x);
  self_check(x, c);
  observables_.emplace_back(name, std::move(c));
}

void NumericModel::fill_slots(double tau, const double* y, std::vector<double>& slots) const {
  for (std::size_t i = 0; i < 2 * n_; ++i) slots[i] = y[i];
  slots[2 * n_] = tau;
  for (std::size_t j = 0; j < free_fns_.size(); ++j) slots[2 * n_ + 1 + j] = free_fns_[j](tau);
}

void NumericModel::rhs(double tau, const double* y, double* dy) const {
  std::vector<double> slots(slot_atoms_.size());
  fill_slots(tau, y, slots);
  for (std::size_t i = 0; i < 2 * n_; ++i) dy[i] = rhs_[i].eval(slots);
}

std::vector<double> NumericModel::project(const std::vector<double>& y) const {
  // one orthogonal step y -> y - J^T (J J^T)^{-1} r
  const std::size_t m = residual_exprs_.size(), dim = 2 * n_;
  std::vector<double> slots(slot_atoms_.size());
  fill_slots(0.0, y.data(), slots);
  std::vector<double> r(m);
  std::vector<std::vector<double>> jac(m, std::vector<double>(dim, 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    r[i] = residuals_[i].second.eval(slots);
    for (std::size_t j = 0; j < dim; ++j) {
      Expr g = differentiate(residual_exprs_[i], slot_atoms_[j]);
      jac[i][j] = compile(g).eval(slots);
    }
  }
  // normal equations (J J^T) x = r
  std::vector<std::vector<double>> a(m, std::vector<double>(m + 1, 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < m; ++k)
      for (std::size_t j = 0; j < dim; ++j) a[i][k] += jac[i][j] * jac[k][j];
    a[i][m] = r[i];
  }
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t p = col;
    for (std::size_t i = col + 1; i < m; ++i)
      if (std::abs(a[i][col]) > std::abs(a[p][col])) p = i;
    if (std::abs(a[p][col]) < 1e-14) throw numerical_error("initial projection is degenerate");
    std::swap(a[p], a[col]);
    for (std::size_t i = 0; i < m; ++i) {
      if (i == col) continue;
      double f = a[i][col] / a[col][col];
      for (std::size_t j = col; j <= m; ++j) a[i][j] -= f * a[col][j];
    }
  }
  std::vector<double> out = y;
  for (std::size_t j = 0; j < dim; ++j) {
    double shift = 0;
    for (std::size_t i = 0; i < m; ++i) shift += jac[i][j] * a[i][m] / a[i][i];
    out[j] -= shift;
  }
  return out;
}

Trajectory NumericModel::integrate(std::vector<double> initial, double tau0, double tau1,
                                   double step) const {
  for (std::size_t j = 0; j < free_fns_.size(); ++j)
    if (!free_fns_[j])
      throw numerical_error("free multiplier '" + free_names_[j] + "' was not supplied");
  if (initial.size() != 2 * n_)
    throw numerical_error("initial state needs " + std::to_string(2 * n_) + " entries");
  if (!(step > 0) || !(tau1 > tau0)) throw numerical_error("empty integration interval");
  double span = tau1 - tau0;
  auto steps = static_cast<long long>(std::llround(span / step));
  if (steps < 1 || std::abs(steps * step - span) > 1e-9 * std::max(1.0, span))
    throw numerical_error("the step does not divide the integration interval");

  Trajectory out;
  out.state_names = state_names_;
  for (const auto& [label, c] : residuals_) out.residual_names.push_back(label);
  for (const auto& [name, c] : observables_) out.observable_names.push_back(name);

  std::vector<double> slots(slot_atoms_.size());
  auto residual_row = [&](double tau, const std::vector<double>& y, std::vector<double>& row) {
    fill_slots(tau, y.data(), slots);
    row.resize(residuals_.size());
    for (std::size_t i = 0; i < residuals_.size(); ++i) row[i] = residuals_[i].second.eval(slots);
  };

  std::vector<double> y = initial, row;
  residual_row(tau0, y, row);
  bool bad = std::any_of(row.begin(), row.end(),
                         [&](double v) { return std::abs(v) > opt_.drift_tol; });
  if (bad && opt_.project_initial) {
    y = project(y);
    residual_row(tau0, y, row);
    for (std::size_t i = 0; i < row.size(); ++i)
      if (std::abs(row[i]) > opt_.projection_tol)
        throw numerical_error("initial data still violate " + residuals_[i].first +
                              " after projection (" + fmt17(row[i]) + ")");
  } else if (bad) {
    for (std::size_t i = 0; i < row.size(); ++i)
      if (std::abs(row[i]) > opt_.drift_tol)
        throw numerical_error("initial data violate " + residuals_[i].first + " by " +
                              fmt17(row[i]));
  }

  auto record = [&](double tau, const std::vector<double>& st) {
    out.taus.push_back(tau);
    out.states.push_back(st);
    residual_row(tau, st, row);
    for (double v : row) out.max_drift = std::max(out.max_drift, std::abs(v));
    out.residuals.push_back(row);
    fill_slots(tau, st.data(), slots);
    std::vector<double> obs(observables_.size());
    for (std::size_t i = 0; i < observables_.size(); ++i) obs[i] = observables_[i].second.eval(slots);
    out.observables.push_back(std::move(obs));
  };

  const std::size_t dim = 2 * n_;
  std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
  record(tau0, y);
  // Grid points by proportion of the span so the final point lands on tau1
  // exactly and identical grids stay bitwise comparable across runs.
  auto grid = [&](long long s) { return tau0 + span * (double(s) / double(steps)); };
  for (long long s = 0; s < steps; ++s) {
    double tau = grid(s);
    rhs(tau, y.data(), k1.data());
    for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + 0.5 * step * k1[i];
    rhs(tau + 0.5 * step, tmp.data(), k2.data());
    for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + 0.5 * step * k2[i];
    rhs(tau + 0.5 * step, tmp.data(), k3.data());
    for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + step * k3[i];
    rhs(tau + step, tmp.data(), k4.data());
    for (std::size_t i = 0; i < dim; ++i)
      y[i] += step / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    record(grid(s + 1), y);
  }
  out.drift_flagged = out.max_drift > opt_.drift_tol;
  return out;
}

std::vector<std::pair<std::string, double>> compare_orbits(const Trajectory& a,
                                                           const Trajectory& b) {
  if (a.taus.size() != b.taus.size() || !std::equal(a.taus.begin(), a.taus.end(), b.taus.begin()))
    throw numerical_error("orbit comparison needs identical tau grids");
  if (a.state_names != b.state_names || a.residual_names != b.residual_names ||
      a.observable_names != b.observable_names)
    throw numerical_error("orbit comparison needs identical column sets");
  std::vector<std::pair<std::string, double>> out;
  auto scan = [&](const std::vector<std::string>& names, const std::string& prefix,
                  const std::vector<std::vector<double>>& xs,
                  const std::vector<std::vector<double>>& ys) {
    for (std::size_t c = 0; c < names.size(); ++c) {
      double dev = 0;
      for (std::size_t r = 0; r < xs.size(); ++r)
        dev = std::max(dev, std::abs(xs[r][c] - ys[r][c]));
      out.emplace_back(prefix + names[c], dev);
    }
  };
  scan(a.state_names, "", a.states, b.states);
  scan(a.residual_names, "res:", a.residuals, b.residuals);
  scan(a.observable_names, "", a.observables, b.observables);
  return out;
}

void write_csv(const Trajectory& t, std::ostream& os) {
  os << "tau";
  for (const auto& n : t.state_names) os << "," << n;
  for (const auto& n : t.residual_names) os << ",res:" << n;
  for (const auto& n : t.observable_names) os << "," << n;
  os << "\n";
  for (std::size_t r = 0; r < t.taus.size(); ++r) {
    os << fmt17(t.taus[r]);
    for (double v : t.states[r]) os << "," << fmt17(v);
    for (double v : t.residuals[r]) os << "," << fmt17(v);
    for (double v : t.observables[r]) os << "," << fmt17(v);
    os << "\n";
  }
}

MultiplierFn tau_polynomial(const Expr& e) {
  SymbolsPtr syms = e.symbols();
  AtomId tau = syms->tau();
  for (AtomId id : e.atoms())
    if (id != tau)
      throw numerical_error("multiplier function may depend on tau only, found '" +
                            syms->display(id) + "'");
  auto coeffs = [&](const Poly& p) {
    std::vector<double> c(std::size_t(std::max(0, poly_degree_in(p, tau))) + 1, 0.0);
    for (const auto& [mono, coeff] : p.t) {
      int exp = mono.f.empty() ? 0 : mono.f[0].second;
      c[std::size_t(exp)] = coeff.get_d();
    }
    return c;
  };
  std::vector<double> num = coeffs(e.num()), den = coeffs(e.den());
  auto horner = [](const std::vector<double>& c, double x) {
    double acc = 0;
    for (std::size_t i = c.size(); i-- > 0;) acc = acc * x + c[i];
    return acc;
  };
  return [num, den, horner](double tau_val) {
    return horner(num, tau_val) / horner(den, tau_val);
  };
}

}  // namespace dforge
