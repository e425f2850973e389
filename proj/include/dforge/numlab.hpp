#pragma once
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "dforge/mechmodel.hpp"

namespace dforge {

// Free-multiplier function of the evolution parameter.
using MultiplierFn = std::function<double(double)>;

struct NumericOptions {
  double drift_tol = 1e-6;        // residual magnitude that flags a run
  bool project_initial = false;   // one orthogonal projection of bad initial data
  double projection_tol = 1e-10;  // residual bound after projection
  unsigned seed = 20260814;       // evaluator spot-check sampling
};

struct Trajectory {
  std::vector<std::string> state_names;       // coords then momenta
  std::vector<std::string> residual_names;    // constraint labels
  std::vector<std::string> observable_names;
  std::vector<double> taus;
  std::vector<std::vector<double>> states;
  std::vector<std::vector<double>> residuals;
  std::vector<std::vector<double>> observables;
  double max_drift = 0.0;
  bool drift_flagged = false;
};

// Maximum pointwise deviation per column (states, residuals, observables).
// Throws numerical_error when the tau grids differ.
std::vector<std::pair<std::string, double>> compare_orbits(const Trajectory& a,
                                                           const Trajectory& b);

// tau, states, residuals, observables at 17 significant digits.
void write_csv(const Trajectory& t, std::ostream& os);

// A stabilized Hamiltonian system compiled to double-precision evaluators.
// Every parameter is bound to an exact rational before compilation;
// determined multipliers enter through the effective total Hamiltonian and
// the remaining free ones become caller-supplied functions of tau. Each
// compiled evaluator is spot-checked against exact rational evaluation at
// random points before use.
class NumericModel {
 public:
  NumericModel(const HamiltonianSystem& hs,
               const std::vector<std::pair<std::string, mpq_class>>& parameter_bindings,
               NumericOptions opt = {});

  // Free multiplier by atom name (e.g. "lambda_z"). All free multipliers
  // must be supplied before integration.
  void set_multiplier(const std::string& name, MultiplierFn fn);

  // First-order coordinate jets in e are replaced by the canonical
  // velocities dq/dtau = dH_T/dp before compilation.
  void add_observable(const std::string& name, const Expr& e);

  // Classic fixed-step fourth-order Runge-Kutta over [tau0, tau1]. The
  // initial state lists coordinates then momenta in canonical-pair order.
  Trajectory integrate(std::vector<double> initial, double tau0, double tau1,
                       double step) const;

  const std::vector<std::string>& state_names() const { return state_names_; }
  const std::vector<std::string>& free_multipliers() const { return free_names_; }

 private:
  struct Compiled {
    struct Term {
      double c;
      std::vector<std::pair<std::size_t, int>> pows;  // slot, exponent
    };
    std::vector<Term> num, den;  // den empty means constant 1
    double eval(const std::vector<double>& slots) const;
  };

  Compiled compile(const Expr& e) const;
  void self_check(const Expr& e, const Compiled& c) const;
  void fill_slots(double tau, const double* y, std::vector<double>& slots) const;
  void rhs(double tau, const double* y, double* dy) const;
  std::vector<double> project(const std::vector<double>& y) const;

  SymbolsPtr syms_;
  NumericOptions opt_;
  std::size_t n_ = 0;  // canonical pairs
  std::vector<AtomId> slot_atoms_;  // coords, momenta, tau, free multipliers
  std::vector<std::string> state_names_;
  std::vector<std::string> free_names_;
  std::vector<MultiplierFn> free_fns_;
  std::vector<std::pair<AtomId, Expr>> bindings_;
  std::vector<std::pair<AtomId, Expr>> velocity_subs_;
  std::vector<Compiled> rhs_;                       // 2n entries
  std::vector<std::pair<std::string, Compiled>> residuals_;
  std::vector<Expr> residual_exprs_;
  std::vector<std::pair<std::string, Compiled>> observables_;
};

// Compile a rational function of tau alone into a multiplier function.
MultiplierFn tau_polynomial(const Expr& e);

}  // namespace dforge
