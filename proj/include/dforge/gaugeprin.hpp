#pragma once
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dforge/calculus.hpp"
#include "dforge/dirac_chain.hpp"
#include "dforge/mechmodel.hpp"

namespace dforge {

// A local transformation: one variation expression per varied atom,
// parameterized by arbitrary functions of tau (gauge functions). Entries may
// vary coordinates (prolonged to their jets when applied) or momenta (for
// phase-space transformations produced by first-class generators).
struct LocalTransformation {
  std::string name;
  std::vector<std::pair<AtomId, Expr>> variations;
  std::vector<std::string> gauge_functions;
};

// First variation of e under t. Coordinate entries act on the whole jet
// family through delta q^(j) = (d/dtau)^j delta q; momentum entries act
// directly. Atoms absent from t are held fixed.
Expr apply_variation(const Expr& e, const LocalTransformation& t);

// Phase-space variation generated by a first-class combination, repackaged
// as a transformation usable by observable_check.
LocalTransformation as_transformation(const GeneratedVariation& v);

enum class ActionKind { phase, matrix };

// Optional background binding: after the gauged Lagrangian is certified,
// each gauge variable g^k is replaced by -(charge/mass) * component_k and
// demoted from a dynamical coordinate to an external field.
struct ExternalFieldSpec {
  std::vector<std::string> components;  // parameter names, one per group parameter
  std::string charge;
  std::string mass;
};

// A global Lie-group action on a coordinate sector. `phase` scales the whole
// sector by one parameter; `matrix` acts linearly with one constant-entry
// generator matrix per parameter.
struct LieGroupAction {
  std::string name;
  ActionKind kind = ActionKind::matrix;
  std::vector<std::string> params;               // group parameter names
  std::vector<AtomId> sector;                    // acted-on coordinates
  std::vector<std::vector<std::vector<Expr>>> generators;  // [param][row][col]
  std::optional<ExternalFieldSpec> external_field;
};

// Structure constants c[j][k][m] with [G_j, G_k] = sum_m c_{jk}^m G_m,
// solved exactly; throws model_error when the matrices do not close.
std::vector<std::vector<std::vector<Expr>>> structure_constants(const LieGroupAction& a);

// Check that the action is a global symmetry of the model's Lagrangian:
// matrix actions must leave it strictly invariant generator by generator,
// phase actions must see only even sector degrees (so the paired-charge
// combination cancels). Throws model_error otherwise.
void validate_action(const ModelSpec& model, const LieGroupAction& a);

struct GaugeResult {
  ModelSpec gauged;                      // sector velocities -> covariant derivatives
  LocalTransformation delta;             // local transformation of the gauged model
  std::vector<std::string> gauge_coordinates;
  std::vector<Expr> covariant_derivatives;   // one per sector component
  std::vector<Expr> covariance_residuals;    // delta(Dx) - xi.G.Dx, all zero
  Expr invariance_residual;              // delta L' (zero for matrix actions)
  std::vector<std::string> log;
};

// Gauge the action: promote parameters to gauge functions, adjoin one gauge
// coordinate per parameter, and replace sector velocities by covariant
// derivatives. Certifies covariance and invariance before applying any
// external-field binding. Throws model_error when certification fails.
GaugeResult gauge_lagrangian(const ModelSpec& model, const LieGroupAction& a);

struct InvarianceReport {
  Expr variation;        // delta L
  ExactnessResult exactness;
  bool invariant = false;  // delta L is a total tau-derivative
};
InvarianceReport verify_local_invariance(const Expr& lagrangian, const LocalTransformation& t);

struct EquivalenceReport {
  Expr difference;       // delta2 L2 - delta1 L1
  ExactnessResult exactness;
  bool equivalent = false;  // difference is a total tau-derivative
};
// Same-local-structure test: L1 ~ L2 when the variations differ by a total
// derivative, witnessed by the reconstructed primitive F.
EquivalenceReport local_structure_equiv(const Expr& l1, const LocalTransformation& t1,
                                        const Expr& l2, const LocalTransformation& t2);

struct ObservableReport {
  Expr variation;
  bool invariant = false;          // variation vanishes identically
  std::optional<Expr> surface_value;  // reduction on the supplied surface
};
ObservableReport observable_check(const Expr& observable, const LocalTransformation& t,
                                  const ConstraintSurface* surface = nullptr);

// Extract the coefficients c_{A,k} of the differential identity
// sum_{A,k} c_{A,k} (d/dtau)^k E_A = 0 that Noether's second theorem
// associates with a local symmetry delta q^A = sum_k R_{A,k} eps^(k).
// The variation must be linear in the jets of the named gauge function.
std::vector<IdentityCoefficient> identity_coefficients_from_variation(
    const ModelSpec& model, const LocalTransformation& t, const std::string& gauge_function);

}  // namespace dforge
