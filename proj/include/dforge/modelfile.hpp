#pragma once
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "dforge/gaugeprin.hpp"
#include "dforge/mechmodel.hpp"

namespace dforge {

// Power substitution bound in the model file: atom^power -> value, applied
// to reported relations (e.g. b^2 = 3*hbar^2/4).
struct PowerSubstitution {
  AtomId atom;
  int power = 1;
  Expr value;
};

struct SimulationSpec {
  struct Run {
    std::string name;
    std::vector<std::pair<std::string, Expr>> multipliers;  // name -> tau-function
  };
  std::string name;
  mpq_class tau0, tau1, step;
  std::vector<std::pair<std::string, mpq_class>> init;  // atom display name -> value
  std::vector<std::pair<std::string, Expr>> observables;
  double drift_tol = 1e-6;
  std::vector<Run> runs;
};

// One parsed model file: the mechanical model plus every auxiliary block.
struct ModelFile {
  ModelSpec model;
  std::vector<LocalTransformation> transformations;
  std::vector<LieGroupAction> actions;
  std::vector<std::pair<std::string, Expr>> gauges;
  std::vector<PowerSubstitution> substitutions;
  std::vector<std::pair<std::string, mpq_class>> bindings;
  std::vector<SimulationSpec> simulations;

  const LocalTransformation& transformation(const std::string& name) const;
  const LieGroupAction& action(const std::string& name) const;
};

// Line-oriented sections with [section] headers and key = value entries;
// expressions in the kernel grammar; '#' comment lines; trailing backslash
// continues a line. Throws model_error with a line reference on bad input.
// Passing `share` parses into an existing symbol table so expressions from
// several files can be combined (same-name atoms unify).
ModelFile parse_model_file(std::istream& in, const std::string& display_name,
                           SymbolsPtr share = nullptr);
ModelFile load_model_file(const std::string& path, SymbolsPtr share = nullptr);

// Exact rational literal: integer, fraction, or finite decimal.
mpq_class parse_exact_number(const std::string& text);

// Serialize a model (with optional transformations) so that it re-parses to
// the same canonical forms. Used by the gauging pipeline to emit results.
void write_model_file(const ModelFile& mf, std::ostream& os);

}  // namespace dforge
