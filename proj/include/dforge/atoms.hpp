#pragma once
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "dforge/errors.hpp"

namespace dforge {

// Atom kinds, ordered. The enum value participates in the canonical atom
// order, which in turn drives the monomial order: coordinates sort before
// velocities, velocities before momenta, and so on. Changing this order
// changes every printed expression, so treat it as part of the format.
enum class AtomKind : std::uint8_t {
  coordinate = 0,
  derivative = 1,   // tau-derivative of a coordinate, order >= 1
  momentum = 2,
  multiplier = 3,
  parameter = 4,
  evolution = 5,    // the evolution parameter itself (tau)
  gauge_function = 6,  // arbitrary function of tau, with jet orders >= 0
};

struct Atom {
  AtomKind kind;
  std::string name;  // base name, no primes; may contain an index like v[1]
  int order = 0;     // > 0 only for derivative and gauge_function kinds
};

using AtomId = std::uint32_t;

// Append-only symbol table. Every Expr in a computation shares one table;
// ids are stable for the lifetime of the table. The evolution atom "tau"
// is interned on construction.
class Symbols {
 public:
  Symbols();

  AtomId intern(AtomKind kind, const std::string& name, int order = 0);
  std::optional<AtomId> find(AtomKind kind, const std::string& name, int order = 0) const;
  const Atom& at(AtomId id) const { return atoms_[id]; }
  std::size_t size() const { return atoms_.size(); }
  AtomId tau() const { return tau_; }

  // Resolve a parsed token: base name plus prime count. Derivative atoms of
  // declared coordinates (and higher orders of declared gauge functions) are
  // interned on demand. Returns nullopt for undeclared names; throws
  // kernel_error when the name is declared but cannot carry a derivative.
  std::optional<AtomId> resolve(const std::string& name, int order);

  // The d/dtau image of a jet atom (coordinate -> first derivative, etc).
  // Throws kernel_error for kinds that have no jet prolongation.
  AtomId derivative_of(AtomId id);

  // Total order (kind, name, order); returns <0, 0, >0.
  int compare(AtomId a, AtomId b) const;

  // Printable form: primes mark derivative order (x, x', eps'').
  std::string display(AtomId id) const;

 private:
  std::vector<Atom> atoms_;
  std::map<std::tuple<int, std::string, int>, AtomId> index_;
  AtomId tau_ = 0;
};

using SymbolsPtr = std::shared_ptr<Symbols>;

inline const char* kind_name(AtomKind k) {
  switch (k) {
    case AtomKind::coordinate: return "coordinate";
    case AtomKind::derivative: return "derivative";
    case AtomKind::momentum: return "momentum";
    case AtomKind::multiplier: return "multiplier";
    case AtomKind::parameter: return "parameter";
    case AtomKind::evolution: return "evolution";
    case AtomKind::gauge_function: return "gauge function";
  }
  return "?";
}

}  // namespace dforge
