#pragma once
#include <map>
#include <string>

#include "dforge/expr.hpp"

namespace dforge {

// Invertibility bookkeeping. Flags attach to atom names (not ids), so a
// coordinate and anything derived from the same name share them. A value is
// "assured nonzero" only when the algebra can see it: a nonzero rational, or
// a fraction whose numerator is a single term built entirely from flagged
// atoms. Everything else is treated as undecidable, and rank decisions that
// would need more must fail loudly rather than guess.
class AssumptionSet {
 public:
  void declare_nonzero(const std::string& name) { flags_[name].nonzero = true; }
  void declare_positive(const std::string& name) {
    flags_[name].nonzero = true;
    flags_[name].positive = true;
  }

  bool nonzero_atom(const std::string& name) const {
    auto it = flags_.find(name);
    return it != flags_.end() && it->second.nonzero;
  }
  bool positive_atom(const std::string& name) const {
    auto it = flags_.find(name);
    return it != flags_.end() && it->second.positive;
  }

  bool assured_nonzero(const Expr& e) const {
    if (e.is_zero()) return false;
    const Poly& n = e.num();
    if (n.t.size() != 1) return false;
    const Symbols& s = *e.symbols();
    for (const auto& [atom, exp] : n.t.front().first.f)
      if (!nonzero_atom(s.at(atom).name)) return false;
    return true;
  }

  const std::map<std::string, bool> names_with_flags() const {
    std::map<std::string, bool> out;
    for (const auto& [k, v] : flags_) out.emplace(k, v.positive);
    return out;
  }

 private:
  struct Flags {
    bool nonzero = false;
    bool positive = false;
  };
  std::map<std::string, Flags> flags_;
};

}  // namespace dforge
