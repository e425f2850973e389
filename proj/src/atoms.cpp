#include "dforge/atoms.hpp"

namespace dforge {

Symbols::Symbols() { tau_ = intern(AtomKind::evolution, "tau"); }

AtomId Symbols::intern(AtomKind kind, const std::string& name, int order) {
  if (order < 0) throw kernel_error("negative derivative order for '" + name + "'");
  if (order > 0 && kind != AtomKind::derivative && kind != AtomKind::gauge_function)
    throw kernel_error("atom kind cannot carry a derivative order: " + name);
  if (kind == AtomKind::derivative && order == 0)
    throw kernel_error("derivative atom requires order >= 1: " + name);
  auto key = std::make_tuple(static_cast<int>(kind), name, order);
  auto it = index_.find(key);
  if (it != index_.end()) return it->second;
  AtomId id = static_cast<AtomId>(atoms_.size());
  atoms_.push_back(Atom{kind, name, order});
  index_.emplace(key, id);
  return id;
}

std::optional<AtomId> Symbols::find(AtomKind kind, const std::string& name, int order) const {
  auto it = index_.find(std::make_tuple(static_cast<int>(kind), name, order));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<AtomId> Symbols::resolve(const std::string& name, int order) {
  if (order == 0) {
    static const AtomKind search[] = {AtomKind::coordinate, AtomKind::momentum,
                                      AtomKind::multiplier, AtomKind::parameter,
                                      AtomKind::evolution, AtomKind::gauge_function};
    for (AtomKind k : search)
      if (auto id = find(k, name, 0)) return id;
    return std::nullopt;
  }
  if (find(AtomKind::coordinate, name, 0)) return intern(AtomKind::derivative, name, order);
  if (find(AtomKind::gauge_function, name, 0)) return intern(AtomKind::gauge_function, name, order);
  if (find(AtomKind::momentum, name, 0))
    throw kernel_error("cannot differentiate momentum atom '" + name + "'");
  if (find(AtomKind::multiplier, name, 0))
    throw kernel_error("cannot differentiate multiplier atom '" + name + "'");
  if (find(AtomKind::parameter, name, 0))
    throw kernel_error("cannot differentiate parameter atom '" + name + "'");
  if (find(AtomKind::evolution, name, 0))
    throw kernel_error("use explicit tau-dependence instead of differentiating tau");
  return std::nullopt;
}

AtomId Symbols::derivative_of(AtomId id) {
  const Atom& a = atoms_[id];
  switch (a.kind) {
    case AtomKind::coordinate:
      return intern(AtomKind::derivative, a.name, 1);
    case AtomKind::derivative:
      return intern(AtomKind::derivative, a.name, a.order + 1);
    case AtomKind::gauge_function:
      return intern(AtomKind::gauge_function, a.name, a.order + 1);
    default:
      throw kernel_error("cannot differentiate " + std::string(kind_name(a.kind)) +
                         " atom '" + a.name + "'");
  }
}

int Symbols::compare(AtomId a, AtomId b) const {
  if (a == b) return 0;
  const Atom& x = atoms_[a];
  const Atom& y = atoms_[b];
  if (x.kind != y.kind) return static_cast<int>(x.kind) < static_cast<int>(y.kind) ? -1 : 1;
  if (x.name != y.name) return x.name < y.name ? -1 : 1;
  if (x.order != y.order) return x.order < y.order ? -1 : 1;
  return 0;
}

std::string Symbols::display(AtomId id) const {
  const Atom& a = atoms_[id];
  std::string s = a.name;
  for (int i = 0; i < a.order; ++i) s += '\'';
  return s;
}

}  // namespace dforge
