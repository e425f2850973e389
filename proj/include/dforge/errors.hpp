#pragma once
#include <stdexcept>
#include <string>

namespace dforge {

// Error taxonomy. kernel_error: misuse of the symbolic layer (bad parse,
// undeclared atom, division by zero, illegal derivative). model_error: a
// model definition that cannot be processed (non-affine Legendre map,
// missing invertibility assumption). analysis_error: the algorithms give
// up (rank decision needs an assumption nobody supplied, nonlinear
// multiplier condition, ambiguous gauge pairing). numerical_error: the
// numeric lab refuses or flags a run (unbound multiplier or parameter,
// initial data off the constraint surface, incommensurate grid).

struct kernel_error : std::runtime_error {
  explicit kernel_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct model_error : std::runtime_error {
  explicit model_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct analysis_error : std::runtime_error {
  explicit analysis_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct numerical_error : std::runtime_error {
  explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace dforge
