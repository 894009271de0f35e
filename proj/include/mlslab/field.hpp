#pragma once
#include <variant>

#include "mlslab/hyperbolic_field.hpp"
#include "mlslab/tensors.hpp"

namespace mlslab {

// A perturbation tensor on either model.
using Field = std::variant<TorusField, BumpField>;

inline int degree(const Field& f) {
  return std::visit([](const auto& x) { return x.degree(); }, f);
}

}  // namespace mlslab
