#include "edgecl/feature.hpp"

#include <cmath>

#include "edgecl/error.hpp"

namespace edgecl {

void check_vector(std::span<const double> values, std::size_t dim) {
  if (values.size() != dim) {
    fail(Errc::rejected_input, "dimension mismatch: expected " + std::to_string(dim) +
                                   ", got " + std::to_string(values.size()));
  }
  for (double v : values) {
    if (!std::isfinite(v)) fail(Errc::rejected_input, "non-finite feature value");
  }
}

}  // namespace edgecl
