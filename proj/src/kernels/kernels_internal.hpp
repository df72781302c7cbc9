#pragma once

#include <cmath>

#include "mld/kernels/kernels.hpp"

namespace mld::kernels {

inline double huber_value(double r, double delta) {
  const double a = std::fabs(r);
  return a <= delta ? 0.5 * r * r : delta * (a - 0.5 * delta);
}

#if defined(MLD_BUILD_AVX2)
const KernelTable& avx2_table_impl();
#endif

}  // namespace mld::kernels
