#pragma once

#include <cstddef>

namespace semopt::tensor {

/// Applies an n x n row-major matrix `a` along one axis of an n^dim tensor
/// (dim 1 or 3, axis 0 fastest in memory). With `Accumulate` the result is
/// added to `out`, otherwise it overwrites it.
///
/// Each call is a sequence of small dense matrix-matrix products, O(n^(dim+1))
/// work; no operator larger than n x n is ever formed.
template <bool Accumulate>
inline void apply_axis(const double* a, int n, int dim, int axis, const double* in, double* out) {
  const std::size_t n2 = static_cast<std::size_t>(n) * n;
  if (axis == 0) {
    std::size_t lines = 1;
    for (int d = 1; d < dim; ++d) lines *= n;
    for (std::size_t q = 0; q < lines; ++q) {
      const double* src = in + q * n;
      double* dst = out + q * n;
      for (int i = 0; i < n; ++i) {
        const double* row = a + static_cast<std::size_t>(i) * n;
        double sum = 0.0;
        for (int k = 0; k < n; ++k) sum += row[k] * src[k];
        if constexpr (Accumulate) {
          dst[i] += sum;
        } else {
          dst[i] = sum;
        }
      }
    }
  } else if (axis == 1) {
    for (int i2 = 0; i2 < n; ++i2) {
      const double* slab = in + i2 * n2;
      for (int i1 = 0; i1 < n; ++i1) {
        double* dst = out + i2 * n2 + static_cast<std::size_t>(i1) * n;
        const double* row = a + static_cast<std::size_t>(i1) * n;
        if constexpr (!Accumulate) {
          for (int i0 = 0; i0 < n; ++i0) dst[i0] = 0.0;
        }
        for (int k = 0; k < n; ++k) {
          const double c = row[k];
          const double* src = slab + static_cast<std::size_t>(k) * n;
          for (int i0 = 0; i0 < n; ++i0) dst[i0] += c * src[i0];
        }
      }
    }
  } else {
    for (int i2 = 0; i2 < n; ++i2) {
      double* dst = out + i2 * n2;
      const double* row = a + static_cast<std::size_t>(i2) * n;
      if constexpr (!Accumulate) {
        for (std::size_t r = 0; r < n2; ++r) dst[r] = 0.0;
      }
      for (int k = 0; k < n; ++k) {
        const double c = row[k];
        const double* src = in + k * n2;
        for (std::size_t r = 0; r < n2; ++r) dst[r] += c * src[r];
      }
    }
  }
}

}  // namespace semopt::tensor
