// SPDX-License-Identifier: Apache-2.0
#include <arm_neon.h>

#include <limits>

#include "usdrecon/simd/kernels.hpp"

namespace usdrecon::simd::neon {

double dot(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vaddq_f64(acc0, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    acc1 = vaddq_f64(acc1, vmulq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2)));
  }
  double sum = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

void dot_rows(const double* rows, std::size_t n_rows, const double* query,
              std::size_t dim, double* out) {
  for (std::size_t r = 0; r < n_rows; ++r) out[r] = dot(rows + r * dim, query, dim);
}

void squared_distances(const double* xs, const double* ys, const double* zs,
                       std::size_t n, double qx, double qy, double qz,
                       double* out) {
  const float64x2_t vx = vdupq_n_f64(qx);
  const float64x2_t vy = vdupq_n_f64(qy);
  const float64x2_t vz = vdupq_n_f64(qz);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t dx = vsubq_f64(vld1q_f64(xs + i), vx);
    const float64x2_t dy = vsubq_f64(vld1q_f64(ys + i), vy);
    const float64x2_t dz = vsubq_f64(vld1q_f64(zs + i), vz);
    const float64x2_t xy = vaddq_f64(vmulq_f64(dx, dx), vmulq_f64(dy, dy));
    vst1q_f64(out + i, vaddq_f64(xy, vmulq_f64(dz, dz)));
  }
  for (; i < n; ++i) {
    const double dx = xs[i] - qx;
    const double dy = ys[i] - qy;
    const double dz = zs[i] - qz;
    out[i] = (dx * dx + dy * dy) + dz * dz;
  }
}

MinResult nearest_of(const double* xs, const double* ys, const double* zs,
                     std::size_t n, double qx, double qy, double qz) {
  MinResult best{n, std::numeric_limits<double>::infinity()};
  double block[16];
  for (std::size_t start = 0; start < n; start += 16) {
    const std::size_t count = n - start < 16 ? n - start : 16;
    squared_distances(xs + start, ys + start, zs + start, count, qx, qy, qz, block);
    for (std::size_t j = 0; j < count; ++j) {
      if (block[j] < best.value) best = {start + j, block[j]};
    }
  }
  return best;
}

}  // namespace usdrecon::simd::neon
