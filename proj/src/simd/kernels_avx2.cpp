// SPDX-License-Identifier: Apache-2.0
// Compiled with -mavx2 -ffp-contract=off so the distance kernels stay
// bit-identical to the scalar reference (no fused multiply-add).
#include <immintrin.h>

#include <limits>

#include "usdrecon/simd/kernels.hpp"

namespace usdrecon::simd::avx2 {

namespace {

inline double horizontal_sum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  const __m128d swapped = _mm_unpackhi_pd(pair, pair);
  return _mm_cvtsd_f64(_mm_add_sd(pair, swapped));
}

inline __m256d squared_distance4(const double* xs, const double* ys,
                                 const double* zs, __m256d qx, __m256d qy,
                                 __m256d qz) {
  const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs), qx);
  const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys), qy);
  const __m256d dz = _mm256_sub_pd(_mm256_loadu_pd(zs), qz);
  const __m256d xy = _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));
  return _mm256_add_pd(xy, _mm256_mul_pd(dz, dz));
}

}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4)));
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  double sum = horizontal_sum(_mm256_add_pd(acc0, acc1));
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
  const __m256d vx = _mm256_set1_pd(qx);
  const __m256d vy = _mm256_set1_pd(qy);
  const __m256d vz = _mm256_set1_pd(qz);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, squared_distance4(xs + i, ys + i, zs + i, vx, vy, vz));
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
  std::size_t i = 0;
  if (n >= 4) {
    const __m256d vx = _mm256_set1_pd(qx);
    const __m256d vy = _mm256_set1_pd(qy);
    const __m256d vz = _mm256_set1_pd(qz);
    __m256d best_val = _mm256_set1_pd(std::numeric_limits<double>::infinity());
    __m256d best_idx = _mm256_set1_pd(-1.0);
    __m256d idx = _mm256_setr_pd(0.0, 1.0, 2.0, 3.0);
    const __m256d step = _mm256_set1_pd(4.0);
    for (; i + 4 <= n; i += 4) {
      const __m256d d = squared_distance4(xs + i, ys + i, zs + i, vx, vy, vz);
      // Strict less-than keeps the earliest index within each lane.
      const __m256d closer = _mm256_cmp_pd(d, best_val, _CMP_LT_OQ);
      best_val = _mm256_blendv_pd(best_val, d, closer);
      best_idx = _mm256_blendv_pd(best_idx, idx, closer);
      idx = _mm256_add_pd(idx, step);
    }
    alignas(32) double vals[4];
    alignas(32) double ids[4];
    _mm256_store_pd(vals, best_val);
    _mm256_store_pd(ids, best_idx);
    for (int lane = 0; lane < 4; ++lane) {
      if (ids[lane] < 0.0) continue;
      const auto lane_index = static_cast<std::size_t>(ids[lane]);
      if (vals[lane] < best.value ||
          (vals[lane] == best.value && lane_index < best.index)) {
        best = {lane_index, vals[lane]};
      }
    }
  }
  for (; i < n; ++i) {
    const double dx = xs[i] - qx;
    const double dy = ys[i] - qy;
    const double dz = zs[i] - qz;
    const double d = (dx * dx + dy * dy) + dz * dz;
    if (d < best.value) best = {i, d};
  }
  return best;
}

}  // namespace usdrecon::simd::avx2
