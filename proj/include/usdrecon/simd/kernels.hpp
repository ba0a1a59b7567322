// SPDX-License-Identifier: Apache-2.0
#pragma once

// Data-parallel inner loops shared by the embedding index, the k-d tree leaf
// scans and the brute-force neighbor oracle. Each kernel has a scalar
// reference implementation plus AVX2 (x86-64) and NEON (AArch64) variants;
// the active variant is chosen once at startup from the CPU feature bits.

#include <cstddef>
#include <span>
#include <string_view>

namespace usdrecon::simd {

enum class Isa { kScalar, kAvx2, kNeon };

std::string_view to_string(Isa isa);

/// Widest instruction set both compiled in and supported by this CPU.
Isa best_supported_isa();

/// Instruction set currently used by the dispatching entry points.
Isa active_isa();

/// Overrides dispatch (tests and benchmarks). Returns false and leaves the
/// selection untouched when `isa` is not available on this machine.
bool set_active_isa(Isa isa);

bool isa_available(Isa isa);

/// Sum of a[i] * b[i]. Sizes must match.
double dot(std::span<const double> a, std::span<const double> b);

/// out[r] = rows[r * dim .. r * dim + dim) . query, for a row-major matrix.
void dot_rows(std::span<const double> rows, std::span<const double> query,
              std::span<double> out);

/// out[i] = (xs[i]-qx)^2 + (ys[i]-qy)^2 + (zs[i]-qz)^2 over structure-of-arrays
/// coordinates.
void squared_distances(std::span<const double> xs, std::span<const double> ys,
                       std::span<const double> zs, double qx, double qy,
                       double qz, std::span<double> out);

/// Index of the smallest squared distance (first one on ties) and its value.
/// Returns {size, +inf} for empty input.
struct MinResult {
  std::size_t index;
  double value;
};
MinResult nearest_of(std::span<const double> xs, std::span<const double> ys,
                     std::span<const double> zs, double qx, double qy,
                     double qz);

// Per-ISA entry points. They are always declared; calling a variant that is
// not compiled in or not supported by the CPU is undefined.
namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void dot_rows(const double* rows, std::size_t n_rows, const double* query,
              std::size_t dim, double* out);
void squared_distances(const double* xs, const double* ys, const double* zs,
                       std::size_t n, double qx, double qy, double qz,
                       double* out);
MinResult nearest_of(const double* xs, const double* ys, const double* zs,
                     std::size_t n, double qx, double qy, double qz);
}  // namespace scalar

namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void dot_rows(const double* rows, std::size_t n_rows, const double* query,
              std::size_t dim, double* out);
void squared_distances(const double* xs, const double* ys, const double* zs,
                       std::size_t n, double qx, double qy, double qz,
                       double* out);
MinResult nearest_of(const double* xs, const double* ys, const double* zs,
                     std::size_t n, double qx, double qy, double qz);
}  // namespace avx2

namespace neon {
double dot(const double* a, const double* b, std::size_t n);
void dot_rows(const double* rows, std::size_t n_rows, const double* query,
              std::size_t dim, double* out);
void squared_distances(const double* xs, const double* ys, const double* zs,
                       std::size_t n, double qx, double qy, double qz,
                       double* out);
MinResult nearest_of(const double* xs, const double* ys, const double* zs,
                     std::size_t n, double qx, double qy, double qz);
}  // namespace neon

}  // namespace usdrecon::simd
