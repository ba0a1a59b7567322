// SPDX-License-Identifier: Apache-2.0
#include <atomic>
#include <cassert>

#include "usdrecon/simd/kernels.hpp"

namespace usdrecon::simd {

namespace {

struct KernelTable {
  double (*dot)(const double*, const double*, std::size_t);
  void (*dot_rows)(const double*, std::size_t, const double*, std::size_t, double*);
  void (*squared_distances)(const double*, const double*, const double*,
                            std::size_t, double, double, double, double*);
  MinResult (*nearest_of)(const double*, const double*, const double*,
                          std::size_t, double, double, double);
};

constexpr KernelTable kScalarTable{&scalar::dot, &scalar::dot_rows,
                                   &scalar::squared_distances, &scalar::nearest_of};
#if defined(USDRECON_HAVE_AVX2)
constexpr KernelTable kAvx2Table{&avx2::dot, &avx2::dot_rows,
                                 &avx2::squared_distances, &avx2::nearest_of};
#endif
#if defined(USDRECON_HAVE_NEON)
constexpr KernelTable kNeonTable{&neon::dot, &neon::dot_rows,
                                 &neon::squared_distances, &neon::nearest_of};
#endif

const KernelTable* table_for(Isa isa) {
  switch (isa) {
#if defined(USDRECON_HAVE_AVX2)
    case Isa::kAvx2:
      return &kAvx2Table;
#endif
#if defined(USDRECON_HAVE_NEON)
    case Isa::kNeon:
      return &kNeonTable;
#endif
    case Isa::kScalar:
      return &kScalarTable;
    default:
      return nullptr;
  }
}

std::atomic<Isa>& active() {
  static std::atomic<Isa> isa{best_supported_isa()};
  return isa;
}

const KernelTable& current() { return *table_for(active().load(std::memory_order_relaxed)); }

}  // namespace

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
    case Isa::kNeon:
      return "neon";
  }
  return "unknown";
}

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
#if defined(USDRECON_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::kNeon:
#if defined(USDRECON_HAVE_NEON)
      return true;  // mandatory on AArch64
#else
      return false;
#endif
  }
  return false;
}

Isa best_supported_isa() {
  if (isa_available(Isa::kAvx2)) return Isa::kAvx2;
  if (isa_available(Isa::kNeon)) return Isa::kNeon;
  return Isa::kScalar;
}

Isa active_isa() { return active().load(std::memory_order_relaxed); }

bool set_active_isa(Isa isa) {
  if (!isa_available(isa)) return false;
  active().store(isa, std::memory_order_relaxed);
  return true;
}

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return current().dot(a.data(), b.data(), a.size());
}

void dot_rows(std::span<const double> rows, std::span<const double> query,
              std::span<double> out) {
  if (query.empty()) {
    for (double& v : out) v = 0.0;
    return;
  }
  assert(rows.size() == out.size() * query.size());
  current().dot_rows(rows.data(), out.size(), query.data(), query.size(), out.data());
}

void squared_distances(std::span<const double> xs, std::span<const double> ys,
                       std::span<const double> zs, double qx, double qy,
                       double qz, std::span<double> out) {
  assert(xs.size() == ys.size() && ys.size() == zs.size() && out.size() == xs.size());
  current().squared_distances(xs.data(), ys.data(), zs.data(), xs.size(), qx, qy, qz,
                              out.data());
}

MinResult nearest_of(std::span<const double> xs, std::span<const double> ys,
                     std::span<const double> zs, double qx, double qy,
                     double qz) {
  assert(xs.size() == ys.size() && ys.size() == zs.size());
  return current().nearest_of(xs.data(), ys.data(), zs.data(), xs.size(), qx, qy, qz);
}

}  // namespace usdrecon::simd
