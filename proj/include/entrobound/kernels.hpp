#pragma once

// Data-parallel inner loops. Each kernel has a scalar reference and an AVX2
// variant with bit-identical results; the active variant is picked at runtime
// (CPU support, overridable with ENTROBOUND_SIMD=scalar|avx2).

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace entrobound::kernels {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);
bool cpu_has_avx2();
Isa active_isa();
/// Throws when avx2 is requested on a CPU without it.
void set_active_isa(Isa isa);

/// Grid axis description for cover_axis.
struct Axis {
  double lb = 0;
  double ub = 0;
  double eta = 1;
  double count = 1;
};

inline constexpr std::uint8_t kEscapes = 1;  // enclosure not inside the grid domain
inline constexpr std::uint8_t kMiss = 2;     // enclosure misses the grid on this axis

#define ENTROBOUND_KERNEL_DECLS                                                            \
  /* out[k] = sum_j coef[j] * x[j][k] + offset */                                          \
  void affine_row(std::size_t n, std::size_t d, const double* const* x, const double* coef, \
                  double offset, double* out);                                             \
  /* per-cell index range of [c - r, c + r] on one axis; flags are OR-ed in */             \
  void cover_axis(std::size_t n, const double* c, double r, const Axis& ax,                \
                  std::int32_t* first, std::int32_t* last, std::uint8_t* flags);           \
  /* min and max of y[i] / x[i] over x[i] > 0 */                                           \
  void ratio_bounds(std::size_t n, const double* y, const double* x, double* lo,           \
                    double* hi);                                                           \
  void scale(std::size_t n, double* x, double s);                                          \
  void add(std::size_t n, const double* a, const double* b, double* out);                  \
  /* y[v] = x[v] + sum_{e in row v} cnt[e] * x[col[e]] (four-lane accumulation order) */    \
  void spmv_shift(std::size_t n, const std::uint32_t* off, const std::uint32_t* col,       \
                  const double* cnt, const double* x, double* y);                          \
  /* out[v] = max_{e in row v} val[col[e]], -inf for empty rows */                         \
  void gather_max(std::size_t n, const std::uint32_t* off, const std::uint32_t* col,       \
                  const double* val, double* out);                                         \
  /* best[v] = min(best[v], (dn[v] - dk[v]) / denom); NaN terms leave best unchanged */    \
  void karp_update(std::size_t n, const double* dn, const double* dk, double denom,        \
                   double* best);

namespace scalar {
ENTROBOUND_KERNEL_DECLS
}
namespace avx2 {
ENTROBOUND_KERNEL_DECLS
}
ENTROBOUND_KERNEL_DECLS

#undef ENTROBOUND_KERNEL_DECLS

}  // namespace entrobound::kernels
