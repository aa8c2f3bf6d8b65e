#include <atomic>
#include <cstdlib>
#include <string>

#include "entrobound/common.hpp"
#include "entrobound/kernels.hpp"

namespace entrobound::kernels {

namespace {

Isa initial_isa() {
  const bool avx = cpu_has_avx2();
  if (const char* env = std::getenv("ENTROBOUND_SIMD")) {
    const std::string v = env;
    if (v == "scalar") return Isa::scalar;
    if (v == "avx2" && avx) return Isa::avx2;
  }
  return avx ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

bool use_avx2() { return current().load(std::memory_order_relaxed) == Isa::avx2; }

}  // namespace

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa active_isa() { return current().load(); }

void set_active_isa(Isa isa) {
  if (isa == Isa::avx2 && !cpu_has_avx2()) throw Error("avx2 requested but not supported by this CPU");
  current().store(isa);
}

void affine_row(std::size_t n, std::size_t d, const double* const* x, const double* coef,
                double offset, double* out) {
  use_avx2() ? avx2::affine_row(n, d, x, coef, offset, out)
             : scalar::affine_row(n, d, x, coef, offset, out);
}

void cover_axis(std::size_t n, const double* c, double r, const Axis& ax, std::int32_t* first,
                std::int32_t* last, std::uint8_t* flags) {
  use_avx2() ? avx2::cover_axis(n, c, r, ax, first, last, flags)
             : scalar::cover_axis(n, c, r, ax, first, last, flags);
}

void ratio_bounds(std::size_t n, const double* y, const double* x, double* lo, double* hi) {
  use_avx2() ? avx2::ratio_bounds(n, y, x, lo, hi) : scalar::ratio_bounds(n, y, x, lo, hi);
}

void scale(std::size_t n, double* x, double s) {
  use_avx2() ? avx2::scale(n, x, s) : scalar::scale(n, x, s);
}

void add(std::size_t n, const double* a, const double* b, double* out) {
  use_avx2() ? avx2::add(n, a, b, out) : scalar::add(n, a, b, out);
}

void spmv_shift(std::size_t n, const std::uint32_t* off, const std::uint32_t* col,
                const double* cnt, const double* x, double* y) {
  use_avx2() ? avx2::spmv_shift(n, off, col, cnt, x, y) : scalar::spmv_shift(n, off, col, cnt, x, y);
}

void gather_max(std::size_t n, const std::uint32_t* off, const std::uint32_t* col,
                const double* val, double* out) {
  use_avx2() ? avx2::gather_max(n, off, col, val, out) : scalar::gather_max(n, off, col, val, out);
}

void karp_update(std::size_t n, const double* dn, const double* dk, double denom, double* best) {
  use_avx2() ? avx2::karp_update(n, dn, dk, denom, best) : scalar::karp_update(n, dn, dk, denom, best);
}

}  // namespace entrobound::kernels
