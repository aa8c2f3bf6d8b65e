#include <immintrin.h>

#include <algorithm>
#include <limits>
#include <vector>

#include "entrobound/common.hpp"
#include "entrobound/kernels.hpp"

namespace entrobound::kernels::avx2 {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double hmax(__m256d v) {
  __m128d m = _mm_max_pd(_mm256_castpd256_pd128(v), _mm256_extractf128_pd(v, 1));
  return std::max(_mm_cvtsd_f64(m), _mm_cvtsd_f64(_mm_unpackhi_pd(m, m)));
}

double hmin(__m256d v) {
  __m128d m = _mm_min_pd(_mm256_castpd256_pd128(v), _mm256_extractf128_pd(v, 1));
  return std::min(_mm_cvtsd_f64(m), _mm_cvtsd_f64(_mm_unpackhi_pd(m, m)));
}

// Lane mask for the first `k` (< 4) lanes.
__m256i tail_mask(std::size_t k) {
  return _mm256_cmpgt_epi64(_mm256_set1_epi64x(static_cast<long long>(k)),
                            _mm256_setr_epi64x(0, 1, 2, 3));
}

}  // namespace

void affine_row(std::size_t n, std::size_t d, const double* const* x, const double* coef,
                double offset, double* out) {
  const __m256d voff = _mm256_set1_pd(offset);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t j = 0; j < d; ++j) {
      acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(coef[j]), _mm256_loadu_pd(x[j] + k)));
    }
    _mm256_storeu_pd(out + k, _mm256_add_pd(acc, voff));
  }
  if (k < n) {
    std::vector<const double*> shifted(d);
    for (std::size_t j = 0; j < d; ++j) shifted[j] = x[j] + k;
    scalar::affine_row(n - k, d, shifted.data(), coef, offset, out + k);
  }
}

void cover_axis(std::size_t n, const double* c, double r, const Axis& ax, std::int32_t* first,
                std::int32_t* last, std::uint8_t* flags) {
  const double s = kGeomSlack / ax.eta;
  const __m256d vs = _mm256_set1_pd(s);
  const __m256d vr = _mm256_set1_pd(r);
  const __m256d vlb = _mm256_set1_pd(ax.lb);
  const __m256d veta = _mm256_set1_pd(ax.eta);
  const __m256d vcount = _mm256_set1_pd(ax.count);
  const __m256d vtop = _mm256_set1_pd(ax.count + s);
  const __m256d vmaxidx = _mm256_set1_pd(ax.count - 1);
  const __m256d vesc_lo = _mm256_set1_pd(ax.lb - kGeomSlack);
  const __m256d vesc_hi = _mm256_set1_pd(ax.ub + kGeomSlack);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d vc = _mm256_loadu_pd(c + k);
    const __m256d lo = _mm256_sub_pd(vc, vr);
    const __m256d hi = _mm256_add_pd(vc, vr);
    const __m256d t_lo = _mm256_div_pd(_mm256_sub_pd(lo, vlb), veta);
    const __m256d t_hi = _mm256_div_pd(_mm256_sub_pd(hi, vlb), veta);
    __m256d f = _mm256_floor_pd(_mm256_add_pd(t_lo, vs));
    __m256d l = _mm256_sub_pd(_mm256_ceil_pd(_mm256_sub_pd(t_hi, vs)), one);
    l = _mm256_blendv_pd(l, f, _mm256_cmp_pd(l, f, _CMP_LT_OQ));
    const __m256d snap = _mm256_and_pd(_mm256_cmp_pd(f, vcount, _CMP_GE_OQ),
                                       _mm256_and_pd(_mm256_cmp_pd(t_lo, vtop, _CMP_LE_OQ),
                                                     _mm256_cmp_pd(t_hi, vtop, _CMP_LE_OQ)));
    f = _mm256_blendv_pd(f, vmaxidx, snap);
    l = _mm256_blendv_pd(l, vmaxidx, snap);
    const int esc = _mm256_movemask_pd(_mm256_or_pd(_mm256_cmp_pd(lo, vesc_lo, _CMP_LT_OQ),
                                                    _mm256_cmp_pd(hi, vesc_hi, _CMP_GT_OQ)));
    const int miss = _mm256_movemask_pd(_mm256_or_pd(_mm256_cmp_pd(l, zero, _CMP_LT_OQ),
                                                     _mm256_cmp_pd(f, vcount, _CMP_GE_OQ)));
    f = _mm256_min_pd(_mm256_max_pd(f, zero), vmaxidx);
    l = _mm256_min_pd(_mm256_max_pd(l, zero), vmaxidx);
    _mm_storeu_si128(reinterpret_cast<__m128i*>(first + k), _mm256_cvttpd_epi32(f));
    _mm_storeu_si128(reinterpret_cast<__m128i*>(last + k), _mm256_cvttpd_epi32(l));
    for (int b = 0; b < 4; ++b) {
      flags[k + b] |= static_cast<std::uint8_t>((((esc >> b) & 1) ? kEscapes : 0) |
                                                (((miss >> b) & 1) ? kMiss : 0));
    }
  }
  if (k < n) scalar::cover_axis(n - k, c + k, r, ax, first + k, last + k, flags + k);
}

void ratio_bounds(std::size_t n, const double* y, const double* x, double* lo, double* hi) {
  __m256d mn = _mm256_set1_pd(kInf);
  __m256d mx = _mm256_set1_pd(-kInf);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vx = _mm256_loadu_pd(x + i);
    const __m256d q = _mm256_div_pd(_mm256_loadu_pd(y + i), vx);
    const __m256d pos = _mm256_cmp_pd(vx, zero, _CMP_GT_OQ);
    mn = _mm256_min_pd(mn, _mm256_blendv_pd(_mm256_set1_pd(kInf), q, pos));
    mx = _mm256_max_pd(mx, _mm256_blendv_pd(_mm256_set1_pd(-kInf), q, pos));
  }
  double tlo = kInf;
  double thi = -kInf;
  if (i < n) scalar::ratio_bounds(n - i, y + i, x + i, &tlo, &thi);
  *lo = std::min(hmin(mn), tlo);
  *hi = std::max(hmax(mx), thi);
}

void scale(std::size_t n, double* x, double s) {
  const __m256d vs = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(x + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), vs));
  if (i < n) scalar::scale(n - i, x + i, s);
}

void add(std::size_t n, const double* a, const double* b, double* out) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  if (i < n) scalar::add(n - i, a + i, b + i, out + i);
}

void spmv_shift(std::size_t n, const std::uint32_t* off, const std::uint32_t* col,
                const double* cnt, const double* x, double* y) {
  for (std::size_t v = 0; v < n; ++v) {
    __m256d acc = _mm256_setzero_pd();
    std::uint32_t e = off[v];
    const std::uint32_t end = off[v + 1];
    for (; e + 4 <= end; e += 4) {
      const __m128i idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(col + e));
      acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(cnt + e),
                                             _mm256_i32gather_pd(x, idx, 8)));
    }
    if (e < end) {
      alignas(16) std::int32_t idx[4] = {0, 0, 0, 0};
      alignas(32) double w[4] = {0, 0, 0, 0};
      for (std::uint32_t t = 0; e + t < end; ++t) {
        idx[t] = static_cast<std::int32_t>(col[e + t]);
        w[t] = cnt[e + t];
      }
      const __m256i mask = tail_mask(end - e);
      const __m256d g = _mm256_mask_i32gather_pd(_mm256_setzero_pd(), x,
                                                 _mm_load_si128(reinterpret_cast<__m128i*>(idx)),
                                                 _mm256_castsi256_pd(mask), 8);
      // masked lanes contribute nothing, matching the scalar lane sums exactly
      const __m256d prod = _mm256_and_pd(_mm256_mul_pd(_mm256_load_pd(w), g),
                                         _mm256_castsi256_pd(mask));
      acc = _mm256_add_pd(acc, prod);
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    y[v] = x[v] + ((lanes[0] + lanes[1]) + (lanes[2] + lanes[3]));
  }
}

void gather_max(std::size_t n, const std::uint32_t* off, const std::uint32_t* col,
                const double* val, double* out) {
  const __m256d ninf = _mm256_set1_pd(-kInf);
  for (std::size_t v = 0; v < n; ++v) {
    __m256d m = ninf;
    std::uint32_t e = off[v];
    const std::uint32_t end = off[v + 1];
    for (; e + 4 <= end; e += 4) {
      const __m128i idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(col + e));
      m = _mm256_max_pd(m, _mm256_i32gather_pd(val, idx, 8));
    }
    double t = hmax(m);
    for (; e < end; ++e) t = std::max(t, val[col[e]]);
    out[v] = t;
  }
}

void karp_update(std::size_t n, const double* dn, const double* dk, double denom, double* best) {
  const __m256d vd = _mm256_set1_pd(denom);
  std::size_t v = 0;
  for (; v + 4 <= n; v += 4) {
    const __m256d t = _mm256_div_pd(_mm256_sub_pd(_mm256_loadu_pd(dn + v), _mm256_loadu_pd(dk + v)), vd);
    // minpd returns its second operand when either is NaN
    _mm256_storeu_pd(best + v, _mm256_min_pd(t, _mm256_loadu_pd(best + v)));
  }
  if (v < n) scalar::karp_update(n - v, dn + v, dk + v, denom, best + v);
}

}  // namespace entrobound::kernels::avx2
