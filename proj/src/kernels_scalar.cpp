#include <algorithm>
#include <cmath>
#include <limits>

#include "entrobound/common.hpp"
#include "entrobound/kernels.hpp"

namespace entrobound::kernels::scalar {

void affine_row(std::size_t n, std::size_t d, const double* const* x, const double* coef,
                double offset, double* out) {
  for (std::size_t k = 0; k < n; ++k) {
    double acc = 0;
    for (std::size_t j = 0; j < d; ++j) acc += coef[j] * x[j][k];
    out[k] = acc + offset;
  }
}

void cover_axis(std::size_t n, const double* c, double r, const Axis& ax, std::int32_t* first,
                std::int32_t* last, std::uint8_t* flags) {
  const double s = kGeomSlack / ax.eta;
  const double esc_lo = ax.lb - kGeomSlack;
  const double esc_hi = ax.ub + kGeomSlack;
  const double top = ax.count + s;
  for (std::size_t k = 0; k < n; ++k) {
    const double lo = c[k] - r;
    const double hi = c[k] + r;
    const double t_lo = (lo - ax.lb) / ax.eta;
    const double t_hi = (hi - ax.lb) / ax.eta;
    double f = std::floor(t_lo + s);
    double l = std::ceil(t_hi - s) - 1;
    if (l < f) l = f;
    if (f >= ax.count && t_lo <= top && t_hi <= top) f = l = ax.count - 1;
    std::uint8_t fl = 0;
    if (lo < esc_lo || hi > esc_hi) fl |= kEscapes;
    if (l < 0 || f >= ax.count) fl |= kMiss;
    f = std::min(std::max(f, 0.0), ax.count - 1);
    l = std::min(std::max(l, 0.0), ax.count - 1);
    first[k] = static_cast<std::int32_t>(f);
    last[k] = static_cast<std::int32_t>(l);
    flags[k] |= fl;
  }
}

void ratio_bounds(std::size_t n, const double* y, const double* x, double* lo, double* hi) {
  double mn = std::numeric_limits<double>::infinity();
  double mx = -mn;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0)) continue;
    const double q = y[i] / x[i];
    mn = std::min(mn, q);
    mx = std::max(mx, q);
  }
  *lo = mn;
  *hi = mx;
}

void scale(std::size_t n, double* x, double s) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= s;
}

void add(std::size_t n, const double* a, const double* b, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void spmv_shift(std::size_t n, const std::uint32_t* off, const std::uint32_t* col,
                const double* cnt, const double* x, double* y) {
  for (std::size_t v = 0; v < n; ++v) {
    double acc[4] = {0, 0, 0, 0};
    for (std::uint32_t e = off[v]; e < off[v + 1]; ++e) acc[(e - off[v]) & 3] += cnt[e] * x[col[e]];
    y[v] = x[v] + ((acc[0] + acc[1]) + (acc[2] + acc[3]));
  }
}

void gather_max(std::size_t n, const std::uint32_t* off, const std::uint32_t* col,
                const double* val, double* out) {
  for (std::size_t v = 0; v < n; ++v) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::uint32_t e = off[v]; e < off[v + 1]; ++e) m = std::max(m, val[col[e]]);
    out[v] = m;
  }
}

void karp_update(std::size_t n, const double* dn, const double* dk, double denom, double* best) {
  for (std::size_t v = 0; v < n; ++v) {
    const double t = (dn[v] - dk[v]) / denom;
    best[v] = t < best[v] ? t : best[v];
  }
}

}  // namespace entrobound::kernels::scalar
