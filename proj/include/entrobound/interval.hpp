#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

namespace entrobound {

/// Closed real interval with natural-extension arithmetic (round-to-nearest).
struct Interval {
  double lo = 0;
  double hi = 0;

  constexpr Interval() = default;
  constexpr Interval(double v) : lo(v), hi(v) {}  // NOLINT: implicit point interval
  constexpr Interval(double l, double h) : lo(l), hi(h) {}

  constexpr double width() const { return hi - lo; }
  constexpr bool contains(double v) const { return lo <= v && v <= hi; }
  constexpr bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }
};

inline Interval operator+(Interval a, Interval b) { return {a.lo + b.lo, a.hi + b.hi}; }
inline Interval operator-(Interval a, Interval b) { return {a.lo - b.hi, a.hi - b.lo}; }
inline Interval operator-(Interval a) { return {-a.hi, -a.lo}; }

inline Interval operator*(Interval a, Interval b) {
  const double p1 = a.lo * b.lo;
  const double p2 = a.lo * b.hi;
  const double p3 = a.hi * b.lo;
  const double p4 = a.hi * b.hi;
  return {std::min({p1, p2, p3, p4}), std::max({p1, p2, p3, p4})};
}

/// x^p with the even-power rule, so [-1,1]^2 = [0,1].
inline Interval pow(Interval x, int p) {
  if (p == 0) return {1.0, 1.0};
  if (p % 2 == 1) return {std::pow(x.lo, p), std::pow(x.hi, p)};
  const double a = std::abs(x.lo);
  const double b = std::abs(x.hi);
  if (x.lo <= 0 && 0 <= x.hi) return {0.0, std::pow(std::max(a, b), p)};
  return {std::pow(std::min(a, b), p), std::pow(std::max(a, b), p)};
}

namespace detail {
// true when [lo,hi] contains phase + 2k*pi for some integer k
inline bool hits_phase(double lo, double hi, double phase) {
  constexpr double two_pi = 2 * std::numbers::pi;
  const double k = std::ceil((lo - phase) / two_pi);
  return phase + k * two_pi <= hi;
}
}  // namespace detail

inline Interval sin(Interval x) {
  constexpr double pi = std::numbers::pi;
  if (x.hi - x.lo >= 2 * pi) return {-1.0, 1.0};
  const double a = std::sin(x.lo);
  const double b = std::sin(x.hi);
  Interval r{std::min(a, b), std::max(a, b)};
  if (detail::hits_phase(x.lo, x.hi, pi / 2)) r.hi = 1.0;
  if (detail::hits_phase(x.lo, x.hi, -pi / 2)) r.lo = -1.0;
  return r;
}

inline Interval cos(Interval x) {
  constexpr double pi = std::numbers::pi;
  if (x.hi - x.lo >= 2 * pi) return {-1.0, 1.0};
  const double a = std::cos(x.lo);
  const double b = std::cos(x.hi);
  Interval r{std::min(a, b), std::max(a, b)};
  if (detail::hits_phase(x.lo, x.hi, 0.0)) r.hi = 1.0;
  if (detail::hits_phase(x.lo, x.hi, pi)) r.lo = -1.0;
  return r;
}

}  // namespace entrobound
