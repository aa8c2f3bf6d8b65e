#include "entrobound/expr.hpp"

#include <cmath>

#include "entrobound/common.hpp"

namespace entrobound {

namespace {

int exponent(const std::vector<int>& p, std::size_t i) { return i < p.size() ? p[i] : 0; }

double ipow(double x, int p) {
  double r = 1;
  for (; p > 0; --p) r *= x;
  return r;
}

}  // namespace

double evaluate(const Expr& e, std::span<const double> x, std::span<const double> u) {
  constexpr std::size_t kCache = 8;
  double sn[kCache];
  double cs[kCache];
  bool have[kCache] = {};
  auto trig = [&](std::size_t i) {
    if (i < kCache && !have[i]) {
      sn[i] = std::sin(x[i]);
      cs[i] = std::cos(x[i]);
      have[i] = true;
    }
  };
  double sum = 0;
  for (const Term& t : e) {
    double v = t.coef;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (int p = exponent(t.x_pow, i)) v *= ipow(x[i], p);
      const int ps = exponent(t.sin_pow, i);
      const int pc = exponent(t.cos_pow, i);
      if (ps || pc) {
        trig(i);
        const double si = i < kCache ? sn[i] : std::sin(x[i]);
        const double ci = i < kCache ? cs[i] : std::cos(x[i]);
        if (ps) v *= ipow(si, ps);
        if (pc) v *= ipow(ci, pc);
      }
    }
    for (std::size_t j = 0; j < u.size(); ++j) {
      if (int p = exponent(t.u_pow, j)) v *= ipow(u[j], p);
    }
    sum += v;
  }
  return sum;
}

Interval evaluate(const Expr& e, std::span<const Interval> x, std::span<const double> u) {
  Interval sum{0.0};
  for (const Term& t : e) {
    double scalar = t.coef;
    for (std::size_t j = 0; j < u.size(); ++j) {
      if (int p = exponent(t.u_pow, j)) scalar *= ipow(u[j], p);
    }
    Interval v{scalar};
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (int p = exponent(t.x_pow, i)) v = v * pow(x[i], p);
      if (int p = exponent(t.sin_pow, i)) v = v * pow(sin(x[i]), p);
      if (int p = exponent(t.cos_pow, i)) v = v * pow(cos(x[i]), p);
    }
    sum = sum + v;
  }
  return sum;
}

void check_expr(const Expr& e, std::size_t state_dim, std::size_t input_dim) {
  for (const Term& t : e) {
    if (t.x_pow.size() > state_dim || t.sin_pow.size() > state_dim ||
        t.cos_pow.size() > state_dim || t.u_pow.size() > input_dim) {
      throw Error("expression: exponent vector longer than the variable count");
    }
    for (const auto* p : {&t.x_pow, &t.u_pow, &t.sin_pow, &t.cos_pow}) {
      for (int k : *p) {
        if (k < 0) throw Error("expression: negative exponent");
      }
    }
  }
}

}  // namespace entrobound
