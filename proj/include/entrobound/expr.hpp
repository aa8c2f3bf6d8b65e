#pragma once

#include <span>
#include <vector>

#include "entrobound/interval.hpp"

namespace entrobound {

/// coef * prod x_i^x_pow[i] * prod u_j^u_pow[j] * prod sin(x_i)^sin_pow[i] * prod cos(x_i)^cos_pow[i]
/// Missing exponent vectors mean all-zero.
struct Term {
  double coef = 0;
  std::vector<int> x_pow;
  std::vector<int> u_pow;
  std::vector<int> sin_pow;
  std::vector<int> cos_pow;
};

/// One output component: a sum of terms.
using Expr = std::vector<Term>;

double evaluate(const Expr& e, std::span<const double> x, std::span<const double> u);
Interval evaluate(const Expr& e, std::span<const Interval> x, std::span<const double> u);

/// Validates exponent vector lengths against the dimensions.
void check_expr(const Expr& e, std::size_t state_dim, std::size_t input_dim);

}  // namespace entrobound
