#include "entrobound/dynamics.hpp"

#include <cmath>
#include <numbers>

namespace entrobound {

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows_in) {
  Matrix m(rows_in.size(), rows_in.empty() ? 0 : rows_in.front().size());
  m.data.clear();
  for (const auto& r : rows_in) {
    if (r.size() != m.cols) throw Error("matrix: ragged rows");
    m.data.insert(m.data.end(), r.begin(), r.end());
  }
  return m;
}

std::vector<std::vector<double>> Matrix::to_rows() const {
  std::vector<std::vector<double>> out(rows, std::vector<double>(cols));
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) out[i][j] = (*this)(i, j);
  return out;
}

std::string_view to_string(SystemKind k) {
  switch (k) {
    case SystemKind::affine: return "affine";
    case SystemKind::polynomial: return "polynomial";
    case SystemKind::sampled_ode: return "sampled-ode";
  }
  return "?";
}

SystemKind system_kind_from_string(std::string_view s) {
  if (s == "affine") return SystemKind::affine;
  if (s == "polynomial" || s == "polynomial-map") return SystemKind::polynomial;
  if (s == "sampled-ode") return SystemKind::sampled_ode;
  throw Error("unknown system kind '" + std::string(s) + "'");
}

bool SystemDef::disturbance_contains_origin() const {
  if (!disturbance) return true;
  const std::vector<double> zero(disturbance->dim(), 0.0);
  return disturbance->contains(zero, 0.0);
}

void SystemDef::validate() const {
  if (state_dim == 0) throw Error("system '" + name + "': state_dim must be positive");
  if (disturbance && disturbance->dim() != state_dim) {
    throw Error("system '" + name + "': disturbance dimension mismatch");
  }
  switch (kind) {
    case SystemKind::affine:
      if (A.rows != state_dim || A.cols != state_dim || B.rows != state_dim || B.cols != input_dim) {
        throw Error("system '" + name + "': A/B dimension mismatch");
      }
      break;
    case SystemKind::sampled_ode:
      if (!(sampling_time > 0)) throw Error("system '" + name + "': sampled-ode requires T_s > 0");
      [[fallthrough]];
    case SystemKind::polynomial:
      if (map.size() != state_dim) throw Error("system '" + name + "': map has wrong component count");
      for (const auto& e : map) check_expr(e, state_dim, input_dim);
      break;
  }
}

namespace {

void check_dims(const HyperRect& rect, std::span<const double> u, std::size_t n, std::size_t m) {
  if (rect.dim() != n || u.size() != m) throw Error("reach: dimension mismatch");
}

HyperRect add_disturbance(std::vector<double> c, std::vector<double> r,
                          const std::optional<HyperRect>& W) {
  if (W) {
    if (W->dim() != c.size()) throw Error("reach: disturbance dimension mismatch");
    for (std::size_t i = 0; i < c.size(); ++i) {
      c[i] += W->center(i);
      r[i] += W->radius(i);
    }
  }
  return HyperRect::from_center(c, r);
}

}  // namespace

ReachResult reach_affine(const Matrix& A, const Matrix& B, const HyperRect& rect,
                         std::span<const double> u, const std::optional<HyperRect>& W) {
  const std::size_t n = A.rows;
  if (A.cols != n || B.rows != n) throw Error("reach_affine: dimension mismatch");
  check_dims(rect, u, n, B.cols);
  const auto off = affine_offset(B, u, W);
  std::vector<double> lb(n);
  std::vector<double> ub(n);
  for (std::size_t i = 0; i < n; ++i) {
    double c = 0;
    double r = 0;
    for (std::size_t j = 0; j < n; ++j) {
      c += A(i, j) * rect.center(j);
      r += std::abs(A(i, j)) * rect.radius(j);
    }
    c += off[i];
    if (W) r += W->radius(i);
    lb[i] = c - r;
    ub[i] = c + r;
  }
  return {HyperRect(std::move(lb), std::move(ub)), true};
}

std::vector<double> affine_offset(const Matrix& B, std::span<const double> u,
                                  const std::optional<HyperRect>& W) {
  std::vector<double> off(B.rows, 0.0);
  for (std::size_t i = 0; i < B.rows; ++i) {
    for (std::size_t j = 0; j < B.cols; ++j) off[i] += B(i, j) * u[j];
    if (W) off[i] += W->center(i);
  }
  return off;
}

ReachResult reach_interval(const std::vector<Expr>& map, const HyperRect& rect,
                           std::span<const double> u, const std::optional<HyperRect>& W) {
  std::vector<Interval> x(rect.dim());
  for (std::size_t i = 0; i < rect.dim(); ++i) x[i] = Interval{rect.lb(i), rect.ub(i)};
  std::vector<double> lb(map.size());
  std::vector<double> ub(map.size());
  for (std::size_t i = 0; i < map.size(); ++i) {
    const Interval y = evaluate(map[i], x, u);
    lb[i] = y.lo;
    ub[i] = y.hi;
    if (W) {
      lb[i] += W->lb(i);
      ub[i] += W->ub(i);
    }
  }
  return {HyperRect(std::move(lb), std::move(ub)), false};
}

std::vector<double> rk4_flow(const std::vector<Expr>& rhs, std::span<const double> x0,
                             std::span<const double> u, double T, int substeps) {
  const std::size_t n = x0.size();
  const double h = T / substeps;
  std::vector<double> x(x0.begin(), x0.end());
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  auto field = [&](const std::vector<double>& at, std::vector<double>& out) {
    for (std::size_t i = 0; i < n; ++i) out[i] = evaluate(rhs[i], at, u);
  };
  for (int s = 0; s < substeps; ++s) {
    field(x, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
    field(tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
    field(tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h * k3[i];
    field(tmp, k4);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
      if (!std::isfinite(x[i])) throw Error("integration diverged");
    }
  }
  return x;
}

ReachResult reach_ode(const std::vector<Expr>& rhs, const HyperRect& rect,
                      std::span<const double> u, double sampling_time, double growth_bound) {
  if (!(sampling_time > 0)) throw Error("reach_ode: T_s must be positive");
  const std::size_t n = rect.dim();
  std::vector<double> c(n);
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = rect.center(i);
  auto y = rk4_flow(rhs, c, u, sampling_time);
  const double grow = std::exp(growth_bound * sampling_time);
  for (std::size_t i = 0; i < n; ++i) r[i] = rect.radius(i) * grow;
  return {HyperRect::from_center(y, r), false};
}

ReachResult reach(const SystemDef& sys, const HyperRect& rect, std::span<const double> u) {
  switch (sys.kind) {
    case SystemKind::affine: return reach_affine(sys.A, sys.B, rect, u, sys.disturbance);
    case SystemKind::polynomial: return reach_interval(sys.map, rect, u, sys.disturbance);
    case SystemKind::sampled_ode: {
      auto res = reach_ode(sys.map, rect, u, sys.sampling_time, sys.growth_bound);
      if (!sys.disturbance) return res;
      std::vector<double> c(rect.dim()), r(rect.dim());
      for (std::size_t i = 0; i < rect.dim(); ++i) {
        c[i] = res.enclosure.center(i);
        r[i] = res.enclosure.radius(i);
      }
      return {add_disturbance(std::move(c), std::move(r), sys.disturbance), false};
    }
  }
  throw Error("reach: unknown system kind");
}

ReachOracle make_oracle(const SystemDef& sys) {
  return [sys](const HyperRect& rect, std::span<const double> u) { return reach(sys, rect, u); };
}

std::vector<double> step_point(const SystemDef& sys, std::span<const double> x,
                               std::span<const double> u) {
  const std::size_t n = sys.state_dim;
  std::vector<double> y(n, 0.0);
  switch (sys.kind) {
    case SystemKind::affine:
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) y[i] += sys.A(i, j) * x[j];
        for (std::size_t j = 0; j < sys.input_dim; ++j) y[i] += sys.B(i, j) * u[j];
      }
      return y;
    case SystemKind::polynomial:
      for (std::size_t i = 0; i < n; ++i) y[i] = evaluate(sys.map[i], x, u);
      return y;
    case SystemKind::sampled_ode:
      return rk4_flow(sys.map, x, u, sys.sampling_time);
  }
  return y;
}

bool rect_in_set(const HyperRect& rect, const StateSet& q) {
  if (const auto* box = std::get_if<HyperRect>(&q)) return box->contains(rect);
  return rect_in_polytope(rect, std::get<Polytope>(q));
}

double Problem::time_scale() const {
  return system.kind == SystemKind::sampled_ode ? system.sampling_time : 1.0;
}

UniformGrid Problem::state_grid() const {
  if (alignment == GridAlignment::lattice) return UniformGrid::lattice(state_box, eta_s);
  return UniformGrid(state_box, eta_s);
}

namespace {

Term term(double coef, std::vector<int> x, std::vector<int> u = {},
          std::vector<int> s = {}, std::vector<int> c = {}) {
  return Term{coef, std::move(x), std::move(u), std::move(s), std::move(c)};
}

Problem example1() {
  Problem p;
  p.system.name = "example1";
  p.system.kind = SystemKind::affine;
  p.system.state_dim = 2;
  p.system.input_dim = 1;
  p.system.A = Matrix::from_rows({{2.0, 0.0}, {0.0, 0.5}});
  p.system.B = Matrix::from_rows({{1.0}, {1.0}});
  p.q = HyperRect({-1, -2}, {1, 2});
  p.state_box = HyperRect({-1, -2}, {1, 2});
  p.eta_s = {2.0 / 3.0, 4.0 / 3.0};
  p.input_box = HyperRect({-1}, {1});
  p.eta_i = {1.0};
  return p;
}

Problem linear2d() {
  Problem p;
  p.system.name = "linear2d";
  p.system.kind = SystemKind::affine;
  p.system.state_dim = 2;
  p.system.input_dim = 1;
  p.system.A = Matrix::from_rows({{2.0, 0.0784}, {0.0784, 0.5041}});
  p.system.B = Matrix::from_rows({{0.9463}, {1.051}});
  p.q = Polytope({{0.0261, -0.4993}, {0.9986, 0.0523}, {-0.0261, 0.4993}, {-0.9986, -0.0523}},
                 {1, 1, 1, 1});
  p.state_box = HyperRect({-1.2, -2.1}, {1.2, 2.1});
  p.eta_s = {0.04, 0.08};
  p.input_box = HyperRect({-1}, {1});
  p.eta_i = {0.2};
  p.theory = 1.003;
  p.theory_note = "h_inv(Q)";
  return p;
}

Problem pendulum(const BuiltinParams& params) {
  const double rho = params.rho.value_or(1.0);
  const double b = params.b.value_or(1.0);
  const double ts = params.sampling.value_or(0.01);
  const double a = b * b + 1;
  if (!(rho > 0 && rho < a)) throw Error("pendulum: requires 0 < rho < b^2 + 1");
  Problem p;
  p.system.name = "pendulum";
  p.system.kind = SystemKind::sampled_ode;
  p.system.state_dim = 1;
  p.system.input_dim = 1;
  // -2b sin x cos x - sin^2 x + cos^2 x + u cos^2 x
  p.system.map = {{term(-2 * b, {}, {}, {1}, {1}), term(-1, {}, {}, {2}, {}),
                   term(1, {}, {}, {}, {2}), term(1, {}, {1}, {}, {2})}};
  p.system.sampling_time = ts;
  const double lo = std::atan(-b - std::sqrt(a + rho));
  const double hi = std::atan(-b - std::sqrt(a - rho));
  // |df/dx| = |-2b cos 2x - (2 + u) sin 2x| over Q padded by 1% of its width, |u| <= rho.
  // Scalar flows are monotone, so accepted trajectories stay between two points of Q.
  const double w = 0.01 * (hi - lo);
  const Interval x2(2 * (lo - w), 2 * (hi + w));
  const Interval dfdx = Interval(-2 * b) * cos(x2) - Interval(2 - rho, 2 + rho) * sin(x2);
  p.system.growth_bound = params.growth.value_or(std::max(std::abs(dfdx.lo), std::abs(dfdx.hi)));
  p.q = HyperRect({lo}, {hi});
  p.state_box = HyperRect({lo}, {hi});
  p.eta_s = {1e-6};
  p.input_box = HyperRect({-rho}, {rho});
  p.eta_i = {0.2 * rho};
  p.theory = 2.0 / std::numbers::ln2 * std::sqrt(a - rho);
  p.theory_note = "h_inv(Q) per unit time";
  return p;
}

Problem henon(const BuiltinParams& params) {
  const double eps = params.epsilon.value_or(0.08);
  const double r = 1.3 + std::sqrt(1.3 * 1.3 + 20);
  Problem p;
  p.system.name = "henon";
  p.system.kind = SystemKind::polynomial;
  p.system.state_dim = 2;
  p.system.input_dim = 2;
  // (5 - 0.3 y - x^2 + u, x + v)
  p.system.map = {{term(5, {}), term(-0.3, {0, 1}), term(-1, {2, 0}), term(1, {}, {1, 0})},
                  {term(1, {1, 0}), term(1, {}, {0, 1})}};
  SystemDef rev;
  rev.name = "henon-reversed";
  rev.kind = SystemKind::polynomial;
  rev.state_dim = 2;
  rev.input_dim = 2;
  // exact inverse: (y - v, (5 - (y - v)^2 + u - x) / 0.3)
  rev.map = {{term(1, {0, 1}), term(-1, {}, {0, 1})},
             {term(5 / 0.3, {}), term(-1 / 0.3, {0, 2}), term(2 / 0.3, {0, 1}, {0, 1}),
              term(-1 / 0.3, {}, {0, 2}), term(1 / 0.3, {}, {1, 0}), term(-1 / 0.3, {1, 0})}};
  p.reversed = rev;
  p.q = HyperRect({-r / 2, -r / 2}, {r / 2, r / 2});
  p.state_box = HyperRect({-r / 2, -r / 2}, {r / 2, r / 2});
  p.eta_s = {0.009, 0.009};
  p.input_box = HyperRect({-eps, -eps}, {eps, eps});
  p.eta_i = {0.01, 0.01};
  p.theory = 0.696;
  p.theory_note = "approximate limit as epsilon -> 0";
  return p;
}

Problem uncertain_linear() {
  Problem p;
  p.system.name = "uncertain-linear";
  p.system.kind = SystemKind::affine;
  p.system.state_dim = 2;
  p.system.input_dim = 1;
  p.system.A = Matrix::from_rows({{2.0, 1.0}, {-0.4, 0.5}});
  p.system.B = Matrix::from_rows({{1.0}, {1.0}});
  p.system.disturbance = HyperRect({-0.1, -0.1}, {0.1, 0.1});
  p.q = HyperRect({-1, -2}, {1, 2});
  p.state_box = HyperRect({-1, -2}, {1, 2});
  p.eta_s = {0.2, 0.2};
  p.input_box = HyperRect({-1}, {1});
  p.eta_i = {0.05};
  p.theory = 0.9316;
  p.theory_note = "lower bound on the uncertain invariance entropy";
  return p;
}

}  // namespace

std::vector<std::string> builtin_names() {
  return {"example1", "linear2d", "pendulum", "henon", "uncertain-linear"};
}

Problem builtin_system(std::string_view name, const BuiltinParams& params) {
  Problem p;
  if (name == "example1") p = example1();
  else if (name == "linear2d") p = linear2d();
  else if (name == "pendulum") p = pendulum(params);
  else if (name == "henon") p = henon(params);
  else if (name == "uncertain-linear") p = uncertain_linear();
  else throw Error("unknown builtin system '" + std::string(name) + "'");
  p.system.validate();
  if (p.reversed) p.reversed->validate();
  return p;
}

}  // namespace entrobound
