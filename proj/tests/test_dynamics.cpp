#include <doctest.h>

#include <cmath>

#include "support.hpp"

using namespace entrobound;
using testing::uniform;

TEST_CASE("interval arithmetic encloses point evaluations") {
  CHECK(pow(Interval(-1, 1), 2).lo == 0);
  CHECK(pow(Interval(-1, 1), 2).hi == 1);
  CHECK(pow(Interval(-2, 1), 3).lo == -8);
  const Interval s = sin(Interval(0, 3));
  CHECK(s.hi == 1);
  CHECK(s.lo == doctest::Approx(0));
  for (int k = 0; k < 2000; ++k) {
    const double a = uniform(-10, 10), w = uniform(0, 4);
    const Interval x(a, a + w);
    const double p = uniform(a, a + w);
    CHECK(sin(x).contains(std::sin(p)));
    CHECK(cos(x).contains(std::cos(p)));
    CHECK((x * x - x).contains(p * p - p));
  }
}

TEST_CASE("affine reach on the example system") {
  const auto p = builtin_system("example1");
  const HyperRect cell({-1.0 / 3, -2.0 / 3}, {1.0 / 3, 2.0 / 3});
  const double u0[] = {0.0};
  const auto r = reach(p.system, cell, u0);
  CHECK(r.exact);
  CHECK(r.enclosure.lb(0) == doctest::Approx(-2.0 / 3));
  CHECK(r.enclosure.ub(0) == doctest::Approx(2.0 / 3));
  CHECK(r.enclosure.lb(1) == doctest::Approx(-1.0 / 3));
  CHECK(r.enclosure.ub(1) == doctest::Approx(1.0 / 3));
  const double u1[] = {1.0};
  const auto r1 = reach(p.system, cell, u1);
  CHECK(r1.enclosure.lb(0) == doctest::Approx(1.0 / 3));
  CHECK(r1.enclosure.ub(1) == doctest::Approx(4.0 / 3));
}

TEST_CASE("affine reach adds the disturbance box") {
  const auto p = builtin_system("uncertain-linear");
  const HyperRect cell({0, 0}, {0.2, 0.2});
  const double u[] = {0.0};
  const auto r = reach(p.system, cell, u);
  // A = [2 1; -0.4 0.5]: x in [0, 0.6] then +-0.1
  CHECK(r.enclosure.lb(0) == doctest::Approx(-0.1));
  CHECK(r.enclosure.ub(0) == doctest::Approx(0.7));
  CHECK(r.enclosure.lb(1) == doctest::Approx(-0.08 - 0.1));
  CHECK(r.enclosure.ub(1) == doctest::Approx(0.1 + 0.1));
}

TEST_CASE("ODE reach of x' = -x") {
  const Expr rhs = {Term{-1.0, {1}, {}, {}, {}}};
  const HyperRect cell({0.9}, {1.1});
  const double u[] = {0.0};
  const auto r = reach_ode({rhs}, cell, u, 1.0, 1.0);
  CHECK(r.enclosure.center(0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-8));
  CHECK(r.enclosure.radius(0) == doctest::Approx(0.1 * std::exp(1.0)).epsilon(1e-12));
  CHECK(r.enclosure.lb(0) <= 0.9 * std::exp(-1.0));
  CHECK(r.enclosure.ub(0) >= 1.1 * std::exp(-1.0));
  const auto flow = rk4_flow({rhs}, std::vector<double>{2.0}, u, 0.5);
  CHECK(flow[0] == doctest::Approx(2 * std::exp(-0.5)).epsilon(1e-9));
}

TEST_CASE("reach encloses sampled successors for every builtin") {
  for (const auto& name : builtin_names()) {
    CAPTURE(name);
    BuiltinParams params;
    if (name == "pendulum") params.sampling = 0.1;
    const auto p = builtin_system(name, params);
    const auto grid = p.state_grid();
    const auto inputs = InputGrid::build(p.input_box, p.eta_i);
    for (int k = 0; k < 40; ++k) {
      const CellId c{testing::below(grid.size())};
      const auto rect = grid.cell_rect(c);
      const auto& u = inputs.points[testing::below(inputs.size())];
      const auto enc = reach(p.system, rect, u).enclosure;
      for (int j = 0; j < 20; ++j) {
        const auto x = testing::random_point(rect);
        auto y = step_point(p.system, x, u);
        if (p.system.disturbance) {
          for (std::size_t i = 0; i < y.size(); ++i)
            y[i] += uniform(p.system.disturbance->lb(i), p.system.disturbance->ub(i));
        }
        CHECK(enc.contains(y, 1e-9));
      }
    }
  }
}

TEST_CASE("interval reach is inclusion monotone") {
  const auto p = builtin_system("henon");
  for (int k = 0; k < 500; ++k) {
    const double x = uniform(-3, 3), y = uniform(-3, 3);
    const double w = uniform(0, 0.5), h = uniform(0, 0.5);
    const HyperRect outer({x, y}, {x + w, y + h});
    const HyperRect inner({x + uniform(0, w / 2), y + uniform(0, h / 2)}, {x + w, y + h});
    const double u[] = {uniform(-0.08, 0.08), uniform(-0.08, 0.08)};
    CHECK(reach(p.system, outer, u).enclosure.contains(reach(p.system, inner, u).enclosure, 0.0));
  }
}

TEST_CASE("henon reversed map inverts the forward map") {
  const auto p = builtin_system("henon");
  REQUIRE(p.reversed);
  for (int k = 0; k < 200; ++k) {
    const std::vector<double> x = {uniform(-3, 3), uniform(-3, 3)};
    const std::vector<double> u = {uniform(-0.08, 0.08), uniform(-0.08, 0.08)};
    const auto y = step_point(p.system, x, u);
    const auto back = step_point(*p.reversed, y, u);
    CHECK(back[0] == doctest::Approx(x[0]).epsilon(1e-9));
    CHECK(back[1] == doctest::Approx(x[1]).epsilon(1e-9));
  }
}

TEST_CASE("builtin catalogue") {
  const auto names = builtin_names();
  CHECK(names.size() == 5);
  CHECK_THROWS_AS(builtin_system("nope"), Error);
  const auto pend = builtin_system("pendulum");
  CHECK(*pend.theory == doctest::Approx(2.8854).epsilon(1e-4));
  CHECK(pend.time_scale() == doctest::Approx(0.01));
  BuiltinParams strong;
  strong.rho = 50;
  strong.b = 10;
  CHECK(*builtin_system("pendulum", strong).theory == doctest::Approx(20.6058).epsilon(1e-4));
  BuiltinParams bad;
  bad.rho = 3;
  CHECK_THROWS_AS(builtin_system("pendulum", bad), Error);
  const auto ex = builtin_system("example1");
  CHECK(ex.state_grid().size() == 9);
  CHECK(InputGrid::build(ex.input_box, ex.eta_i).size() == 3);
}

TEST_CASE("system validation") {
  SystemDef s;
  s.name = "bad";
  s.kind = SystemKind::affine;
  s.state_dim = 2;
  s.input_dim = 1;
  s.A = Matrix(2, 2);
  s.B = Matrix(1, 1);
  CHECK_THROWS_AS(s.validate(), Error);
  s.B = Matrix(2, 1);
  CHECK_NOTHROW(s.validate());
  s.disturbance = HyperRect({0.1, 0.1}, {0.2, 0.2});
  CHECK_FALSE(s.disturbance_contains_origin());
}
