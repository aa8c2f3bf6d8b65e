#include <doctest.h>

#include <sstream>

#include "support.hpp"

using namespace entrobound;

namespace {

// Every admissible sequence keeps its cell inside Q and all post cells in the domain.
void check_fixed_point(const Abstraction& abs, const MultiController& c) {
  const auto in_domain = c.domain_mask();
  for (std::size_t p = 0; p < c.size(); ++p) {
    const auto q = abs.q_position(c.domain[p]);
    REQUIRE(q.has_value());
    for (SeqId s : c.admissible_at(p)) {
      REQUIRE(abs.stays_in_q(*q, s));
      for (CellId t : abs.post_cells(*q, s)) REQUIRE(in_domain[t.index]);
    }
  }
}

// Maximality: every rejected (cell, sequence) pair leaves Q or hits a cell outside the domain.
void check_maximal(const Abstraction& abs, const MultiController& c) {
  const auto in_domain = c.domain_mask();
  for (std::size_t q = 0; q < abs.q_cells.size(); ++q) {
    const auto pos = c.position(abs.q_cells[q]);
    for (SeqId s = 0; s < abs.num_sequences(); ++s) {
      bool ok = abs.stays_in_q(q, s);
      if (ok)
        for (CellId t : abs.post_cells(q, s)) ok = ok && in_domain[t.index];
      bool listed = false;
      if (pos) {
        const auto adm = c.admissible_at(*pos);
        listed = std::binary_search(adm.begin(), adm.end(), s);
      }
      CHECK(ok == listed);
    }
  }
}

}  // namespace

TEST_CASE("example system abstraction") {
  const auto p = builtin_system("example1");
  const auto abs = build_abstraction(p);
  CHECK(abs.q_cells.size() == 9);
  CHECK(abs.num_sequences() == 3);
  // center cell under u = 0 maps onto the middle row
  const auto q = abs.q_position(CellId{4});
  REQUIRE(q);
  REQUIRE(abs.stays_in_q(*q, 1));
  CHECK(abs.post_cells(*q, 1) == std::vector<CellId>{CellId{3}, CellId{4}, CellId{5}});
  CHECK(abs.post_volume(*q, 1) == 3);
  // corner cell under u = 1 leaves Q
  CHECK_FALSE(abs.stays_in_q(*abs.q_position(CellId{8}), 2));
  const auto c = invariant_controller(abs);
  CHECK_FALSE(c.empty());
  check_fixed_point(abs, c);
  check_maximal(abs, c);
}

TEST_CASE("input sequences use the first step as the most significant digit") {
  auto p = builtin_system("example1");
  p.tau = 2;
  const auto abs = build_abstraction(p, testing::with_tau(2));
  CHECK(abs.num_sequences() == 9);
  CHECK(abs.sequence_input(5, 0)[0] == 0.0);   // 5 = 1 * 3 + 2
  CHECK(abs.sequence_input(5, 1)[0] == 1.0);
  CHECK(abs.sequence_vector(5) == std::vector<double>{0.0, 1.0});
}

TEST_CASE("uncertain linear controller has 109 cells") {
  const auto p = builtin_system("uncertain-linear");
  const auto abs = build_abstraction(p);
  CHECK(abs.set_valued);
  const auto c = invariant_controller(abs);
  CHECK(c.size() == 109);
  check_fixed_point(abs, c);
  check_maximal(abs, c);
}

TEST_CASE("set-valued systems reject tau > 1") {
  const auto p = builtin_system("uncertain-linear");
  CHECK_THROWS_WITH_AS(build_abstraction(p, testing::with_tau(2)),
                       "tau > 1 is not supported for set-valued systems", Error);
}

TEST_CASE("batch affine path equals the generic path") {
  for (const char* name : {"example1", "linear2d", "uncertain-linear"}) {
    for (int tau : {1, 2}) {
      auto p = builtin_system(name);
      if (tau > 1 && p.system.set_valued()) continue;
      CAPTURE(name);
      CAPTURE(tau);
      const BuildOptions fast = testing::with_tau(tau);
      BuildOptions slow = testing::with_tau(tau);
      slow.batch_affine = false;
      const auto a = build_abstraction(p, fast);
      const auto b = build_abstraction(p, slow);
      REQUIRE(a.q_cells == b.q_cells);
      bool same = true;
      for (std::size_t q = 0; q < a.q_cells.size(); ++q)
        for (SeqId s = 0; s < a.num_sequences(); ++s) {
          same = same && a.stays_in_q(q, s) == b.stays_in_q(q, s);
          if (a.stays_in_q(q, s)) {
            const auto x = a.post_box(q, s), y = b.post_box(q, s);
            same = same && x.first == y.first && x.last == y.last;
          }
        }
      CHECK(same);
    }
  }
}

TEST_CASE("custom oracle replaces the built-in reachability") {
  const auto p = builtin_system("example1");
  BuildOptions opts;
  opts.oracle = [](const HyperRect& r, std::span<const double>) { return ReachResult{r, true}; };
  const auto abs = build_abstraction(p, opts);
  const auto c = invariant_controller(abs);
  CHECK(c.size() == 9);
  CHECK(c.admissible.size() == 27);
}

TEST_CASE("prefix counts match brute force") {
  const UniformGrid g(HyperRect({0, 0, 0}, {5, 4, 3}), {1, 1, 1});
  std::vector<std::uint8_t> mask(g.size());
  for (auto& m : mask) m = testing::below(2);
  const PrefixCount pc(g, mask);
  for (int k = 0; k < 300; ++k) {
    IndexBox box;
    for (std::size_t i = 0; i < 3; ++i) {
      auto a = static_cast<std::uint32_t>(testing::below(g.counts()[i]));
      auto b = static_cast<std::uint32_t>(testing::below(g.counts()[i]));
      box.first.push_back(std::min(a, b));
      box.last.push_back(std::max(a, b));
    }
    std::uint64_t n = 0;
    g.for_each_cell(box, [&](CellId c) { n += mask[c.index]; });
    CHECK(pc.count(box) == n);
  }
}

TEST_CASE("controller persistence round trip") {
  const auto p = builtin_system("linear2d");
  const auto c = invariant_controller(build_abstraction(p));
  std::stringstream ss;
  write_controller(ss, c);
  const auto back = read_controller(ss);
  CHECK(back.grid == c.grid);
  CHECK(back.tau == c.tau);
  CHECK(back.num_sequences == c.num_sequences);
  CHECK(back.domain == c.domain);
  CHECK(back.offsets == c.offsets);
  CHECK(back.admissible == c.admissible);
  std::stringstream bad("entrobound-controller 7");
  CHECK_THROWS_AS(read_controller(bad), Error);
}

TEST_CASE("closed-loop simulation stays in the controller domain") {
  for (const char* name : {"linear2d", "uncertain-linear"}) {
    CAPTURE(name);
    const auto p = builtin_system(name);
    const auto abs = build_abstraction(p);
    const auto c = invariant_controller(abs);
    REQUIRE_FALSE(c.empty());
    const auto& W = p.system.disturbance;
    for (int run = 0; run < 20; ++run) {
      auto x = testing::random_point(c.grid.cell_rect(c.domain[testing::below(c.size())]));
      for (int t = 0; t < 100; ++t) {
        const auto cell = c.grid.locate(x);
        REQUIRE(cell);
        const auto pos = c.position(*cell);
        REQUIRE(pos);
        const auto adm = c.admissible_at(*pos);
        const SeqId s = adm[testing::below(adm.size())];
        x = step_point(p.system, x, abs.sequence_input(s, 0));
        if (W)
          for (std::size_t i = 0; i < x.size(); ++i) x[i] += testing::uniform(W->lb(i), W->ub(i));
      }
    }
  }
}

TEST_CASE("forward/backward on the identity map keeps every cell") {
  SystemDef id;
  id.name = "identity";
  id.kind = SystemKind::polynomial;
  id.state_dim = 2;
  id.input_dim = 1;
  id.map = {{Term{1.0, {1, 0}, {}, {}, {}}}, {Term{1.0, {0, 1}, {}, {}, {}}}};
  const UniformGrid g(HyperRect({0, 0}, {1, 1}), {0.1, 0.25});
  const auto inputs = InputGrid::build(HyperRect({0}, {1}), {0.5});
  const auto r = forward_backward_domain(id, id, g, std::vector<std::uint8_t>(g.size(), 1), inputs);
  CHECK(r.cells == g.size());
  CHECK(r.alternations >= 1);
}

TEST_CASE("forward/backward shrinks to the cells with a two-sided orbit") {
  // x+ = 2x + u on [-1, 1]; the reversed map (x - u) / 2 keeps everything
  SystemDef f;
  f.name = "doubling";
  f.kind = SystemKind::affine;
  f.state_dim = 1;
  f.input_dim = 1;
  f.A = Matrix::from_rows({{2.0}});
  f.B = Matrix::from_rows({{1.0}});
  SystemDef r = f;
  r.A = Matrix::from_rows({{0.5}});
  r.B = Matrix::from_rows({{-0.5}});
  const UniformGrid g(HyperRect({-1}, {1}), {0.25});
  const auto inputs = InputGrid::build(HyperRect({-0.5}, {0.5}), {0.5});
  const std::vector<std::uint8_t> all(g.size(), 1);
  const auto fb = forward_backward_domain(f, r, g, all, inputs);
  const auto fwd = invariant_controller(build_abstraction(f, g, all, inputs));
  CHECK(fb.cells <= fwd.size());
  CHECK(fb.cells > 0);
}
