#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "support.hpp"

using namespace entrobound;

namespace {

CountMatrix dense_count(const std::vector<std::vector<std::uint32_t>>& m) {
  CountMatrix R;
  R.pattern.n = m.size();
  R.pattern.offsets.assign(1, 0);
  for (const auto& row : m) {
    for (std::uint32_t j = 0; j < row.size(); ++j)
      if (row[j]) {
        R.pattern.cols.push_back(j);
        R.count.push_back(row[j]);
      }
    R.pattern.offsets.push_back(static_cast<std::uint32_t>(R.pattern.cols.size()));
  }
  return R;
}

std::vector<std::vector<bool>> reachability(const Csr& g) {
  const std::size_t n = g.n;
  std::vector<std::vector<bool>> r(n, std::vector<bool>(n, false));
  for (std::size_t v = 0; v < n; ++v) {
    r[v][v] = true;
    std::vector<std::uint32_t> stack{static_cast<std::uint32_t>(v)};
    while (!stack.empty()) {
      const auto a = stack.back();
      stack.pop_back();
      for (auto b : g.row(a))
        if (!r[v][b]) {
          r[v][b] = true;
          stack.push_back(b);
        }
    }
  }
  return r;
}

// Largest strongly connected piece of a random labeled graph, as its own graph.
LabeledDigraph random_component(std::mt19937_64& rng, std::size_t n, std::uint32_t labels) {
  for (;;) {
    const auto g = testing::random_labeled(rng, n, labels, 0.3);
    const auto comps = scc(g.adj);
    std::size_t best = 0;
    for (std::size_t c = 1; c < comps.components.size(); ++c)
      if (comps.components[c].size() > comps.components[best].size()) best = c;
    if (!comps.trivial[best]) return induced_subgraph(g, comps.components[best]);
  }
}

bool right_resolving(const RightResolvingGraph& rr) {
  std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
  for (const auto& e : rr.edges)
    if (!seen.emplace(e[0], e[2]).second) return false;
  return true;
}

struct ExampleGraph {
  LabeledDigraph g;
  int tau;
};

ExampleGraph example_graph(const char* name, Determinizer det = Determinizer::maxfreq,
                           PartitionMode mode = PartitionMode::by_input) {
  const auto abs = build_abstraction(builtin_system(name));
  const auto c = invariant_controller(abs);
  const auto d = determinize(det, c, abs);
  return {labeled_graph(transition_matrix(abs, d), d, coarse_partition(d, mode)), abs.tau};
}

}  // namespace

TEST_CASE("scc agrees with mutual reachability") {
  auto& rng = testing::rng();
  for (int k = 0; k < 200; ++k) {
    const auto g = testing::random_labeled(rng, 1 + testing::below(15), 3, 0.12);
    const auto comps = scc(g.adj);
    const auto r = reachability(g.adj);
    for (std::size_t a = 0; a < g.size(); ++a)
      for (std::size_t b = 0; b < g.size(); ++b)
        CHECK((comps.component_of[a] == comps.component_of[b]) == (r[a][b] && r[b][a]));
    // reverse topological order: edges never point to a later component
    for (std::size_t a = 0; a < g.size(); ++a)
      for (auto b : g.adj.row(a)) CHECK(comps.component_of[b] <= comps.component_of[a]);
    for (std::size_t c = 0; c < comps.components.size(); ++c) {
      const auto& nodes = comps.components[c];
      bool loop = false;
      for (auto b : g.adj.row(nodes[0])) loop = loop || b == nodes[0];
      CHECK(bool(comps.trivial[c]) == (nodes.size() == 1 && !loop));
    }
  }
}

TEST_CASE("spectral radius of small matrices") {
  CHECK(spectral_radius(dense_count({{1, 1}, {1, 0}})) == doctest::Approx(std::numbers::phi));
  CHECK(spectral_radius(dense_count({{0, 1}, {0, 0}})) == 0.0);
  CHECK(spectral_radius(dense_count({{3}})) == doctest::Approx(3.0));
  CHECK(spectral_radius(dense_count({{0, 1}, {1, 0}})) == doctest::Approx(1.0));
  // reducible: blocks {0,1} and {2} with radii 2 and 3
  CHECK(spectral_radius(dense_count({{1, 1, 1}, {1, 1, 0}, {0, 0, 3}})) == doctest::Approx(3.0));
  CHECK(spectral_radius(dense_count({{2, 1}, {1, 2}})) == doctest::Approx(3.0));
}

TEST_CASE("spectral radius matches the growth of matrix powers") {
  for (int k = 0; k < 50; ++k) {
    const std::size_t n = 1 + testing::below(6);
    std::vector<std::vector<std::uint32_t>> m(n, std::vector<std::uint32_t>(n));
    for (auto& row : m)
      for (auto& x : row) x = testing::below(3) == 0 ? static_cast<std::uint32_t>(1 + testing::below(3)) : 0;
    // rho(A + I) = rho(A) + 1 and A + I is aperiodic, so the normalized iteration converges
    std::vector<double> x(n, 1.0);
    double growth = 0;
    for (int step = 0; step < 20000; ++step) {
      std::vector<double> y = x;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) y[j] += x[i] * m[i][j];
      growth = std::accumulate(y.begin(), y.end(), 0.0) / std::accumulate(x.begin(), x.end(), 0.0);
      for (auto& v : y) v /= growth;
      x = y;
    }
    CHECK(spectral_radius(dense_count(m)) + 1 == doctest::Approx(growth).epsilon(1e-3));
  }
}

TEST_CASE("right_resolve presents the same words") {
  auto& rng = testing::rng();
  for (int k = 0; k < 60; ++k) {
    const auto g = random_component(rng, 2 + testing::below(8), 1 + static_cast<std::uint32_t>(testing::below(3)));
    for (auto seed : {RrSeed::singletons, RrSeed::full_set}) {
      const auto rr = right_resolve(g, 1'000'000, seed);
      CHECK(right_resolving(rr));
      for (int n = 1; n <= 8; ++n) CHECK(testing::words_by_walks(rr, n) == testing::words_by_walks(g, n));
    }
  }
}

TEST_CASE("seed modes give the same entropy") {
  auto& rng = testing::rng();
  for (int k = 0; k < 100; ++k) {
    const auto g = random_component(rng, 2 + testing::below(12), 1 + static_cast<std::uint32_t>(testing::below(4)));
    const double a = spectral_radius(right_resolve(g, 1'000'000, RrSeed::singletons).R);
    const double b = spectral_radius(right_resolve(g, 1'000'000, RrSeed::full_set).R);
    CHECK(a == doctest::Approx(b).epsilon(1e-8));
  }
}

TEST_CASE("count_words equals explicit enumeration") {
  auto& rng = testing::rng();
  for (int k = 0; k < 60; ++k) {
    const auto g = testing::random_labeled(rng, 1 + testing::below(9), 1 + static_cast<std::uint32_t>(testing::below(3)));
    for (int n = 0; n <= 7; ++n) {
      const auto words = testing::words_by_walks(g, n);
      CHECK(count_words(g, n) == words.size());
    }
  }
  CHECK_THROWS_AS(count_words(testing::random_labeled(rng, 65, 2), 3), Error);
}

TEST_CASE("entropy does not depend on the presentation") {
  auto& rng = testing::rng();
  for (int k = 0; k < 50; ++k) {
    const auto g = testing::random_labeled(rng, 2 + testing::below(10), 3);
    // permute nodes and rename labels
    std::vector<std::uint32_t> perm(g.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::array<std::uint32_t, 3>> edges;
    for (std::uint32_t v = 0; v < g.size(); ++v)
      for (std::uint32_t e = g.adj.offsets[v]; e < g.adj.offsets[v + 1]; ++e)
        edges.push_back({perm[v], perm[g.adj.cols[e]], 10 + 7 * g.labels[e]});
    const auto h = LabeledDigraph::from_edges(g.size(), edges);
    CHECK(det_upper_bound(g, 1).h_BA == doctest::Approx(det_upper_bound(h, 1).h_BA).epsilon(1e-9));
  }
}

TEST_CASE("example system: seven follower sets and rho = 1 + sqrt 2") {
  const auto [g, tau] = example_graph("example1");
  const auto db = det_upper_bound(g, tau);
  REQUIRE(db.components.size() == 1);
  CHECK(db.components[0].cells == 9);
  CHECK(db.components[0].rr_nodes == 7);
  CHECK(db.components[0].rho == doctest::Approx(1 + std::sqrt(2.0)).epsilon(1e-9));
  CHECK(db.bound == doctest::Approx(1.2716).epsilon(1e-4));
  // word growth approaches the entropy from above
  const auto w20 = count_words(g, 20), w21 = count_words(g, 21);
  const double ratio = std::log2(w21.convert_to<double>() / w20.convert_to<double>());
  CHECK(ratio == doctest::Approx(db.h_BA).epsilon(1e-3));
}

TEST_CASE("det bound is at most log2 of the element count per step") {
  for (const char* name : {"example1", "linear2d"}) {
    for (auto mode : {PartitionMode::by_input, PartitionMode::by_cell}) {
      const auto [g, tau] = example_graph(name, Determinizer::maxfreq, mode);
      std::set<std::uint32_t> labels(g.labels.begin(), g.labels.end());
      const auto db = det_upper_bound(g, tau);
      CHECK(db.h_BA <= std::log2(double(labels.size())) + 1e-9);
      CHECK(db.h_BA >= 0);
    }
  }
}

TEST_CASE("right_resolve budget") {
  auto& rng = testing::rng();
  const auto g = random_component(rng, 12, 2);
  CHECK_THROWS_AS(right_resolve(g, 1), Error);
}

TEST_CASE("matrix and dot writers") {
  std::ostringstream os;
  write_matrix_brackets(os, dense_count({{1, 0}, {2, 1}}));
  CHECK(os.str().find("[1 0; 2 1]") != std::string::npos);
  const auto [g, tau] = example_graph("example1");
  std::ostringstream dot;
  write_graph_dot(dot, g);
  CHECK(dot.str().find("digraph") != std::string::npos);
}
