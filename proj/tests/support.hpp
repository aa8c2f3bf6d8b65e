#pragma once

// Shared generators and brute-force helpers for the test binaries.

#include <array>
#include <random>
#include <set>
#include <vector>

#include "entrobound/entropy_unc.hpp"

namespace testing {

using namespace entrobound;

inline std::mt19937_64& rng() {
  static std::mt19937_64 r(20240611);
  return r;
}

inline double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng()); }

inline std::size_t below(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng()); }

inline std::vector<double> random_point(const HyperRect& r) {
  std::vector<double> x(r.dim());
  for (std::size_t i = 0; i < r.dim(); ++i) x[i] = uniform(r.lb(i), r.ub(i));
  return x;
}

inline BuildOptions with_tau(int tau) {
  BuildOptions o;
  o.tau = tau;
  return o;
}

/// Random weighted digraph, every node with at least one successor.
inline WeightedDigraph random_weighted(std::mt19937_64& g, std::size_t n, double p = 0.35,
                                       double wmax = 3.0) {
  std::uniform_real_distribution<double> w(0.0, wmax);
  std::bernoulli_distribution coin(p);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  std::vector<double> weight(n);
  for (std::uint32_t a = 0; a < n; ++a) {
    weight[a] = w(g);
    bool any = false;
    for (std::uint32_t b = 0; b < n; ++b) {
      if (coin(g)) {
        edges.emplace_back(a, b);
        any = true;
      }
    }
    if (!any) edges.emplace_back(a, std::uniform_int_distribution<std::uint32_t>(0, n - 1)(g));
  }
  return WeightedDigraph::from_edges(n, std::move(edges), std::move(weight));
}

/// Random successor table over a elements, every row nonempty.
inline std::vector<std::vector<std::uint32_t>> random_succ(std::mt19937_64& g, std::size_t a) {
  std::vector<std::vector<std::uint32_t>> succ(a);
  for (std::uint32_t v = 0; v < a; ++v) {
    for (std::uint32_t w = 0; w < a; ++w)
      if (g() % 2) succ[v].push_back(w);
    if (succ[v].empty()) succ[v].push_back(static_cast<std::uint32_t>(g() % a));
  }
  return succ;
}

/// Random labeled digraph where each node's edges carry the node's label.
inline LabeledDigraph random_labeled(std::mt19937_64& g, std::size_t n, std::uint32_t labels,
                                     double p = 0.3) {
  std::bernoulli_distribution coin(p);
  std::vector<std::array<std::uint32_t, 3>> edges;
  for (std::uint32_t a = 0; a < n; ++a) {
    const auto l = static_cast<std::uint32_t>(g() % labels);
    bool any = false;
    for (std::uint32_t b = 0; b < n; ++b) {
      if (coin(g)) {
        edges.push_back({a, b, l});
        any = true;
      }
    }
    if (!any) edges.push_back({a, static_cast<std::uint32_t>(g() % n), l});
  }
  return LabeledDigraph::from_edges(n, edges);
}

/// Every label word of length n realized by a walk, by explicit enumeration.
inline std::set<std::vector<std::uint32_t>> words_by_walks(const LabeledDigraph& g, int n) {
  std::set<std::vector<std::uint32_t>> out;
  std::vector<std::uint32_t> word;
  auto rec = [&](auto&& self, std::uint32_t v, int left) -> void {
    if (left == 0) {
      out.insert(word);
      return;
    }
    for (std::uint32_t e = g.adj.offsets[v]; e < g.adj.offsets[v + 1]; ++e) {
      word.push_back(g.labels[e]);
      self(self, g.adj.cols[e], left - 1);
      word.pop_back();
    }
  };
  for (std::uint32_t v = 0; v < g.size(); ++v) rec(rec, v, n);
  return out;
}

/// Label words along walks of a right-resolving graph, given as (from, to, label) edges.
inline std::set<std::vector<std::uint32_t>> words_by_walks(const RightResolvingGraph& rr, int n) {
  return words_by_walks(LabeledDigraph::from_edges(rr.nodes.size(), rr.edges), n);
}

}  // namespace testing
