#include "entrobound/entropy_unc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <set>

#include "entrobound/kernels.hpp"

namespace entrobound {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Csr csr_from(std::size_t n, std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges) {
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  Csr g;
  g.n = n;
  g.offsets.assign(n + 1, 0);
  for (auto [a, b] : edges) {
    if (a >= n || b >= n) throw Error("weighted graph: edge endpoint out of range");
    ++g.offsets[a + 1];
    g.cols.push_back(b);
  }
  for (std::size_t v = 0; v < n; ++v) g.offsets[v + 1] += g.offsets[v];
  return g;
}

Csr transpose(const Csr& g) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> rev;
  rev.reserve(g.edges());
  for (std::uint32_t v = 0; v < g.n; ++v) {
    for (auto w : g.row(v)) rev.emplace_back(w, v);
  }
  return csr_from(g.n, rev);
}

void require_out_edges(const WeightedDigraph& g) {
  for (std::size_t v = 0; v < g.size(); ++v) {
    if (g.adj.offsets[v] == g.adj.offsets[v + 1]) {
      throw Error("node " + std::to_string(v) + " has no outgoing edge");
    }
  }
}

}  // namespace

WeightedDigraph WeightedDigraph::from_edges(std::size_t n,
                                            std::vector<std::pair<std::uint32_t, std::uint32_t>> edges,
                                            std::vector<double> weight) {
  if (weight.size() != n) throw Error("weighted graph: one weight per node required");
  WeightedDigraph g;
  g.adj = csr_from(n, edges);
  g.weight = std::move(weight);
  g.out_count.resize(n);
  for (std::size_t v = 0; v < n; ++v) g.out_count[v] = g.adj.offsets[v + 1] - g.adj.offsets[v];
  return g;
}

WeightedDigraph WeightedDigraph::with_branching_weights(
    std::size_t n, std::vector<std::pair<std::uint32_t, std::uint32_t>> edges) {
  auto g = from_edges(n, std::move(edges), std::vector<double>(n, 0.0));
  for (std::size_t v = 0; v < n; ++v) g.weight[v] = g.out_count[v] ? std::log2(double(g.out_count[v])) : 0.0;
  return g;
}

WeightedDigraph build_weighted_graph(const Abstraction& abs, const DetController& d,
                                     const Partition& p) {
  if (abs.tau != 1) throw Error("uncertain pipeline requires tau = 1");
  std::vector<std::uint32_t> element_of_cell(abs.grid.size(), UINT32_MAX);
  for (std::size_t k = 0; k < d.size(); ++k) element_of_cell[d.domain[k].index] = p.element_of[k];
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  for (std::size_t k = 0; k < d.size(); ++k) {
    const auto q = abs.q_position(d.domain[k]);
    if (!q || !abs.stays_in_q(*q, d.choice[k])) throw Error("partition not invariant");
    const std::uint32_t from = p.element_of[k];
    abs.grid.for_each_cell(abs.post_box(*q, d.choice[k]), [&](CellId c) {
      const std::uint32_t to = element_of_cell[c.index];
      if (to == UINT32_MAX) throw Error("partition not invariant");
      edges.emplace_back(from, to);
    });
  }
  auto g = WeightedDigraph::with_branching_weights(p.size(), std::move(edges));
  // T(A) is covered by the elements of D(A): every successor cell lies in one of them
  require_out_edges(g);
  return g;
}

CycleMean max_cycle_mean(const WeightedDigraph& g, std::size_t max_parent_entries) {
  require_out_edges(g);
  const SccResult comps = scc(g.adj);
  CycleMean best;
  best.value = kNegInf;
  std::vector<std::uint32_t> local(g.size(), UINT32_MAX);
  for (std::size_t c = 0; c < comps.components.size(); ++c) {
    if (comps.trivial[c]) continue;
    const auto& nodes = comps.components[c];
    const std::size_t m = nodes.size();
    for (std::uint32_t i = 0; i < m; ++i) local[nodes[i]] = i;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> in_edges;
    std::vector<double> w(m);
    for (std::uint32_t i = 0; i < m; ++i) {
      w[i] = g.weight[nodes[i]];
      for (auto t : g.adj.row(nodes[i])) {
        if (comps.component_of[t] == c) in_edges.emplace_back(local[t], i);
      }
    }
    const Csr in = csr_from(m, in_edges);
    const bool witness = m * (m + 1) <= max_parent_entries;
    std::vector<std::uint32_t> parent(witness ? (m + 1) * m : 0);

    std::vector<double> dk(m, 0.0);
    std::vector<double> val(m);
    std::vector<double> next(m);
    auto step = [&](std::size_t k, bool record) {
      kernels::add(m, dk.data(), w.data(), val.data());
      kernels::gather_max(m, in.offsets.data(), in.cols.data(), val.data(), next.data());
      if (record) {
        for (std::uint32_t v = 0; v < m; ++v) {
          for (auto u : in.row(v)) {
            if (val[u] == next[v]) {
              parent[k * m + v] = u;
              break;
            }
          }
        }
      }
      dk.swap(next);
    };
    for (std::size_t k = 1; k <= m; ++k) step(k, witness);
    const std::vector<double> dn = dk;
    std::vector<double> lam(m, std::numeric_limits<double>::infinity());
    std::fill(dk.begin(), dk.end(), 0.0);
    for (std::size_t k = 0; k < m; ++k) {
      kernels::karp_update(m, dn.data(), dk.data(), static_cast<double>(m - k), lam.data());
      if (k + 1 < m) step(k + 1, false);
    }
    std::uint32_t vstar = 0;
    for (std::uint32_t v = 1; v < m; ++v) {
      if (lam[v] > lam[vstar]) vstar = v;
    }
    if (!(lam[vstar] > best.value)) continue;
    best.value = lam[vstar];
    best.cycle.clear();
    best.cycle_mean = 0;
    if (!witness) continue;
    // walk of m edges ending at vstar; every cycle on it is a candidate witness
    std::vector<std::uint32_t> walk(m + 1);
    walk[m] = vstar;
    for (std::size_t k = m; k >= 1; --k) walk[k - 1] = parent[k * m + walk[k]];
    std::vector<std::uint32_t> stack;
    std::vector<std::int64_t> at(m, -1);
    double best_mean = kNegInf;
    for (auto v : walk) {
      if (at[v] >= 0) {
        std::vector<std::uint32_t> cyc(stack.begin() + at[v], stack.end());
        double sum = 0;
        for (auto u : cyc) sum += w[u];
        const double mean = sum / static_cast<double>(cyc.size());
        if (mean > best_mean) {
          best_mean = mean;
          best.cycle.clear();
          for (auto u : cyc) best.cycle.push_back(nodes[u]);
        }
        while (stack.size() > static_cast<std::size_t>(at[v]) + 1) {
          at[stack.back()] = -1;
          stack.pop_back();
        }
        continue;
      }
      at[v] = static_cast<std::int64_t>(stack.size());
      stack.push_back(v);
    }
    best.cycle_mean = best_mean;
  }
  if (best.value == kNegInf) throw Error("max_cycle_mean: graph has no cycle");
  return best;
}

double brute_force_mcm(const WeightedDigraph& g) {
  const std::size_t n = g.size();
  if (n > 12) throw Error("brute_force_mcm: more than 12 nodes");
  double best = kNegInf;
  std::vector<std::uint8_t> used(n, 0);
  // simple cycles whose smallest node is s
  auto dfs = [&](auto&& self, std::uint32_t s, std::uint32_t v, double sum, int len) -> void {
    for (auto t : g.adj.row(v)) {
      if (t == s) best = std::max(best, (sum + g.weight[v]) / (len + 1));
      if (t <= s || used[t]) continue;
      used[t] = 1;
      self(self, s, t, sum + g.weight[v], len + 1);
      used[t] = 0;
    }
  };
  for (std::uint32_t s = 0; s < n; ++s) {
    used[s] = 1;
    dfs(dfs, s, s, 0.0, 0);
    used[s] = 0;
  }
  if (best == kNegInf) throw Error("brute_force_mcm: graph has no cycle");
  return best;
}

double max_path_weight(const WeightedDigraph& g, int tau) {
  if (tau < 1) throw Error("tau must be at least 1");
  const std::size_t n = g.size();
  const Csr in = transpose(g.adj);
  std::vector<double> d(n, 0.0);
  std::vector<double> val(n);
  std::vector<double> next(n);
  for (int k = 1; k < tau; ++k) {
    kernels::add(n, d.data(), g.weight.data(), val.data());
    kernels::gather_max(n, in.offsets.data(), in.cols.data(), val.data(), next.data());
    d.swap(next);
  }
  return *std::max_element(d.begin(), d.end());
}

double ExpansionCheck::log2_rinv() const { return std::log2(static_cast<double>(exhaustive_min)); }

std::uint64_t expansion_number(const std::vector<std::vector<std::uint32_t>>& J, std::size_t a_size) {
  (void)a_size;
  if (J.empty()) throw Error("expansion_number: empty sequence set");
  const std::size_t tau = J.front().size();
  std::map<std::vector<std::uint32_t>, std::set<std::uint32_t>> succ_of_prefix;
  std::set<std::uint32_t> first;
  for (const auto& a : J) {
    first.insert(a[0]);
    for (std::size_t t = 0; t + 1 < tau; ++t) {
      succ_of_prefix[std::vector<std::uint32_t>(a.begin(), a.begin() + t + 1)].insert(a[t + 1]);
    }
  }
  std::uint64_t best = 0;
  for (const auto& a : J) {
    std::uint64_t prod = first.size();
    for (std::size_t t = 0; t + 1 < tau; ++t) {
      prod *= succ_of_prefix[std::vector<std::uint32_t>(a.begin(), a.begin() + t + 1)].size();
    }
    best = std::max(best, prod);
  }
  return best;
}

bool is_spanning(const std::vector<std::vector<std::uint32_t>>& J, std::size_t a_size,
                 const std::vector<std::vector<std::uint32_t>>& succ) {
  if (J.empty()) return false;
  const std::size_t tau = J.front().size();
  std::set<std::uint32_t> first;
  std::map<std::vector<std::uint32_t>, std::set<std::uint32_t>> succ_of_prefix;
  for (const auto& a : J) {
    first.insert(a[0]);
    for (std::size_t t = 0; t + 1 < tau; ++t) {
      succ_of_prefix[std::vector<std::uint32_t>(a.begin(), a.begin() + t + 1)].insert(a[t + 1]);
    }
  }
  if (first.size() != a_size) return false;
  for (const auto& a : J) {
    for (std::size_t t = 0; t + 1 < tau; ++t) {
      const auto& p = succ_of_prefix[std::vector<std::uint32_t>(a.begin(), a.begin() + t + 1)];
      for (auto s : succ[a[t]]) {
        if (!p.count(s)) return false;
      }
    }
  }
  return true;
}

ExpansionCheck expansion_oracle(std::size_t a_size,
                                const std::vector<std::vector<std::uint32_t>>& succ, int tau) {
  if (a_size == 0 || a_size > 4 || tau < 1 || tau > 4) {
    throw Error("expansion_oracle: requires 1 <= |A| <= 4 and 1 <= tau <= 4");
  }
  if (succ.size() != a_size) throw Error("expansion_oracle: one successor set per element");
  std::vector<std::uint32_t> dmask(a_size, 0);
  for (std::size_t a = 0; a < a_size; ++a) {
    if (succ[a].empty()) throw Error("expansion_oracle: empty successor set");
    for (auto s : succ[a]) {
      if (s >= a_size) throw Error("expansion_oracle: successor out of range");
      dmask[a] |= 1u << s;
    }
  }
  // supersets of each D(a), fewest members first
  const std::uint32_t full = (1u << a_size) - 1;
  std::vector<std::vector<std::uint32_t>> options(a_size);
  for (std::size_t a = 0; a < a_size; ++a) {
    for (std::uint32_t m = 1; m <= full; ++m) {
      if ((m & dmask[a]) == dmask[a]) options[a].push_back(m);
    }
    std::stable_sort(options[a].begin(), options[a].end(), [](std::uint32_t x, std::uint32_t y) {
      return __builtin_popcount(x) < __builtin_popcount(y);
    });
  }

  ExpansionCheck out;
  out.exhaustive_min = UINT64_MAX;
  struct Prefix {
    std::vector<std::uint32_t> seq;
    std::uint64_t prod;
  };
  auto rec = [&](auto&& self, std::vector<Prefix>& frontier, std::size_t idx,
                 std::vector<Prefix>& next) -> void {
    if (frontier.front().seq.size() == static_cast<std::size_t>(tau)) {
      std::vector<std::vector<std::uint32_t>> J;
      for (const auto& p : frontier) J.push_back(p.seq);
      if (!is_spanning(J, a_size, succ)) throw Error("expansion_oracle: enumerated a non-spanning set");
      ++out.candidates;
      out.exhaustive_min = std::min(out.exhaustive_min, expansion_number(J, a_size));
      return;
    }
    if (idx == frontier.size()) {
      std::vector<Prefix> deeper;
      self(self, next, 0, deeper);
      return;
    }
    const auto& pre = frontier[idx];
    for (std::uint32_t m : options[pre.seq.back()]) {
      const std::uint64_t prod = pre.prod * static_cast<std::uint64_t>(__builtin_popcount(m));
      if (prod * a_size >= out.exhaustive_min) continue;
      const std::size_t mark = next.size();
      for (std::uint32_t s = 0; s < a_size; ++s) {
        if (!(m & (1u << s))) continue;
        Prefix child{pre.seq, prod};
        child.seq.push_back(s);
        next.push_back(std::move(child));
      }
      self(self, frontier, idx + 1, next);
      next.resize(mark);
    }
  };
  std::vector<Prefix> roots;
  for (std::uint32_t a = 0; a < a_size; ++a) roots.push_back({{a}, 1});
  std::vector<Prefix> next;
  rec(rec, roots, 0, next);

  // N(W_tau(G)) = |A| * max over walks of prod |D(alpha(t))|, t < tau - 1
  std::vector<std::uint64_t> best(a_size, 1);
  for (int k = 1; k < tau; ++k) {
    std::vector<std::uint64_t> nb(a_size, 0);
    for (std::size_t a = 0; a < a_size; ++a) {
      for (auto s : succ[a]) nb[s] = std::max(nb[s], best[a] * succ[a].size());
    }
    best = nb;
  }
  out.graph_value = a_size * *std::max_element(best.begin(), best.end());
  return out;
}

UncBound unc_upper_bound(const WeightedDigraph& g) {
  UncBound out;
  out.mcm = max_cycle_mean(g);
  out.bound = out.mcm.value;
  out.elements = g.size();
  out.edges = g.adj.edges();
  out.max_weight = *std::max_element(g.weight.begin(), g.weight.end());
  return out;
}

UncBound unc_upper_bound(const Abstraction& abs, const DetController& d, const Partition& p) {
  return unc_upper_bound(build_weighted_graph(abs, d, p));
}

void write_weighted_dot(std::ostream& os, const WeightedDigraph& g) {
  os << "digraph W {\n";
  char buf[64];
  for (std::size_t v = 0; v < g.size(); ++v) {
    std::snprintf(buf, sizeof buf, "%.4f", g.weight[v]);
    os << "  a" << v << " [label=\"" << v << "\\nw=" << buf << "\"];\n";
  }
  for (std::uint32_t v = 0; v < g.size(); ++v) {
    for (auto t : g.adj.row(v)) os << "  a" << v << " -> a" << t << ";\n";
  }
  os << "}\n";
}

}  // namespace entrobound
