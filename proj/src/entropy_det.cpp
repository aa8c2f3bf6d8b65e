#include "entrobound/entropy_det.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <unordered_map>

#include "entrobound/kernels.hpp"
#include "entrobound/parallel.hpp"

namespace entrobound {

namespace {

struct VecHash {
  std::size_t operator()(const std::vector<std::uint32_t>& v) const noexcept {
    std::uint64_t h = 1469598103934665603ull;
    for (auto x : v) {
      h ^= x;
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

Csr csr_from_pairs(std::size_t n, std::vector<std::pair<std::uint32_t, std::uint32_t>>& pairs) {
  std::sort(pairs.begin(), pairs.end());
  Csr g;
  g.n = n;
  g.offsets.assign(n + 1, 0);
  g.cols.reserve(pairs.size());
  for (auto [a, b] : pairs) {
    ++g.offsets[a + 1];
    g.cols.push_back(b);
  }
  for (std::size_t v = 0; v < n; ++v) g.offsets[v + 1] += g.offsets[v];
  return g;
}

}  // namespace

Csr transition_matrix(const Abstraction& abs, const DetController& d) {
  std::vector<std::uint32_t> pos_of(abs.grid.size(), UINT32_MAX);
  for (std::size_t p = 0; p < d.size(); ++p) pos_of[d.domain[p].index] = static_cast<std::uint32_t>(p);
  std::vector<std::vector<std::uint32_t>> rows(d.size());
  parallel_for(d.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t p = b; p < e; ++p) {
      const auto q = abs.q_position(d.domain[p]);
      if (!q || !abs.stays_in_q(*q, d.choice[p])) {
        throw Error("transition matrix: cell " + std::to_string(d.domain[p].index) +
                    " leaves Q under its chosen input");
      }
      abs.grid.for_each_cell(abs.post_box(*q, d.choice[p]), [&](CellId c) {
        if (pos_of[c.index] == UINT32_MAX) {
          throw Error("transition matrix: successor outside the controller domain");
        }
        rows[p].push_back(pos_of[c.index]);
      });
    }
  });
  Csr g;
  g.n = d.size();
  g.offsets.assign(1, 0);
  for (auto& r : rows) {
    g.cols.insert(g.cols.end(), r.begin(), r.end());
    g.offsets.push_back(static_cast<std::uint32_t>(g.cols.size()));
  }
  return g;
}

LabeledDigraph LabeledDigraph::from_edges(std::size_t n,
                                          const std::vector<std::array<std::uint32_t, 3>>& edges) {
  auto sorted = edges;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  LabeledDigraph g;
  g.nodes.resize(n);
  for (std::size_t v = 0; v < n; ++v) g.nodes[v] = CellId{v};
  g.adj.n = n;
  g.adj.offsets.assign(n + 1, 0);
  for (const auto& e : sorted) {
    if (e[0] >= n || e[1] >= n) throw Error("labeled graph: edge endpoint out of range");
    ++g.adj.offsets[e[0] + 1];
    g.adj.cols.push_back(e[1]);
    g.labels.push_back(e[2]);
  }
  for (std::size_t v = 0; v < n; ++v) g.adj.offsets[v + 1] += g.adj.offsets[v];
  return g;
}

LabeledDigraph labeled_graph(const Csr& gamma, const DetController& d, const Partition& p) {
  LabeledDigraph g;
  g.nodes = d.domain;
  g.adj = gamma;
  g.labels.resize(gamma.cols.size());
  for (std::size_t v = 0; v < gamma.n; ++v) {
    for (std::uint32_t e = gamma.offsets[v]; e < gamma.offsets[v + 1]; ++e) g.labels[e] = p.element_of[v];
  }
  return g;
}

LabeledDigraph induced_subgraph(const LabeledDigraph& g, const std::vector<std::uint32_t>& keep) {
  std::unordered_map<std::uint32_t, std::uint32_t> local;
  for (std::uint32_t i = 0; i < keep.size(); ++i) local.emplace(keep[i], i);
  LabeledDigraph h;
  h.adj.n = keep.size();
  h.adj.offsets.assign(1, 0);
  for (auto v : keep) {
    h.nodes.push_back(g.nodes[v]);
    for (std::uint32_t e = g.adj.offsets[v]; e < g.adj.offsets[v + 1]; ++e) {
      auto it = local.find(g.adj.cols[e]);
      if (it == local.end()) continue;
      h.adj.cols.push_back(it->second);
      h.labels.push_back(g.labels[e]);
    }
    h.adj.offsets.push_back(static_cast<std::uint32_t>(h.adj.cols.size()));
  }
  return h;
}

std::size_t SccResult::nontrivial() const {
  return static_cast<std::size_t>(std::count(trivial.begin(), trivial.end(), 0));
}

SccResult scc(const Csr& g) {
  constexpr std::uint32_t kUnvisited = UINT32_MAX;
  const std::size_t n = g.n;
  std::vector<std::uint32_t> index(n, kUnvisited);
  std::vector<std::uint32_t> low(n, 0);
  std::vector<std::uint8_t> on_stack(n, 0);
  std::vector<std::uint32_t> stack;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> call;  // (node, next edge)
  SccResult res;
  res.component_of.assign(n, 0);
  std::uint32_t counter = 0;
  for (std::uint32_t root = 0; root < n; ++root) {
    if (index[root] != kUnvisited) continue;
    call.emplace_back(root, g.offsets[root]);
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      auto& [v, e] = call.back();
      if (e < g.offsets[v + 1]) {
        const std::uint32_t w = g.cols[e++];
        if (index[w] == kUnvisited) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.emplace_back(w, g.offsets[w]);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      const std::uint32_t done = v;
      call.pop_back();
      if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
      if (low[done] != index[done]) continue;
      std::vector<std::uint32_t> comp;
      std::uint32_t w = 0;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = 0;
        res.component_of[w] = static_cast<std::uint32_t>(res.components.size());
        comp.push_back(w);
      } while (w != done);
      std::sort(comp.begin(), comp.end());
      bool trivial = comp.size() == 1;
      if (trivial) {
        const auto r = g.row(comp[0]);
        trivial = std::find(r.begin(), r.end(), comp[0]) == r.end();
      }
      res.components.push_back(std::move(comp));
      res.trivial.push_back(trivial ? 1 : 0);
    }
  }
  return res;
}

std::vector<std::vector<std::uint32_t>> CountMatrix::dense() const {
  std::vector<std::vector<std::uint32_t>> m(size(), std::vector<std::uint32_t>(size(), 0));
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::uint32_t e = pattern.offsets[i]; e < pattern.offsets[i + 1]; ++e) {
      m[i][pattern.cols[e]] = count[e];
    }
  }
  return m;
}

RightResolvingGraph right_resolve(const LabeledDigraph& g, std::size_t max_nodes, RrSeed seed) {
  if (g.adj.edges() == 0) throw Error("right_resolve: component has no edges");
  std::vector<std::vector<std::uint32_t>> sets;
  std::unordered_map<std::vector<std::uint32_t>, std::uint32_t, VecHash> id_of;
  auto intern = [&](std::vector<std::uint32_t>&& s) {
    auto [it, fresh] = id_of.emplace(s, static_cast<std::uint32_t>(sets.size()));
    if (fresh) {
      if (sets.size() >= max_nodes) {
        throw Error("right_resolve: more than " + std::to_string(max_nodes) + " subset nodes");
      }
      sets.push_back(std::move(s));
    }
    return it->second;
  };
  // Targets are bucketed per label, then deduplicated with a stamp array.
  std::vector<std::uint32_t> slot_label;
  std::vector<std::vector<std::uint32_t>> bucket;
  std::vector<std::uint32_t> stamp(g.size(), 0);
  std::uint32_t round = 0;
  auto followers = [&](const std::vector<std::uint32_t>& set, auto&& emit) {
    slot_label.clear();
    std::size_t slot = 0;
    for (auto v : set) {
      for (std::uint32_t e = g.adj.offsets[v]; e < g.adj.offsets[v + 1]; ++e) {
        const auto l = g.labels[e];
        if (slot >= slot_label.size() || slot_label[slot] != l) {
          slot = std::find(slot_label.begin(), slot_label.end(), l) - slot_label.begin();
          if (slot == slot_label.size()) {
            slot_label.push_back(l);
            if (bucket.size() < slot_label.size()) bucket.emplace_back();
            bucket[slot].clear();
          }
        }
        bucket[slot].push_back(g.adj.cols[e]);
      }
    }
    std::vector<std::uint32_t> order(slot_label.size());
    for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::uint32_t a, std::uint32_t b) { return slot_label[a] < slot_label[b]; });
    for (auto s : order) {
      if (++round == 0) {
        std::fill(stamp.begin(), stamp.end(), 0);
        round = 1;
      }
      std::vector<std::uint32_t> next;
      for (auto w : bucket[s]) {
        if (stamp[w] != round) {
          stamp[w] = round;
          next.push_back(w);
        }
      }
      std::sort(next.begin(), next.end());
      emit(slot_label[s], std::move(next));
    }
  };

  if (seed == RrSeed::singletons) {
    for (std::uint32_t v = 0; v < g.size(); ++v) {
      followers({v}, [&](std::uint32_t, std::vector<std::uint32_t>&& s) { intern(std::move(s)); });
    }
  } else {
    std::vector<std::uint32_t> all(g.size());
    for (std::uint32_t v = 0; v < g.size(); ++v) all[v] = v;
    followers(all, [&](std::uint32_t, std::vector<std::uint32_t>&& s) { intern(std::move(s)); });
  }
  std::vector<std::array<std::uint32_t, 3>> edges;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    const auto from = static_cast<std::uint32_t>(i);
    const auto current = sets[i];
    followers(current, [&](std::uint32_t label, std::vector<std::uint32_t>&& s) {
      edges.push_back({from, intern(std::move(s)), label});
    });
  }

  // keep nodes on cycles and everything reachable from them
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  for (const auto& e : edges) pairs.emplace_back(e[0], e[1]);
  const Csr sub = csr_from_pairs(sets.size(), pairs);
  const SccResult comps = scc(sub);
  std::vector<std::uint8_t> keep(sets.size(), 0);
  std::vector<std::uint32_t> work;
  for (std::size_t c = 0; c < comps.components.size(); ++c) {
    if (comps.trivial[c]) continue;
    for (auto v : comps.components[c]) {
      keep[v] = 1;
      work.push_back(v);
    }
  }
  while (!work.empty()) {
    const auto v = work.back();
    work.pop_back();
    for (auto w : sub.row(v)) {
      if (!keep[w]) {
        keep[w] = 1;
        work.push_back(w);
      }
    }
  }
  std::vector<std::uint32_t> renum(sets.size(), UINT32_MAX);
  RightResolvingGraph rr;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    if (!keep[i]) continue;
    renum[i] = static_cast<std::uint32_t>(rr.nodes.size());
    rr.nodes.push_back(sets[i]);
  }
  for (const auto& e : edges) {
    if (keep[e[0]]) rr.edges.push_back({renum[e[0]], renum[e[1]], e[2]});
  }
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> mult;
  for (const auto& e : rr.edges) ++mult[{e[0], e[1]}];
  rr.R.pattern.n = rr.nodes.size();
  rr.R.pattern.offsets.assign(rr.nodes.size() + 1, 0);
  for (const auto& [key, c] : mult) {
    ++rr.R.pattern.offsets[key.first + 1];
    rr.R.pattern.cols.push_back(key.second);
    rr.R.count.push_back(c);
  }
  for (std::size_t v = 0; v < rr.nodes.size(); ++v) {
    rr.R.pattern.offsets[v + 1] += rr.R.pattern.offsets[v];
  }
  return rr;
}

namespace {

// Perron root of one irreducible block via Collatz-Wielandt bounds on (B + I).
double block_radius(const Csr& b, const std::vector<double>& cnt, double rel_tol, int max_iter) {
  const std::size_t n = b.n;
  std::vector<double> x(n, 1.0);
  std::vector<double> y(n);
  for (int it = 0; it < max_iter; ++it) {
    kernels::spmv_shift(n, b.offsets.data(), b.cols.data(), cnt.data(), x.data(), y.data());
    double lo = 0;
    double hi = 0;
    kernels::ratio_bounds(n, y.data(), x.data(), &lo, &hi);
    if (hi - lo <= rel_tol * hi) return 0.5 * (lo + hi) - 1.0;
    const double top = *std::max_element(y.begin(), y.end());
    kernels::scale(n, y.data(), 1.0 / top);
    x.swap(y);
  }
  throw Error("spectral_radius: power iteration did not converge in " + std::to_string(max_iter) +
              " iterations");
}

}  // namespace

double spectral_radius(const CountMatrix& R, double rel_tol, int max_iter) {
  const SccResult comps = scc(R.pattern);
  double best = 0;
  std::vector<std::uint32_t> local(R.size(), UINT32_MAX);
  for (std::size_t c = 0; c < comps.components.size(); ++c) {
    if (comps.trivial[c]) continue;
    const auto& nodes = comps.components[c];
    for (std::uint32_t i = 0; i < nodes.size(); ++i) local[nodes[i]] = i;
    Csr b;
    b.n = nodes.size();
    b.offsets.assign(1, 0);
    std::vector<double> cnt;
    for (auto v : nodes) {
      for (std::uint32_t e = R.pattern.offsets[v]; e < R.pattern.offsets[v + 1]; ++e) {
        if (comps.component_of[R.pattern.cols[e]] != c) continue;
        b.cols.push_back(local[R.pattern.cols[e]]);
        cnt.push_back(R.count[e]);
      }
      b.offsets.push_back(static_cast<std::uint32_t>(b.cols.size()));
    }
    best = std::max(best, block_radius(b, cnt, rel_tol, max_iter));
  }
  return best;
}

std::size_t DetBound::rr_nodes() const {
  std::size_t n = 0;
  for (const auto& c : components) n += c.rr_nodes;
  return n;
}

DetBound det_upper_bound(const LabeledDigraph& g, int tau) {
  if (tau < 1) throw Error("tau must be at least 1");
  DetBound out;
  out.fine_cells = g.size();
  out.gamma_edges = g.adj.edges();
  const SccResult comps = scc(g.adj);
  for (std::size_t c = 0; c < comps.components.size(); ++c) {
    if (comps.trivial[c]) continue;
    const auto sub = induced_subgraph(g, comps.components[c]);
    const auto rr = right_resolve(sub);
    ComponentBound cb;
    cb.cells = sub.size();
    cb.rr_nodes = rr.nodes.size();
    cb.rho = spectral_radius(rr.R);
    cb.log2_rho = cb.rho > 0 ? std::log2(cb.rho) : 0.0;
    out.h_BA = std::max(out.h_BA, cb.log2_rho);
    out.components.push_back(cb);
  }
  out.bound = out.h_BA / tau;
  return out;
}

DetBound det_upper_bound(const Abstraction& abs, const DetController& d, const Partition& p) {
  const auto g = labeled_graph(transition_matrix(abs, d), d, p);
  DetBound out = det_upper_bound(g, d.tau);
  out.elements = p.size();
  return out;
}

boost::multiprecision::cpp_int count_words(const LabeledDigraph& g, int n) {
  using boost::multiprecision::cpp_int;
  if (g.size() > 64) throw Error("count_words: more than 64 nodes");
  if (n < 0 || n > 24) throw Error("count_words: word length must be in [0, 24]");
  std::vector<std::uint32_t> labels = g.labels;
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  // succ[label][v]: targets of v's edges carrying the label
  std::vector<std::vector<std::uint64_t>> succ(labels.size(), std::vector<std::uint64_t>(g.size(), 0));
  for (std::size_t v = 0; v < g.size(); ++v) {
    for (std::uint32_t e = g.adj.offsets[v]; e < g.adj.offsets[v + 1]; ++e) {
      const auto l = std::lower_bound(labels.begin(), labels.end(), g.labels[e]) - labels.begin();
      succ[l][v] |= std::uint64_t{1} << g.adj.cols[e];
    }
  }
  std::map<std::uint64_t, cpp_int> cur;
  cur[g.size() == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << g.size()) - 1] = 1;
  for (int step = 0; step < n; ++step) {
    std::map<std::uint64_t, cpp_int> next;
    for (const auto& [support, cnt] : cur) {
      for (std::size_t l = 0; l < labels.size(); ++l) {
        std::uint64_t to = 0;
        for (std::uint64_t s = support; s; s &= s - 1) to |= succ[l][static_cast<std::size_t>(__builtin_ctzll(s))];
        if (to) next[to] += cnt;
      }
    }
    cur.swap(next);
  }
  cpp_int total = 0;
  for (const auto& [support, cnt] : cur) total += cnt;
  return total;
}

void write_graph_dot(std::ostream& os, const LabeledDigraph& g) {
  os << "digraph G {\n";
  for (std::size_t v = 0; v < g.size(); ++v) os << "  n" << v << " [label=\"" << g.nodes[v].index << "\"];\n";
  for (std::size_t v = 0; v < g.size(); ++v) {
    for (std::uint32_t e = g.adj.offsets[v]; e < g.adj.offsets[v + 1]; ++e) {
      os << "  n" << v << " -> n" << g.adj.cols[e] << " [label=\"" << g.labels[e] << "\"];\n";
    }
  }
  os << "}\n";
}

void write_rr_dot(std::ostream& os, const RightResolvingGraph& rr) {
  os << "digraph RR {\n";
  for (std::size_t i = 0; i < rr.nodes.size(); ++i) {
    os << "  r" << i << " [label=\"{";
    for (std::size_t k = 0; k < rr.nodes[i].size(); ++k) os << (k ? "," : "") << rr.nodes[i][k];
    os << "}\"];\n";
  }
  for (const auto& e : rr.edges) os << "  r" << e[0] << " -> r" << e[1] << " [label=\"" << e[2] << "\"];\n";
  os << "}\n";
}

void write_matrix_brackets(std::ostream& os, const CountMatrix& R) {
  const auto m = R.dense();
  os << '[';
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = 0; j < m[i].size(); ++j) os << (j ? " " : "") << m[i][j];
    if (i + 1 < m.size()) os << "; ";
  }
  os << "]\n";
}

void write_components_csv(std::ostream& os, const DetBound& b) {
  os << "component,cells,rr_nodes,rho,log2_rho\n";
  char buf[96];
  for (std::size_t c = 0; c < b.components.size(); ++c) {
    const auto& k = b.components[c];
    std::snprintf(buf, sizeof buf, "%zu,%zu,%zu,%.10g,%.10g\n", c, k.cells, k.rr_nodes, k.rho, k.log2_rho);
    os << buf;
  }
}

}  // namespace entrobound
