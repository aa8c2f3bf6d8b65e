#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <array>
#include <iosfwd>
#include <span>
#include <vector>

#include "entrobound/determinization.hpp"

namespace entrobound {

/// Compressed sparse rows over nodes 0..n-1.
struct Csr {
  std::size_t n = 0;
  std::vector<std::uint32_t> offsets{0};
  std::vector<std::uint32_t> cols;

  std::size_t edges() const { return cols.size(); }
  std::span<const std::uint32_t> row(std::size_t v) const {
    return {cols.data() + offsets[v], cols.data() + offsets[v + 1]};
  }
};

/// Gamma: row i lists the controller-domain positions hit by the closed-loop image of cell i.
Csr transition_matrix(const Abstraction& abs, const DetController& d);

/// Edge-labeled digraph in CSR form; labels[e] belongs to cols[e].
struct LabeledDigraph {
  std::vector<CellId> nodes;
  Csr adj;
  std::vector<std::uint32_t> labels;

  std::size_t size() const { return adj.n; }
  static LabeledDigraph from_edges(std::size_t n,
                                   const std::vector<std::array<std::uint32_t, 3>>& edges);
};

/// Labels every edge leaving cell i with the partition element containing it.
LabeledDigraph labeled_graph(const Csr& gamma, const DetController& d, const Partition& p);
/// Subgraph induced by `keep` (node indices of g), in the given order.
LabeledDigraph induced_subgraph(const LabeledDigraph& g, const std::vector<std::uint32_t>& keep);

struct SccResult {
  std::vector<std::vector<std::uint32_t>> components;  ///< reverse topological order
  std::vector<std::uint8_t> trivial;                   ///< singleton without self-loop
  std::vector<std::uint32_t> component_of;
  std::size_t nontrivial() const;
};

/// Iterative Tarjan.
SccResult scc(const Csr& g);

/// R: number of edges between right-resolving nodes, CSR with multiplicities.
struct CountMatrix {
  Csr pattern;
  std::vector<std::uint32_t> count;

  std::size_t size() const { return pattern.n; }
  std::vector<std::vector<std::uint32_t>> dense() const;
};

struct RightResolvingGraph {
  std::vector<std::vector<std::uint32_t>> nodes;  ///< sorted node sets of the source graph
  std::vector<std::array<std::uint32_t, 3>> edges;  ///< (from, to, label)
  CountMatrix R;
};

/// Seeds of the follower-set construction: the label followers of every single node, or
/// of the whole vertex set. Both present the same label language.
enum class RrSeed { singletons, full_set };

/// Follower-set construction restricted to its recurrent part.
RightResolvingGraph right_resolve(const LabeledDigraph& component,
                                  std::size_t max_nodes = 1'000'000,
                                  RrSeed seed = RrSeed::singletons);

/// Perron root, maximum over the irreducible blocks; 0 for a nilpotent matrix.
double spectral_radius(const CountMatrix& R, double rel_tol = 1e-10, int max_iter = 100'000);

struct ComponentBound {
  std::size_t cells = 0;
  std::size_t rr_nodes = 0;
  double rho = 0;
  double log2_rho = 0;
};

struct DetBound {
  double bound = 0;  ///< h(B,A) / tau
  double h_BA = 0;
  std::size_t fine_cells = 0;
  std::size_t elements = 0;
  std::size_t gamma_edges = 0;
  std::vector<ComponentBound> components;  ///< nontrivial SCCs only
  std::size_t rr_nodes() const;
};

DetBound det_upper_bound(const Abstraction& abs, const DetController& d, const Partition& p);
DetBound det_upper_bound(const LabeledDigraph& g, int tau);

/// Number of distinct label words of length n along walks of g (|g| <= 64, n <= 24).
boost::multiprecision::cpp_int count_words(const LabeledDigraph& g, int n);

void write_graph_dot(std::ostream& os, const LabeledDigraph& g);
void write_rr_dot(std::ostream& os, const RightResolvingGraph& rr);
/// "[1 0 1; 0 1 0]" layout.
void write_matrix_brackets(std::ostream& os, const CountMatrix& R);
void write_components_csv(std::ostream& os, const DetBound& b);

}  // namespace entrobound
