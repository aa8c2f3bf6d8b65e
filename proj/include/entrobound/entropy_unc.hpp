#pragma once

#include <iosfwd>
#include <vector>

#include "entrobound/entropy_det.hpp"

namespace entrobound {

/// Node-weighted digraph over partition elements; edge (a, b) carries weight[a].
struct WeightedDigraph {
  Csr adj;
  std::vector<double> weight;
  std::vector<std::uint32_t> out_count;  ///< |D(A)| when built from a partition

  std::size_t size() const { return adj.n; }
  static WeightedDigraph from_edges(std::size_t n,
                                    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges,
                                    std::vector<double> weight);
  /// Weights log2(out-degree), the branching bits of each node.
  static WeightedDigraph with_branching_weights(
      std::size_t n, std::vector<std::pair<std::uint32_t, std::uint32_t>> edges);
};

/// D(A) from the closed-loop images of the cells of A; throws "partition not invariant"
/// when an image reaches a cell outside the controller domain.
WeightedDigraph build_weighted_graph(const Abstraction& abs, const DetController& d,
                                     const Partition& p);

struct CycleMean {
  double value = 0;
  std::vector<std::uint32_t> cycle;  ///< witness, empty when the parent table was too large
  double cycle_mean = 0;             ///< mean weight of the witness
};

/// Karp's algorithm per strongly connected component.
CycleMean max_cycle_mean(const WeightedDigraph& g, std::size_t max_parent_entries = 64'000'000);

/// Enumerates every simple cycle (at most 12 nodes).
double brute_force_mcm(const WeightedDigraph& g);

/// Max over walks of tau nodes of the summed weights of the first tau - 1 nodes.
double max_path_weight(const WeightedDigraph& g, int tau);

struct ExpansionCheck {
  std::uint64_t exhaustive_min = 0;  ///< smallest N(J) over all spanning J
  std::uint64_t graph_value = 0;     ///< N(W_tau(G))
  std::uint64_t candidates = 0;      ///< spanning sets evaluated
  double log2_rinv() const;
};

/// succ[a] = D(a) as element indices. Requires |A| <= 4, tau <= 4.
ExpansionCheck expansion_oracle(std::size_t a_size,
                                const std::vector<std::vector<std::uint32_t>>& succ, int tau);

/// N(J) straight from the definition; J is a list of length-tau element sequences.
std::uint64_t expansion_number(const std::vector<std::vector<std::uint32_t>>& J,
                               std::size_t a_size);
/// Spanning test of J against successor sets D, from the definition.
bool is_spanning(const std::vector<std::vector<std::uint32_t>>& J, std::size_t a_size,
                 const std::vector<std::vector<std::uint32_t>>& succ);

struct UncBound {
  double bound = 0;  ///< w*_m
  CycleMean mcm;
  std::size_t elements = 0;
  std::size_t edges = 0;
  double max_weight = 0;
};

UncBound unc_upper_bound(const Abstraction& abs, const DetController& d, const Partition& p);
UncBound unc_upper_bound(const WeightedDigraph& g);

void write_weighted_dot(std::ostream& os, const WeightedDigraph& g);

}  // namespace entrobound
