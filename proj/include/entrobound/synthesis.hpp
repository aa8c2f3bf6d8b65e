#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "entrobound/dynamics.hpp"
#include "entrobound/geometry.hpp"

namespace entrobound {

/// Quantized input set: the lattice points lb + k * eta inside U on every axis.
struct InputGrid {
  HyperRect box;
  std::vector<double> eta;
  std::vector<std::uint32_t> counts;
  std::vector<std::vector<double>> points;  ///< first axis fastest

  static InputGrid build(const HyperRect& U, std::vector<double> eta);
  std::size_t size() const { return points.size(); }
};

/// Number of cells of a mask inside index boxes, via a summed-area table.
class PrefixCount {
 public:
  PrefixCount(const UniformGrid& grid, const std::vector<std::uint8_t>& mask);
  std::uint64_t count(const IndexBox& box) const;

 private:
  std::vector<std::uint64_t> dims_;     // counts + 1 per axis
  std::vector<std::uint64_t> strides_;
  std::vector<std::uint32_t> table_;
};

struct BuildOptions {
  int tau = 1;
  std::uint64_t max_sequences = 1'000'000;
  /// Use the vectorized center/radius path for affine systems.
  bool batch_affine = true;
  /// Replaces the system's built-in reachability when set.
  ReachOracle oracle;
};

/// Finite abstraction over the Q cells of a state grid for input sequences of length tau.
class Abstraction {
 public:
  UniformGrid grid;
  InputGrid inputs;
  int tau = 1;
  bool set_valued = false;
  std::vector<std::uint8_t> q_mask;  ///< per grid cell
  std::vector<CellId> q_cells;       ///< ascending

  std::uint32_t num_sequences() const { return num_seq_; }
  std::size_t state_dim() const { return grid.dim(); }

  /// Position of a cell in q_cells.
  std::optional<std::size_t> q_position(CellId c) const;

  /// Input vector of step t of a sequence (the first step is the most significant digit).
  const std::vector<double>& sequence_input(SeqId s, int t) const;
  std::vector<double> sequence_vector(SeqId s) const;

  bool stays_in_q(std::size_t qpos, SeqId s) const { return stays_[qpos * num_seq_ + s] != 0; }
  /// Index range of the final enclosure; meaningful only when stays_in_q.
  IndexBox post_box(std::size_t qpos, SeqId s) const;
  std::uint64_t post_volume(std::size_t qpos, SeqId s) const;
  std::vector<CellId> post_cells(std::size_t qpos, SeqId s) const;

 private:
  friend Abstraction build_abstraction(const SystemDef&, const UniformGrid&,
                                       std::vector<std::uint8_t>, const InputGrid&,
                                       const BuildOptions&);
  std::uint32_t num_seq_ = 0;
  std::vector<std::int32_t> lo_;  // [(qpos * S + s) * d + i]
  std::vector<std::int32_t> hi_;
  std::vector<std::uint8_t> stays_;
};

std::vector<std::uint8_t> q_mask_for(const UniformGrid& grid, const StateSet& q);

Abstraction build_abstraction(const SystemDef& sys, const UniformGrid& grid,
                              std::vector<std::uint8_t> q_mask, const InputGrid& inputs,
                              const BuildOptions& opts = {});
Abstraction build_abstraction(const Problem& p, const BuildOptions& opts = {});

/// Maximal invariant controller: cell -> admissible sequences, in CSR layout.
struct MultiController {
  UniformGrid grid;
  int tau = 1;
  std::uint32_t num_sequences = 0;
  std::vector<CellId> domain;         ///< ascending
  std::vector<std::uint32_t> offsets;  ///< size domain.size() + 1
  std::vector<SeqId> admissible;       ///< ascending per cell
  int sweeps = 0;

  bool empty() const { return domain.empty(); }
  std::size_t size() const { return domain.size(); }
  std::optional<std::size_t> position(CellId c) const;
  std::span<const SeqId> admissible_at(std::size_t pos) const {
    return {admissible.data() + offsets[pos], admissible.data() + offsets[pos + 1]};
  }
  std::vector<std::uint8_t> domain_mask() const;
};

MultiController invariant_controller(const Abstraction& abs);

struct ForwardBackwardResult {
  std::vector<std::uint8_t> mask;
  std::size_t cells = 0;
  int alternations = 0;
};

/// Alternates the invariant controller of sys and sys_rev on a shrinking cell set.
ForwardBackwardResult forward_backward_domain(const SystemDef& sys, const SystemDef& sys_rev,
                                              const UniformGrid& grid,
                                              std::vector<std::uint8_t> q_mask,
                                              const InputGrid& inputs, int max_alternations = 100);

void write_controller(std::ostream& os, const MultiController& c);
MultiController read_controller(std::istream& is);

}  // namespace entrobound
