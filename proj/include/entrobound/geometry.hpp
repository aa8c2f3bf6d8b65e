#pragma once

#include <optional>
#include <span>
#include <vector>

#include "entrobound/common.hpp"

namespace entrobound {

/// Axis-aligned box [lb, ub]. Zero-width faces are allowed.
class HyperRect {
 public:
  HyperRect() = default;
  HyperRect(std::vector<double> lb, std::vector<double> ub);

  static HyperRect from_center(std::span<const double> center,
                               std::span<const double> radius);

  std::size_t dim() const { return lb_.size(); }
  const std::vector<double>& lb() const { return lb_; }
  const std::vector<double>& ub() const { return ub_; }
  double lb(std::size_t i) const { return lb_[i]; }
  double ub(std::size_t i) const { return ub_[i]; }
  double center(std::size_t i) const { return 0.5 * (lb_[i] + ub_[i]); }
  double radius(std::size_t i) const { return 0.5 * (ub_[i] - lb_[i]); }

  bool contains(std::span<const double> x, double slack = kGeomSlack) const;
  bool contains(const HyperRect& other, double slack = kGeomSlack) const;

  friend bool operator==(const HyperRect&, const HyperRect&) = default;

 private:
  std::vector<double> lb_;
  std::vector<double> ub_;
};

/// Half-space representation {x : Hx <= b}, H stored row-major.
struct Polytope {
  std::vector<std::vector<double>> H;
  std::vector<double> b;

  Polytope() = default;
  Polytope(std::vector<std::vector<double>> h, std::vector<double> rhs);
  std::size_t rows() const { return b.size(); }
};

/// Per-axis inclusive index range [first, last] of grid cells.
struct IndexBox {
  std::vector<std::uint32_t> first;
  std::vector<std::uint32_t> last;

  std::uint64_t volume() const;
};

/// Result of covering a rectangle by grid cells.
struct Cover {
  std::vector<CellId> cells;
  bool escapes = false;  ///< rect is not contained in the grid domain
};

/// Uniform grid of closed boxes over a domain; counts[i] * eta[i] spans axis i.
class UniformGrid {
 public:
  UniformGrid() = default;
  /// Tiles `domain` exactly; throws if a width is not an integer multiple of eta.
  UniformGrid(HyperRect domain, std::vector<double> eta);

  /// Lattice-aligned grid: cells are centered on the integer multiples of eta
  /// that lie inside `box`, so the covered domain may overhang `box` by eta/2.
  static UniformGrid lattice(const HyperRect& box, std::vector<double> eta);

  std::size_t dim() const { return eta_.size(); }
  const HyperRect& domain() const { return domain_; }
  const std::vector<double>& eta() const { return eta_; }
  const std::vector<std::uint64_t>& counts() const { return counts_; }
  std::uint64_t size() const { return total_; }

  std::vector<std::uint64_t> multi_index(CellId id) const;
  CellId flat_index(std::span<const std::uint64_t> k) const;

  HyperRect cell_rect(CellId id) const;
  std::vector<double> cell_center(CellId id) const;

  /// Half-open point location; the upper domain face belongs to the last cell.
  std::optional<CellId> locate(std::span<const double> x) const;

  /// Cells whose half-open box overlaps the rect (see README, "cell convention").
  Cover cover_cells(const HyperRect& rect) const;
  /// Index-range form of cover_cells; nullopt when rect misses the domain.
  std::optional<IndexBox> cover_box(const HyperRect& rect, bool* escapes) const;

  /// Calls fn(CellId) for every cell of an index box, first axis fastest.
  template <class Fn>
  void for_each_cell(const IndexBox& box, Fn&& fn) const;

  friend bool operator==(const UniformGrid&, const UniformGrid&) = default;

 private:
  HyperRect domain_;
  std::vector<double> eta_;
  std::vector<std::uint64_t> counts_;
  std::vector<std::uint64_t> strides_;
  std::uint64_t total_ = 0;

  void init_counts();
};

bool rect_in_polytope(const HyperRect& rect, const Polytope& p);

template <class Fn>
void UniformGrid::for_each_cell(const IndexBox& box, Fn&& fn) const {
  const std::size_t d = dim();
  std::vector<std::uint64_t> k(box.first.begin(), box.first.end());
  while (true) {
    std::uint64_t flat = 0;
    for (std::size_t i = 0; i < d; ++i) flat += k[i] * strides_[i];
    fn(CellId{flat});
    std::size_t i = 0;
    for (; i < d; ++i) {
      if (k[i] < box.last[i]) {
        ++k[i];
        break;
      }
      k[i] = box.first[i];
    }
    if (i == d) return;
  }
}

}  // namespace entrobound
