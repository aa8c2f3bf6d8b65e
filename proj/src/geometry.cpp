#include "entrobound/geometry.hpp"

#include <cmath>
#include <limits>

namespace entrobound {

HyperRect::HyperRect(std::vector<double> lb, std::vector<double> ub)
    : lb_(std::move(lb)), ub_(std::move(ub)) {
  if (lb_.empty() || lb_.size() != ub_.size()) {
    throw Error("hyperrect: lb and ub must have equal nonzero dimension");
  }
  for (std::size_t i = 0; i < lb_.size(); ++i) {
    if (!(lb_[i] <= ub_[i])) throw Error("hyperrect: lb > ub on axis " + std::to_string(i));
  }
}

HyperRect HyperRect::from_center(std::span<const double> center,
                                 std::span<const double> radius) {
  std::vector<double> lb(center.size());
  std::vector<double> ub(center.size());
  for (std::size_t i = 0; i < center.size(); ++i) {
    lb[i] = center[i] - radius[i];
    ub[i] = center[i] + radius[i];
  }
  return HyperRect(std::move(lb), std::move(ub));
}

bool HyperRect::contains(std::span<const double> x, double slack) const {
  for (std::size_t i = 0; i < dim(); ++i) {
    if (x[i] < lb_[i] - slack || x[i] > ub_[i] + slack) return false;
  }
  return true;
}

bool HyperRect::contains(const HyperRect& other, double slack) const {
  for (std::size_t i = 0; i < dim(); ++i) {
    if (other.lb_[i] < lb_[i] - slack || other.ub_[i] > ub_[i] + slack) return false;
  }
  return true;
}

Polytope::Polytope(std::vector<std::vector<double>> h, std::vector<double> rhs)
    : H(std::move(h)), b(std::move(rhs)) {
  if (H.size() != b.size()) throw Error("polytope: H row count differs from b length");
}

std::uint64_t IndexBox::volume() const {
  std::uint64_t v = 1;
  for (std::size_t i = 0; i < first.size(); ++i) v *= std::uint64_t{last[i]} - first[i] + 1;
  return v;
}

UniformGrid::UniformGrid(HyperRect domain, std::vector<double> eta)
    : domain_(std::move(domain)), eta_(std::move(eta)) {
  if (eta_.size() != domain_.dim()) throw Error("grid: eta dimension mismatch");
  init_counts();
}

UniformGrid UniformGrid::lattice(const HyperRect& box, std::vector<double> eta) {
  if (eta.size() != box.dim()) throw Error("grid: eta dimension mismatch");
  std::vector<double> lb(box.dim());
  std::vector<double> ub(box.dim());
  for (std::size_t i = 0; i < box.dim(); ++i) {
    if (!(eta[i] > 0)) throw Error("grid: eta must be positive");
    const double k0 = std::ceil(box.lb(i) / eta[i] - 1e-9);
    const double k1 = std::floor(box.ub(i) / eta[i] + 1e-9);
    if (k1 < k0) throw Error("grid: no lattice point inside the box on axis " + std::to_string(i));
    lb[i] = k0 * eta[i] - 0.5 * eta[i];
    ub[i] = k1 * eta[i] + 0.5 * eta[i];
  }
  return UniformGrid(HyperRect(std::move(lb), std::move(ub)), std::move(eta));
}

void UniformGrid::init_counts() {
  const std::size_t d = eta_.size();
  counts_.assign(d, 0);
  strides_.assign(d, 0);
  total_ = 1;
  for (std::size_t i = 0; i < d; ++i) {
    if (!(eta_[i] > 0)) throw Error("grid: eta must be positive");
    const double width = domain_.ub(i) - domain_.lb(i);
    const double ratio = width / eta_[i];
    const double n = std::round(ratio);
    if (n < 1 || std::abs(n * eta_[i] - width) > 1e-9 * std::max(width, eta_[i])) {
      throw Error("grid: eta does not divide the domain width on axis " + std::to_string(i));
    }
    counts_[i] = static_cast<std::uint64_t>(n);
    strides_[i] = total_;
    if (total_ > std::numeric_limits<std::uint64_t>::max() / counts_[i]) {
      throw Error("grid: cell count overflows 64 bits");
    }
    total_ *= counts_[i];
  }
}

std::vector<std::uint64_t> UniformGrid::multi_index(CellId id) const {
  if (id.index >= total_) throw Error("cell out of range");
  std::vector<std::uint64_t> k(dim());
  std::uint64_t rest = id.index;
  for (std::size_t i = 0; i < dim(); ++i) {
    k[i] = rest % counts_[i];
    rest /= counts_[i];
  }
  return k;
}

CellId UniformGrid::flat_index(std::span<const std::uint64_t> k) const {
  std::uint64_t flat = 0;
  for (std::size_t i = 0; i < dim(); ++i) {
    if (k[i] >= counts_[i]) throw Error("cell out of range");
    flat += k[i] * strides_[i];
  }
  return CellId{flat};
}

HyperRect UniformGrid::cell_rect(CellId id) const {
  const auto k = multi_index(id);
  std::vector<double> lb(dim());
  std::vector<double> ub(dim());
  for (std::size_t i = 0; i < dim(); ++i) {
    lb[i] = domain_.lb(i) + static_cast<double>(k[i]) * eta_[i];
    ub[i] = domain_.lb(i) + static_cast<double>(k[i] + 1) * eta_[i];
  }
  return HyperRect(std::move(lb), std::move(ub));
}

std::vector<double> UniformGrid::cell_center(CellId id) const {
  const auto k = multi_index(id);
  std::vector<double> c(dim());
  for (std::size_t i = 0; i < dim(); ++i) {
    c[i] = domain_.lb(i) + (static_cast<double>(k[i]) + 0.5) * eta_[i];
  }
  return c;
}

std::optional<CellId> UniformGrid::locate(std::span<const double> x) const {
  if (x.size() != dim()) throw Error("locate: dimension mismatch");
  std::uint64_t flat = 0;
  for (std::size_t i = 0; i < dim(); ++i) {
    if (!(x[i] >= domain_.lb(i) - kGeomSlack && x[i] <= domain_.ub(i) + kGeomSlack)) {
      return std::nullopt;
    }
    const double t = std::floor((x[i] - domain_.lb(i)) / eta_[i]);
    std::uint64_t k = t <= 0 ? 0 : static_cast<std::uint64_t>(t);
    if (k >= counts_[i]) k = counts_[i] - 1;
    flat += k * strides_[i];
  }
  return CellId{flat};
}

std::optional<IndexBox> UniformGrid::cover_box(const HyperRect& rect, bool* escapes) const {
  if (rect.dim() != dim()) throw Error("cover_cells: dimension mismatch");
  bool esc = false;
  IndexBox box;
  box.first.resize(dim());
  box.last.resize(dim());
  bool hit = true;
  for (std::size_t i = 0; i < dim(); ++i) {
    const double lo = rect.lb(i);
    const double hi = rect.ub(i);
    if (lo < domain_.lb(i) - kGeomSlack || hi > domain_.ub(i) + kGeomSlack) esc = true;
    const double s = kGeomSlack / eta_[i];
    const double n = static_cast<double>(counts_[i]);
    const double t_lo = (lo - domain_.lb(i)) / eta_[i];
    const double t_hi = (hi - domain_.lb(i)) / eta_[i];
    double first = std::floor(t_lo + s);
    double last = std::ceil(t_hi - s) - 1;
    if (last < first) last = first;
    if (first >= n && t_lo <= n + s && t_hi <= n + s) first = last = n - 1;
    if (last < 0 || first >= n) {
      hit = false;
      continue;
    }
    box.first[i] = static_cast<std::uint32_t>(std::max(first, 0.0));
    box.last[i] = static_cast<std::uint32_t>(std::min(last, n - 1));
  }
  if (escapes != nullptr) *escapes = esc;
  if (!hit) return std::nullopt;
  return box;
}

Cover UniformGrid::cover_cells(const HyperRect& rect) const {
  Cover out;
  auto box = cover_box(rect, &out.escapes);
  if (box) for_each_cell(*box, [&](CellId c) { out.cells.push_back(c); });
  return out;
}

bool rect_in_polytope(const HyperRect& rect, const Polytope& p) {
  for (std::size_t r = 0; r < p.rows(); ++r) {
    const auto& h = p.H[r];
    if (h.size() != rect.dim()) throw Error("rect_in_polytope: dimension mismatch");
    double worst = 0;
    for (std::size_t i = 0; i < h.size(); ++i) {
      worst += h[i] * rect.center(i) + std::abs(h[i]) * rect.radius(i);
    }
    if (worst > p.b[r] + kGeomSlack) return false;
  }
  return true;
}

}  // namespace entrobound
