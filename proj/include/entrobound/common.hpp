#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace entrobound {

/// Error raised by every module; the message names the failing condition.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Single geometry tolerance (state units) used by all geometric predicates.
inline constexpr double kGeomSlack = 1e-12;

/// Flat index of a grid cell (first axis varies fastest).
struct CellId {
  std::uint64_t index = 0;

  friend constexpr auto operator<=>(CellId, CellId) = default;
};

/// Index of an input sequence of length tau over the quantized input set.
using SeqId = std::uint32_t;

}  // namespace entrobound

template <>
struct std::hash<entrobound::CellId> {
  std::size_t operator()(entrobound::CellId c) const noexcept {
    return std::hash<std::uint64_t>{}(c.index);
  }
};
