#pragma once

#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "entrobound/synthesis.hpp"

namespace entrobound {

struct DetController {
  UniformGrid grid;
  int tau = 1;
  std::vector<CellId> domain;  ///< ascending, same as the source controller
  std::vector<SeqId> choice;   ///< per domain position

  std::size_t size() const { return domain.size(); }
  std::optional<std::size_t> position(CellId c) const;
};

enum class Determinizer { maxfreq, minnorm, minsucc };
enum class PartitionMode { by_input, by_input_connected, by_cell };

std::string_view to_string(Determinizer d);
std::string_view to_string(PartitionMode m);
Determinizer determinizer_from_string(std::string_view s);
PartitionMode partition_mode_from_string(std::string_view s);

/// Greedy global: repeatedly assign the sequence admissible in most undecided cells.
DetController determinize_maxfreq(const MultiController& c);
/// Per cell, the admissible sequence with the smallest Euclidean norm.
DetController determinize_minnorm(const MultiController& c, const Abstraction& abs);
/// Per cell, the admissible input with the fewest successor cells (tau = 1 only).
/// Ties go to the lowest input id, or to a seeded uniform draw.
DetController determinize_minsucc(const MultiController& c, const Abstraction& abs,
                                  std::optional<std::uint64_t> seed = std::nullopt);
DetController determinize(Determinizer kind, const MultiController& c, const Abstraction& abs,
                          std::optional<std::uint64_t> seed = std::nullopt);

struct Partition {
  struct Element {
    std::vector<CellId> cells;  ///< ascending
    SeqId input = 0;
  };
  std::vector<Element> elements;
  std::vector<std::uint32_t> element_of;  ///< per DetController domain position

  std::size_t size() const { return elements.size(); }
};

/// Elements are ordered by input id, then by lowest cell id.
Partition coarse_partition(const DetController& d, PartitionMode mode);

/// Throws unless every choice is admissible in `c`.
void check_selection(const DetController& d, const MultiController& c);
/// Throws unless `p` is a partition of the domain of `d` with constant inputs.
void check_partition(const Partition& p, const DetController& d);

void write_partition_csv(std::ostream& os, const Partition& p, const DetController& d);
void write_partition_dot(std::ostream& os, const Partition& p, const DetController& d);

}  // namespace entrobound
