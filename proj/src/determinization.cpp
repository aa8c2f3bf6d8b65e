#include "entrobound/determinization.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>
#include <string>

namespace entrobound {

std::optional<std::size_t> DetController::position(CellId c) const {
  auto it = std::lower_bound(domain.begin(), domain.end(), c);
  if (it == domain.end() || *it != c) return std::nullopt;
  return static_cast<std::size_t>(it - domain.begin());
}

std::string_view to_string(Determinizer d) {
  switch (d) {
    case Determinizer::maxfreq: return "maxfreq";
    case Determinizer::minnorm: return "minnorm";
    case Determinizer::minsucc: return "minsucc";
  }
  return "?";
}

std::string_view to_string(PartitionMode m) {
  switch (m) {
    case PartitionMode::by_input: return "by-input";
    case PartitionMode::by_input_connected: return "by-input-connected";
    case PartitionMode::by_cell: return "by-cell";
  }
  return "?";
}

Determinizer determinizer_from_string(std::string_view s) {
  if (s == "maxfreq") return Determinizer::maxfreq;
  if (s == "minnorm") return Determinizer::minnorm;
  if (s == "minsucc") return Determinizer::minsucc;
  throw Error("unknown determinizer '" + std::string(s) + "'");
}

PartitionMode partition_mode_from_string(std::string_view s) {
  if (s == "by-input") return PartitionMode::by_input;
  if (s == "by-input-connected") return PartitionMode::by_input_connected;
  if (s == "by-cell") return PartitionMode::by_cell;
  throw Error("unknown partition mode '" + std::string(s) + "'");
}

namespace {

DetController empty_like(const MultiController& c) {
  if (c.empty()) throw Error("determinization: controller is empty");
  DetController d;
  d.grid = c.grid;
  d.tau = c.tau;
  d.domain = c.domain;
  d.choice.assign(c.size(), 0);
  return d;
}

}  // namespace

DetController determinize_maxfreq(const MultiController& c) {
  DetController d = empty_like(c);
  const std::size_t S = c.num_sequences;
  std::vector<std::uint32_t> freq(S, 0);
  for (SeqId s : c.admissible) ++freq[s];
  // cells admitting each sequence
  std::vector<std::uint32_t> off(S + 1, 0);
  for (SeqId s : c.admissible) ++off[s + 1];
  std::partial_sum(off.begin(), off.end(), off.begin());
  std::vector<std::uint32_t> cells(c.admissible.size());
  {
    auto fill = off;
    for (std::size_t p = 0; p < c.size(); ++p) {
      for (SeqId s : c.admissible_at(p)) cells[fill[s]++] = static_cast<std::uint32_t>(p);
    }
  }
  std::vector<std::uint8_t> decided(c.size(), 0);
  std::size_t left = c.size();
  while (left > 0) {
    const auto best = static_cast<SeqId>(std::max_element(freq.begin(), freq.end()) - freq.begin());
    for (std::uint32_t k = off[best]; k < off[best + 1]; ++k) {
      const std::uint32_t p = cells[k];
      if (decided[p]) continue;
      decided[p] = 1;
      d.choice[p] = best;
      --left;
      for (SeqId s : c.admissible_at(p)) --freq[s];
    }
  }
  return d;
}

DetController determinize_minnorm(const MultiController& c, const Abstraction& abs) {
  DetController d = empty_like(c);
  std::vector<double> norm(c.num_sequences);
  for (SeqId s = 0; s < c.num_sequences; ++s) {
    double n2 = 0;
    for (double v : abs.sequence_vector(s)) n2 += v * v;
    norm[s] = n2;
  }
  for (std::size_t p = 0; p < c.size(); ++p) {
    const auto adm = c.admissible_at(p);
    SeqId best = adm.front();
    for (SeqId s : adm) {
      if (norm[s] < norm[best]) best = s;
    }
    d.choice[p] = best;
  }
  return d;
}

DetController determinize_minsucc(const MultiController& c, const Abstraction& abs,
                                  std::optional<std::uint64_t> seed) {
  if (c.tau != 1 || abs.tau != 1) throw Error("minsucc requires tau = 1");
  DetController d = empty_like(c);
  std::mt19937_64 rng(seed.value_or(0));
  std::vector<SeqId> ties;
  for (std::size_t p = 0; p < c.size(); ++p) {
    const auto q = abs.q_position(c.domain[p]);
    if (!q) throw Error("minsucc: controller cell missing from the abstraction");
    std::uint64_t best = UINT64_MAX;
    ties.clear();
    for (SeqId s : c.admissible_at(p)) {
      const std::uint64_t v = abs.post_volume(*q, s);
      if (v < best) {
        best = v;
        ties.assign(1, s);
      } else if (v == best) {
        ties.push_back(s);
      }
    }
    if (seed && ties.size() > 1) {
      d.choice[p] = ties[std::uniform_int_distribution<std::size_t>(0, ties.size() - 1)(rng)];
    } else {
      d.choice[p] = ties.front();
    }
  }
  return d;
}

DetController determinize(Determinizer kind, const MultiController& c, const Abstraction& abs,
                          std::optional<std::uint64_t> seed) {
  switch (kind) {
    case Determinizer::maxfreq: return determinize_maxfreq(c);
    case Determinizer::minnorm: return determinize_minnorm(c, abs);
    case Determinizer::minsucc: return determinize_minsucc(c, abs, seed);
  }
  throw Error("unknown determinizer");
}

Partition coarse_partition(const DetController& d, PartitionMode mode) {
  if (d.domain.empty()) throw Error("partition: controller is empty");
  const std::size_t n = d.size();
  // group label per position before ordering
  std::vector<std::uint32_t> group(n, UINT32_MAX);
  std::uint32_t groups = 0;
  if (mode == PartitionMode::by_cell) {
    std::iota(group.begin(), group.end(), 0);
    groups = static_cast<std::uint32_t>(n);
  } else if (mode == PartitionMode::by_input) {
    std::vector<std::pair<SeqId, std::uint32_t>> seen;
    for (std::size_t p = 0; p < n; ++p) seen.emplace_back(d.choice[p], 0);
    std::sort(seen.begin(), seen.end());
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
    for (std::size_t p = 0; p < n; ++p) {
      group[p] = static_cast<std::uint32_t>(
          std::lower_bound(seen.begin(), seen.end(), std::make_pair(d.choice[p], 0u)) - seen.begin());
    }
    groups = static_cast<std::uint32_t>(seen.size());
  } else {
    const std::size_t dim = d.grid.dim();
    std::vector<std::size_t> stack;
    for (std::size_t start = 0; start < n; ++start) {
      if (group[start] != UINT32_MAX) continue;
      group[start] = groups;
      stack.assign(1, start);
      while (!stack.empty()) {
        const std::size_t p = stack.back();
        stack.pop_back();
        auto k = d.grid.multi_index(d.domain[p]);
        for (std::size_t i = 0; i < dim; ++i) {
          for (int delta : {-1, 1}) {
            if (delta < 0 && k[i] == 0) continue;
            if (delta > 0 && k[i] + 1 >= d.grid.counts()[i]) continue;
            auto nk = k;
            nk[i] = delta < 0 ? k[i] - 1 : k[i] + 1;
            const auto q = d.position(d.grid.flat_index(nk));
            if (q && group[*q] == UINT32_MAX && d.choice[*q] == d.choice[p]) {
              group[*q] = groups;
              stack.push_back(*q);
            }
          }
        }
      }
      ++groups;
    }
  }

  Partition part;
  part.elements.resize(groups);
  for (std::size_t p = 0; p < n; ++p) {
    auto& e = part.elements[group[p]];
    e.cells.push_back(d.domain[p]);
    e.input = d.choice[p];
  }
  std::vector<std::uint32_t> order(groups);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    const auto& ea = part.elements[a];
    const auto& eb = part.elements[b];
    if (ea.input != eb.input) return ea.input < eb.input;
    return ea.cells.front() < eb.cells.front();
  });
  std::vector<std::uint32_t> rank(groups);
  std::vector<Partition::Element> sorted(groups);
  for (std::uint32_t r = 0; r < groups; ++r) {
    rank[order[r]] = r;
    sorted[r] = std::move(part.elements[order[r]]);
  }
  part.elements = std::move(sorted);
  part.element_of.resize(n);
  for (std::size_t p = 0; p < n; ++p) part.element_of[p] = rank[group[p]];
  return part;
}

void check_selection(const DetController& d, const MultiController& c) {
  if (d.domain != c.domain) throw Error("selection: domains differ");
  for (std::size_t p = 0; p < d.size(); ++p) {
    const auto adm = c.admissible_at(p);
    if (!std::binary_search(adm.begin(), adm.end(), d.choice[p])) {
      throw Error("selection: inadmissible choice at cell " + std::to_string(d.domain[p].index));
    }
  }
}

void check_partition(const Partition& p, const DetController& d) {
  if (p.element_of.size() != d.size()) throw Error("partition: size mismatch");
  std::vector<std::uint32_t> seen(d.size(), 0);
  for (std::size_t e = 0; e < p.size(); ++e) {
    const auto& el = p.elements[e];
    if (el.cells.empty()) throw Error("partition: empty element");
    for (CellId c : el.cells) {
      const auto pos = d.position(c);
      if (!pos) throw Error("partition: cell outside the controller domain");
      if (seen[*pos]++) throw Error("partition: elements overlap");
      if (p.element_of[*pos] != e) throw Error("partition: element_of disagrees");
      if (d.choice[*pos] != el.input) throw Error("partition: input not constant on an element");
    }
  }
  for (auto s : seen) {
    if (s != 1) throw Error("partition: domain not covered");
  }
}

void write_partition_csv(std::ostream& os, const Partition& p, const DetController& d) {
  os << "cell-id,element-id,input-id\n";
  for (std::size_t k = 0; k < d.size(); ++k) {
    os << d.domain[k].index << ',' << p.element_of[k] << ',' << d.choice[k] << '\n';
  }
}

void write_partition_dot(std::ostream& os, const Partition& p, const DetController& d) {
  os << "graph partition {\n  node [shape=box, style=filled, fontsize=8];\n";
  for (std::size_t k = 0; k < d.size(); ++k) {
    const auto idx = d.grid.multi_index(d.domain[k]);
    const double hue = std::fmod(0.618033988749895 * p.element_of[k], 1.0);
    os << "  c" << d.domain[k].index << " [label=\"" << p.element_of[k] << "\", fillcolor=\"" << hue
       << " 0.5 0.95\"";
    if (idx.size() >= 1) {
      os << ", pos=\"" << idx[0] << ',' << (idx.size() > 1 ? idx[1] : 0) << "!\"";
    }
    os << "];\n";
  }
  os << "}\n";
}

}  // namespace entrobound
