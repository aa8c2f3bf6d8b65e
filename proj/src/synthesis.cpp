#include "entrobound/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "entrobound/kernels.hpp"
#include "entrobound/parallel.hpp"

namespace entrobound {

InputGrid InputGrid::build(const HyperRect& U, std::vector<double> eta) {
  if (eta.size() != U.dim()) throw Error("input grid: eta dimension mismatch");
  InputGrid g;
  g.box = U;
  g.counts.resize(U.dim());
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < U.dim(); ++i) {
    if (!(eta[i] > 0)) throw Error("input grid: eta must be positive");
    const double width = U.ub(i) - U.lb(i);
    g.counts[i] = static_cast<std::uint32_t>(std::floor(width / eta[i] + 1e-9)) + 1;
    total *= g.counts[i];
  }
  if (total > 1'000'000) throw Error("input grid: more than 1e6 input points");
  g.eta = std::move(eta);
  g.points.reserve(total);
  std::vector<std::uint32_t> k(U.dim(), 0);
  for (std::uint64_t n = 0; n < total; ++n) {
    std::vector<double> p(U.dim());
    for (std::size_t i = 0; i < U.dim(); ++i) p[i] = U.lb(i) + k[i] * g.eta[i];
    g.points.push_back(std::move(p));
    for (std::size_t i = 0; i < U.dim(); ++i) {
      if (++k[i] < g.counts[i]) break;
      k[i] = 0;
    }
  }
  return g;
}

PrefixCount::PrefixCount(const UniformGrid& grid, const std::vector<std::uint8_t>& mask) {
  const std::size_t d = grid.dim();
  dims_.resize(d);
  strides_.resize(d);
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < d; ++i) {
    dims_[i] = grid.counts()[i] + 1;
    strides_[i] = total;
    total *= dims_[i];
  }
  table_.assign(total, 0);
  for (std::uint64_t c = 0; c < grid.size(); ++c) {
    if (!mask[c]) continue;
    std::uint64_t rest = c;
    std::uint64_t at = 0;
    for (std::size_t i = 0; i < d; ++i) {
      at += (rest % grid.counts()[i] + 1) * strides_[i];
      rest /= grid.counts()[i];
    }
    table_[at] = 1;
  }
  for (std::size_t i = 0; i < d; ++i) {
    for (std::uint64_t at = 0; at < total; ++at) {
      if ((at / strides_[i]) % dims_[i] != 0) table_[at] += table_[at - strides_[i]];
    }
  }
}

std::uint64_t PrefixCount::count(const IndexBox& box) const {
  const std::size_t d = dims_.size();
  std::int64_t sum = 0;
  for (std::uint32_t corner = 0; corner < (1u << d); ++corner) {
    std::uint64_t at = 0;
    int sign = 1;
    for (std::size_t i = 0; i < d; ++i) {
      if (corner & (1u << i)) {
        at += std::uint64_t{box.first[i]} * strides_[i];
        sign = -sign;
      } else {
        at += (std::uint64_t{box.last[i]} + 1) * strides_[i];
      }
    }
    sum += sign * static_cast<std::int64_t>(table_[at]);
  }
  return static_cast<std::uint64_t>(sum);
}

std::optional<std::size_t> Abstraction::q_position(CellId c) const {
  auto it = std::lower_bound(q_cells.begin(), q_cells.end(), c);
  if (it == q_cells.end() || *it != c) return std::nullopt;
  return static_cast<std::size_t>(it - q_cells.begin());
}

const std::vector<double>& Abstraction::sequence_input(SeqId s, int t) const {
  const auto m = static_cast<std::uint64_t>(inputs.size());
  std::uint64_t div = 1;
  for (int k = t + 1; k < tau; ++k) div *= m;
  return inputs.points[(s / div) % m];
}

std::vector<double> Abstraction::sequence_vector(SeqId s) const {
  std::vector<double> v;
  for (int t = 0; t < tau; ++t) {
    const auto& u = sequence_input(s, t);
    v.insert(v.end(), u.begin(), u.end());
  }
  return v;
}

IndexBox Abstraction::post_box(std::size_t qpos, SeqId s) const {
  const std::size_t d = state_dim();
  const std::size_t at = (qpos * num_seq_ + s) * d;
  IndexBox box;
  box.first.resize(d);
  box.last.resize(d);
  for (std::size_t i = 0; i < d; ++i) {
    box.first[i] = static_cast<std::uint32_t>(lo_[at + i]);
    box.last[i] = static_cast<std::uint32_t>(hi_[at + i]);
  }
  return box;
}

std::uint64_t Abstraction::post_volume(std::size_t qpos, SeqId s) const {
  const std::size_t d = state_dim();
  const std::size_t at = (qpos * num_seq_ + s) * d;
  std::uint64_t v = 1;
  for (std::size_t i = 0; i < d; ++i) v *= static_cast<std::uint64_t>(hi_[at + i] - lo_[at + i] + 1);
  return v;
}

std::vector<CellId> Abstraction::post_cells(std::size_t qpos, SeqId s) const {
  std::vector<CellId> out;
  grid.for_each_cell(post_box(qpos, s), [&](CellId c) { out.push_back(c); });
  return out;
}

std::vector<std::uint8_t> q_mask_for(const UniformGrid& grid, const StateSet& q) {
  std::vector<std::uint8_t> mask(grid.size(), 0);
  parallel_for(grid.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t c = b; c < e; ++c) mask[c] = rect_in_set(grid.cell_rect(CellId{c}), q) ? 1 : 0;
  });
  return mask;
}

namespace {

// Fills lo/hi/stays for every (q cell, sequence) with the center/radius chain
// of an affine system, using the vectorized kernels.
void build_affine_batch(const SystemDef& sys, Abstraction& abs, const PrefixCount& qcount,
                        std::vector<std::int32_t>& lo, std::vector<std::int32_t>& hi,
                        std::vector<std::uint8_t>& stays) {
  const std::size_t d = abs.state_dim();
  const std::size_t nq = abs.q_cells.size();
  const std::size_t S = abs.num_sequences();
  const auto& grid = abs.grid;

  std::vector<std::vector<double>> cen(d, std::vector<double>(nq));
  for (std::size_t q = 0; q < nq; ++q) {
    const auto c = grid.cell_center(abs.q_cells[q]);
    for (std::size_t i = 0; i < d; ++i) cen[i][q] = c[i];
  }
  std::vector<kernels::Axis> axes(d);
  for (std::size_t i = 0; i < d; ++i) {
    axes[i] = {grid.domain().lb(i), grid.domain().ub(i), grid.eta()[i],
               static_cast<double>(grid.counts()[i])};
  }
  std::vector<double> absA(sys.A.data.size());
  for (std::size_t k = 0; k < absA.size(); ++k) absA[k] = std::abs(sys.A.data[k]);

  parallel_for(S, [&](std::size_t sb, std::size_t se) {
    std::vector<std::vector<double>> cur(d, std::vector<double>(nq));
    std::vector<std::vector<double>> nxt(d, std::vector<double>(nq));
    std::vector<const double*> ptr(d);
    std::vector<std::vector<std::int32_t>> first(d, std::vector<std::int32_t>(nq));
    std::vector<std::vector<std::int32_t>> last(d, std::vector<std::int32_t>(nq));
    std::vector<std::uint8_t> flags(nq);
    std::vector<std::uint8_t> ok(nq);
    IndexBox box;
    box.first.resize(d);
    box.last.resize(d);
    for (std::size_t s = sb; s < se; ++s) {
      cur = cen;
      std::vector<double> r(d);
      for (std::size_t i = 0; i < d; ++i) r[i] = 0.5 * grid.eta()[i];
      std::fill(ok.begin(), ok.end(), 1);
      for (int t = 0; t < abs.tau; ++t) {
        const auto& u = abs.sequence_input(static_cast<SeqId>(s), t);
        const auto off = affine_offset(sys.B, u, sys.disturbance);
        std::vector<double> r2(d, 0.0);
        for (std::size_t i = 0; i < d; ++i) {
          for (std::size_t j = 0; j < d; ++j) r2[i] += absA[i * d + j] * r[j];
          if (sys.disturbance) r2[i] += sys.disturbance->radius(i);
        }
        for (std::size_t j = 0; j < d; ++j) ptr[j] = cur[j].data();
        std::fill(flags.begin(), flags.end(), 0);
        for (std::size_t i = 0; i < d; ++i) {
          kernels::affine_row(nq, d, ptr.data(), &sys.A.data[i * d], off[i], nxt[i].data());
          kernels::cover_axis(nq, nxt[i].data(), r2[i], axes[i], first[i].data(), last[i].data(),
                              flags.data());
        }
        for (std::size_t q = 0; q < nq; ++q) {
          if (!ok[q]) continue;
          if (flags[q]) {
            ok[q] = 0;
            continue;
          }
          std::uint64_t vol = 1;
          for (std::size_t i = 0; i < d; ++i) {
            box.first[i] = static_cast<std::uint32_t>(first[i][q]);
            box.last[i] = static_cast<std::uint32_t>(last[i][q]);
            vol *= box.last[i] - box.first[i] + 1;
          }
          if (qcount.count(box) != vol) ok[q] = 0;
        }
        std::swap(cur, nxt);
        r = r2;
      }
      for (std::size_t q = 0; q < nq; ++q) {
        const std::size_t at = q * S + s;
        stays[at] = ok[q];
        for (std::size_t i = 0; i < d; ++i) {
          lo[at * d + i] = first[i][q];
          hi[at * d + i] = last[i][q];
        }
      }
    }
  });
}

void build_generic(const ReachOracle& oracle, Abstraction& abs, const PrefixCount& qcount,
                   std::vector<std::int32_t>& lo, std::vector<std::int32_t>& hi,
                   std::vector<std::uint8_t>& stays) {
  const std::size_t d = abs.state_dim();
  const std::size_t S = abs.num_sequences();
  const auto tau = static_cast<std::size_t>(abs.tau);
  const std::size_t m = abs.inputs.size();
  parallel_for(abs.q_cells.size(), [&](std::size_t qb, std::size_t qe) {
    // Consecutive sequence ids share prefixes; only the changed suffix is recomputed.
    std::vector<HyperRect> rect(tau);
    std::vector<std::optional<IndexBox>> box(tau);
    std::vector<std::uint8_t> ok(tau, 0);
    std::vector<std::size_t> digit(tau), prev(tau);
    for (std::size_t q = qb; q < qe; ++q) {
      const HyperRect cell = abs.grid.cell_rect(abs.q_cells[q]);
      for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t t = tau, rest = s; t-- > 0; rest /= m) digit[t] = rest % m;
        std::size_t start = 0;
        if (s > 0) {
          while (start < tau && digit[start] == prev[start]) ++start;
        }
        for (std::size_t t = start; t < tau; ++t) {
          if (t > 0 && !ok[t - 1]) {
            ok[t] = 0;
            box[t] = box[t - 1];
            continue;
          }
          rect[t] = oracle(t == 0 ? cell : rect[t - 1], abs.inputs.points[digit[t]]).enclosure;
          bool esc = false;
          box[t] = abs.grid.cover_box(rect[t], &esc);
          ok[t] = !esc && box[t] && qcount.count(*box[t]) == box[t]->volume();
        }
        prev.swap(digit);
        const std::size_t at = q * S + s;
        const auto& last = box[tau - 1];
        stays[at] = ok[tau - 1];
        for (std::size_t i = 0; i < d; ++i) {
          lo[at * d + i] = last ? static_cast<std::int32_t>(last->first[i]) : 0;
          hi[at * d + i] = last ? static_cast<std::int32_t>(last->last[i]) : 0;
        }
      }
    }
  });
}

}  // namespace

Abstraction build_abstraction(const SystemDef& sys, const UniformGrid& grid,
                              std::vector<std::uint8_t> q_mask, const InputGrid& inputs,
                              const BuildOptions& opts) {
  sys.validate();
  if (opts.tau < 1) throw Error("tau must be at least 1");
  if (opts.tau > 1 && sys.set_valued()) {
    throw Error("tau > 1 is not supported for set-valued systems");
  }
  if (grid.dim() != sys.state_dim) throw Error("state grid dimension differs from the system");
  if (inputs.box.dim() != sys.input_dim) throw Error("input set dimension differs from the system");
  if (q_mask.size() != grid.size()) throw Error("q_mask size differs from the grid");

  Abstraction abs;
  abs.grid = grid;
  abs.inputs = inputs;
  abs.tau = opts.tau;
  abs.set_valued = sys.set_valued();
  abs.q_mask = std::move(q_mask);
  for (std::uint64_t c = 0; c < grid.size(); ++c) {
    if (abs.q_mask[c]) abs.q_cells.push_back(CellId{c});
  }
  if (abs.q_cells.empty()) throw Error("Q contains no grid cell");

  std::uint64_t S = 1;
  for (int t = 0; t < opts.tau; ++t) {
    S *= inputs.size();
    if (S > opts.max_sequences) {
      throw Error("input sequence count exceeds the guard of " + std::to_string(opts.max_sequences));
    }
  }
  abs.num_seq_ = static_cast<std::uint32_t>(S);

  const std::size_t pairs = abs.q_cells.size() * S;
  abs.lo_.assign(pairs * grid.dim(), 0);
  abs.hi_.assign(pairs * grid.dim(), 0);
  abs.stays_.assign(pairs, 0);
  const PrefixCount qcount(grid, abs.q_mask);

  if (!opts.oracle && opts.batch_affine && sys.kind == SystemKind::affine) {
    build_affine_batch(sys, abs, qcount, abs.lo_, abs.hi_, abs.stays_);
  } else {
    const ReachOracle oracle = opts.oracle ? opts.oracle : make_oracle(sys);
    build_generic(oracle, abs, qcount, abs.lo_, abs.hi_, abs.stays_);
  }
  return abs;
}

Abstraction build_abstraction(const Problem& p, const BuildOptions& opts) {
  const UniformGrid grid = p.state_grid();
  return build_abstraction(p.system, grid, q_mask_for(grid, p.q),
                           InputGrid::build(p.input_box, p.eta_i), opts);
}

std::optional<std::size_t> MultiController::position(CellId c) const {
  auto it = std::lower_bound(domain.begin(), domain.end(), c);
  if (it == domain.end() || *it != c) return std::nullopt;
  return static_cast<std::size_t>(it - domain.begin());
}

std::vector<std::uint8_t> MultiController::domain_mask() const {
  std::vector<std::uint8_t> mask(grid.size(), 0);
  for (CellId c : domain) mask[c.index] = 1;
  return mask;
}

MultiController invariant_controller(const Abstraction& abs) {
  const std::size_t nq = abs.q_cells.size();
  const std::uint32_t S = abs.num_sequences();
  std::vector<std::uint8_t> in_d = abs.q_mask;
  std::vector<std::uint32_t> witness(nq, 0);
  std::vector<std::uint8_t> alive(nq, 1);

  auto admissible = [&](const PrefixCount& cnt, std::size_t q, SeqId s) {
    return abs.stays_in_q(q, s) && cnt.count(abs.post_box(q, s)) == abs.post_volume(q, s);
  };

  int sweeps = 0;
  bool changed = true;
  while (changed) {
    changed = false;
    ++sweeps;
    const PrefixCount cnt(abs.grid, in_d);
    std::vector<std::uint8_t> next = in_d;
    for (std::size_t q = 0; q < nq; ++q) {
      if (!alive[q]) continue;
      // a sequence rejected once stays rejected: D only shrinks
      std::uint32_t s = witness[q];
      while (s < S && !admissible(cnt, q, s)) ++s;
      witness[q] = s;
      if (s == S) {
        alive[q] = 0;
        next[abs.q_cells[q].index] = 0;
        changed = true;
      }
    }
    in_d.swap(next);
  }

  MultiController out;
  out.grid = abs.grid;
  out.tau = abs.tau;
  out.num_sequences = S;
  out.sweeps = sweeps;
  out.offsets.push_back(0);
  const PrefixCount cnt(abs.grid, in_d);
  for (std::size_t q = 0; q < nq; ++q) {
    if (!alive[q]) continue;
    out.domain.push_back(abs.q_cells[q]);
    for (std::uint32_t s = witness[q]; s < S; ++s) {
      if (admissible(cnt, q, s)) out.admissible.push_back(s);
    }
    out.offsets.push_back(static_cast<std::uint32_t>(out.admissible.size()));
  }
  return out;
}

ForwardBackwardResult forward_backward_domain(const SystemDef& sys, const SystemDef& sys_rev,
                                              const UniformGrid& grid,
                                              std::vector<std::uint8_t> q_mask,
                                              const InputGrid& inputs, int max_alternations) {
  ForwardBackwardResult res;
  std::size_t before = 0;
  for (int k = 0; k < max_alternations; ++k) {
    const SystemDef& s = (k % 2 == 0) ? sys : sys_rev;
    before = static_cast<std::size_t>(std::count(q_mask.begin(), q_mask.end(), 1));
    auto ctrl = invariant_controller(build_abstraction(s, grid, q_mask, inputs));
    auto mask = ctrl.domain_mask();
    const bool same = mask == q_mask;
    q_mask.swap(mask);
    res.alternations = k + 1;
    res.cells = ctrl.size();
    if (ctrl.empty() || (same && k > 0)) {
      res.mask = std::move(q_mask);
      return res;
    }
  }
  throw Error("forward/backward iteration did not settle after " +
              std::to_string(max_alternations) + " alternations (last domain sizes " +
              std::to_string(before) + ", " + std::to_string(res.cells) + ")");
}

void write_controller(std::ostream& os, const MultiController& c) {
  auto vec = [&](const char* key, const auto& v) {
    os << key;
    for (auto x : v) os << ' ' << x;
    os << '\n';
  };
  char buf[32];
  auto reals = [&](const char* key, const std::vector<double>& v) {
    os << key;
    for (double x : v) {
      std::snprintf(buf, sizeof buf, "%.17g", x);
      os << ' ' << buf;
    }
    os << '\n';
  };
  os << "entrobound-controller 1\n";
  os << "dim " << c.grid.dim() << '\n';
  reals("lb", c.grid.domain().lb());
  reals("ub", c.grid.domain().ub());
  reals("eta", c.grid.eta());
  vec("counts", c.grid.counts());
  os << "tau " << c.tau << '\n';
  os << "sequences " << c.num_sequences << '\n';
  os << "cells " << c.domain.size() << '\n';
  for (std::size_t p = 0; p < c.domain.size(); ++p) {
    const auto adm = c.admissible_at(p);
    os << c.domain[p].index << ' ' << adm.size();
    for (SeqId s : adm) os << ' ' << s;
    os << '\n';
  }
}

MultiController read_controller(std::istream& is) {
  auto expect = [&](const char* key) {
    std::string got;
    if (!(is >> got) || got != key) throw Error(std::string("controller file: expected '") + key + "'");
  };
  auto reals = [&](std::size_t d) {
    std::vector<double> v(d);
    for (auto& x : v) {
      if (!(is >> x)) throw Error("controller file: truncated");
    }
    return v;
  };
  expect("entrobound-controller");
  int version = 0;
  is >> version;
  if (version != 1) throw Error("controller file: unsupported version");
  std::size_t d = 0;
  expect("dim");
  is >> d;
  expect("lb");
  auto lb = reals(d);
  expect("ub");
  auto ub = reals(d);
  expect("eta");
  auto eta = reals(d);
  expect("counts");
  std::vector<std::uint64_t> counts(d);
  for (auto& n : counts) is >> n;
  MultiController c;
  c.grid = UniformGrid(HyperRect(std::move(lb), std::move(ub)), std::move(eta));
  if (c.grid.counts() != counts) throw Error("controller file: grid counts do not match");
  expect("tau");
  is >> c.tau;
  expect("sequences");
  is >> c.num_sequences;
  std::size_t n = 0;
  expect("cells");
  is >> n;
  c.offsets.push_back(0);
  for (std::size_t p = 0; p < n; ++p) {
    std::uint64_t id = 0;
    std::size_t k = 0;
    if (!(is >> id >> k)) throw Error("controller file: truncated");
    if (id >= c.grid.size()) throw Error("controller file: cell out of range");
    if (!c.domain.empty() && CellId{id} <= c.domain.back()) {
      throw Error("controller file: cells not ascending");
    }
    c.domain.push_back(CellId{id});
    for (std::size_t j = 0; j < k; ++j) {
      SeqId s = 0;
      if (!(is >> s) || s >= c.num_sequences) throw Error("controller file: bad sequence id");
      c.admissible.push_back(s);
    }
    c.offsets.push_back(static_cast<std::uint32_t>(c.admissible.size()));
  }
  return c;
}

}  // namespace entrobound
