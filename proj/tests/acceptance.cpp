// Acceptance run: one PASS/FAIL line per criterion, exit status 1 when any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

#include "entrobound/pipeline.hpp"
#include "entrobound/reproduce.hpp"
#include "support.hpp"

using namespace entrobound;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
  double limit = 0;  // seconds, 0 for none

  void fail(const std::string& why) {
    if (pass) detail.clear();
    pass = false;
    detail += (detail.empty() ? "" : "; ") + why;
  }
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Built {
  Abstraction abs;
  MultiController c;
  DetController d;
  Partition part;
};

Built build(const Problem& p, Determinizer det, PartitionMode mode) {
  BuildOptions opts;
  opts.tau = p.tau;
  Built b{build_abstraction(p, opts), {}, {}, {}};
  b.c = invariant_controller(b.abs);
  b.d = determinize(det, b.c, b.abs);
  b.part = coarse_partition(b.d, mode);
  return b;
}

Outcome example_golden() {
  Outcome o;
  o.limit = 1;
  RunConfig cfg;
  const auto r = run(cfg);
  if (!r.det) {
    o.fail("no det result");
    return o;
  }
  const double rho = std::exp2(r.det->h_BA);
  o.detail = fmt("|B| %zu, |A| %zu, %zu SCC, %zu rr nodes, rho %.6f, bound %.6f", r.domain_cells,
                 r.elements, r.det->sccs, r.det->rr_nodes, rho, r.det->bound);
  if (r.domain_cells != 9 || r.elements != 3 || r.det->sccs != 1 || r.det->rr_nodes != 7 ||
      std::abs(rho - 2.41421) > 1e-4 || std::abs(r.det->bound - 1.2716) > 1e-3)
    o.fail(o.detail);
  return o;
}

Outcome word_count_oracle() {
  Outcome o;
  o.limit = 10;
  int checked = 0;
  for (const auto& name : builtin_names()) {
    const auto p = builtin_system(name);
    if (p.system.set_valued()) continue;
    // the fine-cell count is known only after synthesis; skip large grids up front
    if (p.state_grid().size() > 4096) continue;
    const auto b = build(p, Determinizer::maxfreq, PartitionMode::by_input);
    if (b.d.size() > 64) continue;
    const auto g = labeled_graph(transition_matrix(b.abs, b.d), b.d, b.part);
    const double h = det_upper_bound(g, 1).h_BA;
    const auto w20 = count_words(g, 20), w21 = count_words(g, 21);
    const double ratio = std::log2(w21.convert_to<double>() / w20.convert_to<double>());
    ++checked;
    o.detail += fmt("%s: log2(W21/W20) %.5f vs h %.5f ", name.c_str(), ratio, h);
    if (std::abs(ratio - h) > 0.05) o.fail(name + " differs by more than 0.05");
  }
  if (checked == 0) o.fail("no builtin with at most 64 fine cells");
  return o;
}

Outcome karp() {
  Outcome o;
  o.limit = 5;
  std::mt19937_64 rng(1);
  double worst = 0;
  int bad_witness = 0;
  for (int k = 0; k < 200; ++k) {
    const auto g = testing::random_weighted(rng, 1 + rng() % 8);
    const auto m = max_cycle_mean(g);
    worst = std::max(worst, std::abs(m.value - brute_force_mcm(g)));
    if (m.cycle.empty() || std::abs(m.cycle_mean - m.value) > 1e-12) ++bad_witness;
  }
  o.detail = fmt("200 graphs, max |karp - brute| %.3g, bad witnesses %d", worst, bad_witness);
  if (worst > 1e-12 || bad_witness) o.fail(o.detail);
  return o;
}

Outcome path_weight_convergence() {
  Outcome o;
  std::vector<WeightedDigraph> graphs;
  {
    const auto b = build(builtin_system("uncertain-linear"), Determinizer::minsucc, PartitionMode::by_cell);
    graphs.push_back(build_weighted_graph(b.abs, b.d, b.part));
  }
  std::mt19937_64 rng(4);
  for (int k = 0; k < 20; ++k) graphs.push_back(testing::random_weighted(rng, 2 + rng() % 30));
  int violations = 0;
  double worst_1000 = 0;
  for (const auto& g : graphs) {
    const double n = double(g.size());
    const double wmax = *std::max_element(g.weight.begin(), g.weight.end());
    const double w = max_cycle_mean(g).value;
    for (double tau : {n, 10 * n, 100 * n}) {
      if (std::abs(max_path_weight(g, int(tau)) / tau - w) > (n * std::log2(n) + n * wmax) / tau) ++violations;
    }
    worst_1000 = std::max(worst_1000, std::abs(max_path_weight(g, 1000) / 1000 - w));
  }
  o.detail = fmt("%zu graphs (first: %zu nodes), gap-bound violations %d, max gap at tau=1000 %.4f",
                 graphs.size(), graphs[0].size(), violations, worst_1000);
  if (violations || worst_1000 > 0.1) o.fail(o.detail);
  return o;
}

Outcome expansion() {
  Outcome o;
  o.limit = 60;
  std::mt19937_64 rng(5);
  int cases = 0, bad = 0;
  // every (|A|, tau) combination, several seeded tables each
  for (std::size_t a = 1; a <= 3; ++a)
    for (int tau = 1; tau <= 3; ++tau)
      for (int rep = 0; rep < 4; ++rep) {
        const auto succ = testing::random_succ(rng, a);
        const auto chk = expansion_oracle(a, succ, tau);
        ++cases;
        if (chk.exhaustive_min != chk.graph_value) ++bad;
      }
  o.detail = fmt("%d instances, %d mismatches", cases, bad);
  if (bad || cases < 20) o.fail(o.detail);
  return o;
}

Outcome uncertain_sweep() {
  Outcome o;
  o.limit = 30;
  const auto rows = reproduce("unc-eta");
  std::vector<double> ours, ref;
  for (const auto& r : rows) {
    if (r.status != "ok" || !r.bound || !r.reference) {
      o.fail(fmt("eta_s %g: %s", r.value, r.status.c_str()));
      continue;
    }
    ours.push_back(*r.bound);
    ref.push_back(*r.reference);
    o.detail += fmt("%g: %.4f (ref %.4f) ", r.value, *r.bound, *r.reference);
    if (std::abs(*r.bound - *r.reference) > 0.7) o.fail(fmt("eta_s %g off by more than 0.7", r.value));
    if (*r.bound < 0.9316) o.fail(fmt("eta_s %g below the lower bound 0.9316", r.value));
  }
  if (!o.pass) return o;
  if (rows[0].domain != 109) o.fail(fmt("eta_s 0.2 domain %zu, expected 109", rows[0].domain));
  if (std::abs(ours[0] - 3.3219) > 0.5) o.fail("eta_s 0.2 not within 0.5 of 3.3219");
  // ordering must agree wherever the reference values are separated by more than the tolerance
  for (std::size_t i = 0; i < ours.size(); ++i)
    for (std::size_t j = i + 1; j < ours.size(); ++j)
      if (std::abs(ref[i] - ref[j]) > 0.7 && (ours[i] < ours[j]) != (ref[i] < ref[j]))
        o.fail(fmt("order of eta_s %g and %g differs", rows[i].value, rows[j].value));
  return o;
}

Outcome floor_ceiling() {
  Outcome o;
  o.limit = 300;
  auto check = [&](const std::string& label, const RunReport& r, double floor) {
    if (r.status != RunReport::Status::ok || !r.det) {
      o.fail(label + ": no bound");
      return;
    }
    const double per = r.det->bound / r.time_scale;
    const double ceiling = std::log2(double(r.elements)) / r.tau / r.time_scale;
    o.detail += fmt("%s %.4f ", label.c_str(), per);
    if (per < floor - 1e-9) o.fail(fmt("%s below floor %.4f", label.c_str(), floor));
    if (per > ceiling + 1e-9) o.fail(fmt("%s above log2|A| ceiling %.4f", label.c_str(), ceiling));
  };
  for (int tau = 1; tau <= 3; ++tau) {
    RunConfig cfg;
    cfg.system = "linear2d";
    cfg.tau = tau;
    const auto r = run(cfg);
    check(fmt("linear2d tau=%d", tau), r, 1.003);
    if (tau == 1 && r.det && (r.det->bound < 1.003 || r.det->bound > 2.0))
      o.fail("linear2d tau=1 outside [1.003, 2.0]");
  }
  for (double ts : {0.8, 0.5, 0.1, 0.01, 0.001}) {
    RunConfig cfg;
    cfg.system = "pendulum";
    cfg.params.sampling = ts;
    cfg.eta_s = std::vector<double>{1e-5};
    check(fmt("pendulum Ts=%g", ts), run(cfg), 2.8854);
  }
  for (int tau = 1; tau <= 3; ++tau) {
    RunConfig cfg;
    cfg.system = "pendulum";
    cfg.tau = tau;
    cfg.eta_s = std::vector<double>{1e-4};
    check(fmt("pendulum tau=%d", tau), run(cfg), 2.8854);
  }
  return o;
}

Outcome refinement() {
  Outcome o;
  for (const char* name : {"example1", "linear2d"}) {
    for (auto mode : {PartitionMode::by_input, PartitionMode::by_cell}) {
      RunConfig cfg;
      cfg.system = name;
      cfg.pipeline = PipelineKind::both;
      cfg.partition = mode;
      const auto r = run(cfg);
      if (!r.det || !r.unc) {
        o.fail(std::string(name) + ": missing bound");
        continue;
      }
      o.detail += fmt("%s/%s unc %.4f >= det %.4f ", name, std::string(to_string(mode)).c_str(),
                      r.unc->bound, r.det->bound);
      if (!(r.unc->bound >= r.det->bound)) o.fail(std::string(name) + ": unc < det");
    }
  }
  return o;
}

Outcome soundness() {
  Outcome o;
  std::mt19937_64 rng(9);
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
  auto unif = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };

  // reachability: 1000 cells x 100 points, spread over the builtins
  std::size_t reach_bad = 0, cells = 0;
  const auto names = builtin_names();
  for (const auto& name : names) {
    BuiltinParams params;
    if (name == "pendulum") params.sampling = 0.1;
    const auto p = builtin_system(name, params);
    const auto grid = p.state_grid();
    const auto inputs = InputGrid::build(p.input_box, p.eta_i);
    for (std::size_t k = 0; k < 200; ++k, ++cells) {
      const auto rect = grid.cell_rect(CellId{pick(grid.size())});
      const auto& u = inputs.points[pick(inputs.size())];
      const auto enc = reach(p.system, rect, u).enclosure;
      for (int j = 0; j < 100; ++j) {
        std::vector<double> x(rect.dim());
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = unif(rect.lb(i), rect.ub(i));
        auto y = step_point(p.system, x, u);
        if (p.system.disturbance)
          for (std::size_t i = 0; i < y.size(); ++i) y[i] += unif(p.system.disturbance->lb(i), p.system.disturbance->ub(i));
        if (!enc.contains(y)) ++reach_bad;
      }
    }
  }

  // closed loop: 1000 trajectories x 1000 steps with random admissible inputs
  std::size_t loop_bad = 0, trajectories = 0;
  for (const char* name : {"example1", "linear2d", "uncertain-linear", "uncertain-linear"}) {
    const auto p = builtin_system(name);
    const auto abs = build_abstraction(p);
    const auto c = invariant_controller(abs);
    for (int t = 0; t < 250; ++t, ++trajectories) {
      const auto start = c.grid.cell_rect(c.domain[pick(c.size())]);
      std::vector<double> x(start.dim());
      for (std::size_t i = 0; i < x.size(); ++i) x[i] = unif(start.lb(i), start.ub(i));
      for (int step = 0; step < 1000; ++step) {
        const auto cell = c.grid.locate(x);
        const auto pos = cell ? c.position(*cell) : std::nullopt;
        if (!pos) {
          ++loop_bad;
          break;
        }
        const auto adm = c.admissible_at(*pos);
        x = step_point(p.system, x, abs.sequence_input(adm[pick(adm.size())], 0));
        if (p.system.disturbance)
          for (std::size_t i = 0; i < x.size(); ++i) x[i] += unif(p.system.disturbance->lb(i), p.system.disturbance->ub(i));
      }
    }
  }

  // right-resolving presentations: identical label words up to length 8
  std::size_t lang_bad = 0, graphs = 0;
  auto compare = [&](const LabeledDigraph& comp) {
    for (auto seed : {RrSeed::singletons, RrSeed::full_set}) {
      const auto rr = right_resolve(comp, 1'000'000, seed);
      ++graphs;
      for (int n = 1; n <= 8; ++n)
        if (testing::words_by_walks(rr, n) != testing::words_by_walks(comp, n)) {
          ++lang_bad;
          break;
        }
    }
  };
  {
    const auto b = build(builtin_system("example1"), Determinizer::maxfreq, PartitionMode::by_input);
    const auto g = labeled_graph(transition_matrix(b.abs, b.d), b.d, b.part);
    const auto comps = scc(g.adj);
    for (std::size_t k = 0; k < comps.components.size(); ++k)
      if (!comps.trivial[k]) compare(induced_subgraph(g, comps.components[k]));
  }
  for (int k = 0; graphs < 100; ++k) {
    const auto g = testing::random_labeled(rng, 2 + pick(9), 1 + static_cast<std::uint32_t>(pick(3)));
    const auto comps = scc(g.adj);
    for (std::size_t c = 0; c < comps.components.size(); ++c)
      if (!comps.trivial[c] && comps.components[c].size() > 1) compare(induced_subgraph(g, comps.components[c]));
  }

  o.detail = fmt("enclosures %zu cells x 100 points: %zu misses; closed loop %zu x 1000 steps: %zu exits; "
                 "rr languages %zu graphs: %zu mismatches",
                 cells, reach_bad, trajectories, loop_bad, graphs, lang_bad);
  if (reach_bad || loop_bad || lang_bad) o.fail(o.detail);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"example golden run", example_golden},
      {"spectral radius vs word counts", word_count_oracle},
      {"Karp vs brute force", karp},
      {"path weights converge to w*", path_weight_convergence},
      {"expansion number identity", expansion},
      {"uncertain linear sweep", uncertain_sweep},
      {"theory floor and |A| ceiling", floor_ceiling},
      {"unc bound dominates det bound", refinement},
      {"soundness suite", soundness},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (o.limit > 0 && secs > o.limit) o.fail(fmt("took %.1f s, limit %.0f s", secs, o.limit));
    failed += !o.pass;
    std::printf("%s %zu %s (%.2f s): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, secs,
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
