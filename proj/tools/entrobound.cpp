#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>

#include "entrobound/kernels.hpp"
#include "entrobound/parallel.hpp"
#include "entrobound/pipeline.hpp"
#include "entrobound/reproduce.hpp"

using namespace entrobound;

namespace {

struct RunArgs {
  RunConfig cfg;
  std::vector<double> eta_s;
  std::vector<double> eta_i;
  int tau = 0;
  std::string determinizer = "maxfreq";
  std::string partition = "by-input";
  std::string pipeline = "det";
  std::int64_t seed = -1;
  double rho = NAN, b = NAN, ts = NAN, epsilon = NAN, growth = NAN;
  bool no_fb = false;

  RunConfig resolve() const {
    RunConfig c = cfg;
    if (!eta_s.empty()) c.eta_s = eta_s;
    if (!eta_i.empty()) c.eta_i = eta_i;
    if (tau > 0) c.tau = tau;
    c.determinizer = determinizer_from_string(determinizer);
    c.partition = partition_mode_from_string(partition);
    c.pipeline = pipeline_from_string(pipeline);
    if (seed >= 0) c.seed = static_cast<std::uint64_t>(seed);
    auto opt = [](double v) { return std::isnan(v) ? std::nullopt : std::optional<double>(v); };
    c.params.rho = opt(rho);
    c.params.b = opt(b);
    c.params.sampling = opt(ts);
    c.params.epsilon = opt(epsilon);
    c.params.growth = opt(growth);
    c.forward_backward = !no_fb;
    return c;
  }
};

void add_run_options(CLI::App* app, RunArgs& a) {
  app->add_option("system", a.cfg.system, "builtin name or system file (.json)")->required();
  app->add_option("--pipeline", a.pipeline, "det, unc or both");
  app->add_option("--eta-s", a.eta_s, "state grid parameter (one value or one per axis)");
  app->add_option("--eta-i", a.eta_i, "input grid parameter (one value or one per axis)");
  app->add_option("--tau", a.tau, "input sequence length");
  app->add_option("--determinizer", a.determinizer, "maxfreq, minnorm or minsucc");
  app->add_option("--partition", a.partition, "by-input, by-input-connected or by-cell");
  app->add_option("--seed", a.seed, "seed for random minsucc tie-breaking");
  app->add_option("--rho", a.rho, "pendulum control range");
  app->add_option("--b", a.b, "pendulum damping");
  app->add_option("--ts", a.ts, "pendulum sampling time");
  app->add_option("--growth", a.growth, "pendulum growth bound L");
  app->add_option("--epsilon", a.epsilon, "henon control range");
  app->add_flag("--no-forward-backward", a.no_fb, "skip the time-reversed iteration");
  app->add_option("--max-sequences", a.cfg.max_sequences, "guard on the number of input sequences");
}

void print_summary(const RunReport& r) {
  std::printf("system        %s (%s pipeline)\n", r.system.c_str(), r.pipeline.c_str());
  std::printf("grid          %zu Q cells, %zu inputs, tau %d\n", r.q_cells, r.inputs, r.tau);
  if (r.alternations) std::printf("fwd/bwd       %d alternations\n", r.alternations);
  if (r.status != RunReport::Status::ok) {
    std::printf("status        empty controller domain\n");
    return;
  }
  std::printf("|B|           %zu\n|A|           %zu\n", r.domain_cells, r.elements);
  if (r.det) {
    std::printf("SCCs          %zu\nrr nodes      %zu\n", r.det->sccs, r.det->rr_nodes);
    std::printf("h(B,A)        %.6g\n", r.det->h_BA);
    std::printf("det bound     %.6g bits/step", r.det->bound);
    if (r.time_scale != 1) std::printf(", %.6g bits/time", r.det->bound / r.time_scale);
    std::printf("\n");
  }
  if (r.unc) {
    std::printf("w*_m          %.6g bits/step", r.unc->bound);
    if (r.time_scale != 1) std::printf(", %.6g bits/time", r.unc->bound / r.time_scale);
    std::printf("\nwitness       ");
    for (auto v : r.unc->witness) std::printf("%u ", v);
    std::printf("\n");
  }
  if (r.theory) std::printf("theory        %.6g\n", *r.theory);
  double total = 0;
  for (const auto& t : r.timings) total += t.seconds;
  std::printf("time          %.3f s\n", total);
}

std::ostream& out_or_stdout(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw Error("cannot write '" + path + "'");
  return file;
}

int cmd_export_dot(const RunArgs& args, const std::string& what, const std::string& out_path) {
  const RunConfig cfg = args.resolve();
  if (what == "system") {
    std::ofstream f;
    write_json(out_or_stdout(out_path, f),
               problem_to_json(apply_overrides(resolve_problem(cfg.system, cfg.params), cfg)));
    return 0;
  }
  const Problem p = configure_problem(cfg);
  BuildOptions opts;
  opts.tau = p.tau;
  opts.max_sequences = cfg.max_sequences;
  const UniformGrid grid = p.state_grid();
  const InputGrid inputs = InputGrid::build(p.input_box, p.eta_i);
  auto mask = q_mask_for(grid, p.q);
  if (p.reversed && cfg.forward_backward)
    mask = forward_backward_domain(p.system, *p.reversed, grid, mask, inputs).mask;
  if (std::find(mask.begin(), mask.end(), 1) == mask.end()) return 2;
  const Abstraction abs = build_abstraction(p.system, grid, mask, inputs, opts);
  const MultiController c = invariant_controller(abs);
  if (c.empty()) return 2;
  const DetController d = determinize(cfg.determinizer, c, abs, cfg.seed);
  const Partition part = coarse_partition(d, cfg.partition);
  std::ofstream f;
  std::ostream& os = out_or_stdout(out_path, f);
  if (what == "partition") {
    write_partition_dot(os, part, d);
  } else if (what == "graph" || what == "rr") {
    const auto g = labeled_graph(transition_matrix(abs, d), d, part);
    if (what == "graph") {
      write_graph_dot(os, g);
    } else {
      // right-resolving graph of the component with the largest spectral radius
      const SccResult comps = scc(g.adj);
      std::optional<RightResolvingGraph> best;
      double best_rho = -1;
      for (std::size_t k = 0; k < comps.components.size(); ++k) {
        if (comps.trivial[k]) continue;
        auto rr = right_resolve(induced_subgraph(g, comps.components[k]));
        const double rho = spectral_radius(rr.R);
        if (rho > best_rho) {
          best_rho = rho;
          best = std::move(rr);
        }
      }
      if (!best) throw Error("no nontrivial strongly connected component");
      write_rr_dot(os, *best);
    }
  } else if (what == "weighted") {
    write_weighted_dot(os, build_weighted_graph(abs, d, part));
  } else {
    throw Error("unknown export '" + what + "' (graph, rr, partition, weighted, system)");
  }
  return 0;
}

WeightedDigraph random_weighted(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> w(0.0, 3.0);
  std::bernoulli_distribution coin(0.35);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  std::vector<double> weight(n);
  for (std::uint32_t a = 0; a < n; ++a) {
    weight[a] = w(rng);
    bool any = false;
    for (std::uint32_t b = 0; b < n; ++b) {
      if (coin(rng)) {
        edges.emplace_back(a, b);
        any = true;
      }
    }
    if (!any) edges.emplace_back(a, std::uniform_int_distribution<std::uint32_t>(0, n - 1)(rng));
  }
  return WeightedDigraph::from_edges(n, std::move(edges), std::move(weight));
}

int cmd_oracle(const std::string& which, const RunArgs& args, int n_words, int cases,
               std::uint64_t seed) {
  if (which == "words") {
    RunConfig cfg = args.resolve();
    const Problem p = configure_problem(cfg);
    const Abstraction abs = build_abstraction(p);
    const MultiController c = invariant_controller(abs);
    if (c.empty()) return 2;
    const DetController d = determinize(cfg.determinizer, c, abs, cfg.seed);
    const Partition part = coarse_partition(d, cfg.partition);
    const auto g = labeled_graph(transition_matrix(abs, d), d, part);
    const DetBound db = det_upper_bound(g, p.tau);
    std::printf("N,words,log2_ratio,h_BA\n");
    boost::multiprecision::cpp_int prev = count_words(g, 1);
    for (int n = 2; n <= n_words + 1; ++n) {
      const auto cur = count_words(g, n);
      const double ratio = std::log2(cur.convert_to<double>() / prev.convert_to<double>());
      std::printf("%d,%s,%.6f,%.6f\n", n - 1, prev.str().c_str(), ratio, db.h_BA);
      prev = cur;
    }
    return 0;
  }
  std::mt19937_64 rng(seed);
  if (which == "karp") {
    double worst = 0;
    for (int k = 0; k < cases; ++k) {
      const auto g = random_weighted(rng, 1 + rng() % 8);
      worst = std::max(worst, std::abs(max_cycle_mean(g).value - brute_force_mcm(g)));
    }
    std::printf("karp vs brute force: %d graphs, max |difference| %.3g\n", cases, worst);
    return worst <= 1e-12 ? 0 : 1;
  }
  if (which == "expansion") {
    int bad = 0;
    for (int k = 0; k < cases; ++k) {
      const std::size_t a = 1 + rng() % 3;
      const int tau = 1 + static_cast<int>(rng() % 3);
      std::vector<std::vector<std::uint32_t>> succ(a);
      for (std::uint32_t v = 0; v < a; ++v) {
        for (std::uint32_t w = 0; w < a; ++w)
          if (rng() % 2) succ[v].push_back(w);
        if (succ[v].empty()) succ[v].push_back(static_cast<std::uint32_t>(rng() % a));
      }
      const auto chk = expansion_oracle(a, succ, tau);
      std::printf("|A|=%zu tau=%d exhaustive=%llu graph=%llu\n", a, tau,
                  static_cast<unsigned long long>(chk.exhaustive_min),
                  static_cast<unsigned long long>(chk.graph_value));
      if (chk.exhaustive_min != chk.graph_value) ++bad;
    }
    return bad == 0 ? 0 : 1;
  }
  throw Error("unknown oracle '" + which + "' (words, karp, expansion)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"entrobound: upper bounds on invariance entropy from grid abstractions"};
  app.require_subcommand(1);
  std::size_t threads = 0;
  std::string simd;
  app.add_option("--threads", threads, "worker threads (default: ENTROBOUND_THREADS or all cores)");
  app.add_option("--simd", simd, "kernel set: scalar or avx2 (default: ENTROBOUND_SIMD or best)");

  RunArgs run_args;
  std::string out_dir;
  bool json = false;
  auto* run_cmd = app.add_subcommand("run", "run the det and/or unc pipeline");
  add_run_options(run_cmd, run_args);
  run_cmd->add_option("--out", out_dir, "directory for report.json, CSV and DOT artifacts");
  run_cmd->add_flag("--json", json, "print report.json to stdout instead of a summary");

  std::vector<std::string> tables;
  std::string csv_path;
  bool full_scale = false;
  auto* repro_cmd = app.add_subcommand("reproduce", "sweep a reference table and print CSV");
  repro_cmd->add_option("tables", tables, "ex1, lin-tau, pend-Ts, pend-tau, henon, unc-eta or all")
      ->required();
  repro_cmd->add_option("--out", csv_path, "CSV file (default stdout)");
  repro_cmd->add_flag("--full-scale", full_scale, "also run the long configurations");

  RunArgs dot_args;
  std::string what = "graph";
  std::string dot_out;
  auto* dot_cmd = app.add_subcommand("export-dot", "write a DOT graph (or the system file)");
  add_run_options(dot_cmd, dot_args);
  dot_cmd->add_option("--what", what, "graph, rr, partition, weighted or system");
  dot_cmd->add_option("--out", dot_out, "output file (default stdout)");

  RunArgs oracle_args;
  oracle_args.cfg.system = "example1";
  std::string which;
  int n_words = 20;
  int cases = 200;
  std::uint64_t seed = 1;
  auto* oracle_cmd = app.add_subcommand("oracle", "brute-force cross-checks");
  oracle_cmd->add_option("which", which, "words, karp or expansion")->required();
  oracle_cmd->add_option("--system", oracle_args.cfg.system, "system for the words oracle");
  oracle_cmd->add_option("--n", n_words, "largest word length for the words oracle");
  oracle_cmd->add_option("--cases", cases, "random instances");
  oracle_cmd->add_option("--seed", seed, "random seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (threads > 0) set_thread_count(threads);
    if (!simd.empty()) {
      if (simd == "scalar") kernels::set_active_isa(kernels::Isa::scalar);
      else if (simd == "avx2") kernels::set_active_isa(kernels::Isa::avx2);
      else throw Error("--simd must be scalar or avx2");
    }
    if (*run_cmd) {
      RunConfig cfg = run_args.resolve();
      cfg.output_dir = out_dir;
      const RunReport rep = run(cfg);
      if (json) write_json(std::cout, report_to_json(rep));
      else print_summary(rep);
      return rep.exit_code();
    }
    if (*repro_cmd) {
      if (tables.size() == 1 && tables[0] == "all") tables = reproduce_tables();
      std::vector<ReproRow> rows;
      for (const auto& t : tables) {
        auto r = reproduce(t, ReproOptions{full_scale});
        rows.insert(rows.end(), r.begin(), r.end());
      }
      std::ofstream f;
      write_repro_csv(out_or_stdout(csv_path, f), rows);
      return 0;
    }
    if (*dot_cmd) return cmd_export_dot(dot_args, what, dot_out);
    if (*oracle_cmd) return cmd_oracle(which, oracle_args, n_words, cases, seed);
  } catch (const std::exception& e) {
    std::cerr << "entrobound: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
