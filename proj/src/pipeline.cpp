#include "entrobound/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <set>

namespace entrobound {

namespace {

using Clock = std::chrono::steady_clock;

class StageClock {
 public:
  explicit StageClock(RunReport& r) : report_(r), start_(Clock::now()), last_(start_) {}

  void mark(std::string stage) {
    const auto now = Clock::now();
    report_.timings.push_back({std::move(stage), std::chrono::duration<double>(now - last_).count()});
    report_.wall_seconds = std::chrono::duration<double>(now - start_).count();
    last_ = now;
  }

 private:
  RunReport& report_;
  Clock::time_point start_;
  Clock::time_point last_;
};

// Errors carry the stage that raised them.
template <class F>
auto in_stage(const char* stage, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(std::string(stage) + ": " + e.what());
  }
}

std::vector<double> broadcast(const std::vector<double>& v, std::size_t dim, const char* what) {
  if (v.size() == dim) return v;
  if (v.size() == 1) return std::vector<double>(dim, v[0]);
  throw Error(std::string(what) + " needs 1 or " + std::to_string(dim) + " values");
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw Error("cannot write '" + p.string() + "'");
  return out;
}

constexpr std::size_t kDotCellLimit = 5000;
constexpr std::size_t kMatrixLimit = 64;
constexpr std::size_t kControllerEntryLimit = 5'000'000;

struct Artifacts {
  std::optional<LabeledDigraph> graph;
  std::vector<std::pair<std::size_t, RightResolvingGraph>> small_rr;  // (component index, graph)
  std::optional<WeightedDigraph> weighted;
};

}  // namespace

std::string_view to_string(PipelineKind k) {
  switch (k) {
    case PipelineKind::det: return "det";
    case PipelineKind::unc: return "unc";
    case PipelineKind::both: return "both";
  }
  return "?";
}

PipelineKind pipeline_from_string(std::string_view s) {
  if (s == "det") return PipelineKind::det;
  if (s == "unc") return PipelineKind::unc;
  if (s == "both") return PipelineKind::both;
  throw Error("unknown pipeline '" + std::string(s) + "' (det, unc, both)");
}

std::optional<double> RunReport::bound_per_time() const {
  if (!bound) return std::nullopt;
  return *bound / time_scale;
}

Problem apply_overrides(Problem p, const RunConfig& cfg) {
  if (cfg.eta_s) p.eta_s = broadcast(*cfg.eta_s, p.system.state_dim, "eta_s");
  if (cfg.eta_i) p.eta_i = broadcast(*cfg.eta_i, p.system.input_dim, "eta_i");
  if (cfg.tau) p.tau = *cfg.tau;
  return p;
}

Problem configure_problem(const RunConfig& cfg) {
  Problem p = apply_overrides(resolve_problem(cfg.system, cfg.params), cfg);
  const bool wants_unc = cfg.pipeline != PipelineKind::det;
  if (cfg.tau) {
    if (*cfg.tau < 1) throw Error("tau must be at least 1");
    p.tau = *cfg.tau;
  }
  if (wants_unc) {
    if (cfg.tau && *cfg.tau != 1) throw Error("the unc pipeline requires tau = 1");
    p.tau = 1;
  }
  if (cfg.determinizer == Determinizer::minsucc && p.tau != 1)
    throw Error("minsucc requires tau = 1");
  if (cfg.pipeline == PipelineKind::det && p.system.set_valued())
    throw Error("the det pipeline needs a deterministic system; use --pipeline unc");
  return p;
}

RunReport run(const RunConfig& cfg) { return run(cfg, configure_problem(cfg)); }

RunReport run(const RunConfig& cfg, const Problem& p) {
  RunReport rep;
  StageClock clock(rep);
  rep.system = p.system.name;
  rep.pipeline = std::string(to_string(cfg.pipeline));
  rep.determinizer = std::string(to_string(cfg.determinizer));
  rep.partition = std::string(to_string(cfg.partition));
  rep.seed = cfg.seed;
  rep.tau = p.tau;
  rep.eta_s = p.eta_s;
  rep.eta_i = p.eta_i;
  rep.time_scale = p.time_scale();
  rep.theory = p.theory;
  const bool do_det = cfg.pipeline != PipelineKind::unc && !p.system.set_valued();
  const bool do_unc = cfg.pipeline != PipelineKind::det;

  const UniformGrid grid = in_stage("grid", [&] { return p.state_grid(); });
  const InputGrid inputs = in_stage("grid", [&] { return InputGrid::build(p.input_box, p.eta_i); });
  auto q_mask = q_mask_for(grid, p.q);
  rep.q_cells = static_cast<std::size_t>(std::count(q_mask.begin(), q_mask.end(), 1));
  rep.inputs = inputs.size();
  clock.mark("grid");

  std::optional<MultiController> ctrl;
  std::optional<Abstraction> abs;
  if (p.reversed && cfg.forward_backward) {
    auto fb = in_stage("forward-backward", [&] {
      return forward_backward_domain(p.system, *p.reversed, grid, q_mask, inputs);
    });
    rep.alternations = fb.alternations;
    q_mask = std::move(fb.mask);
    clock.mark("forward-backward");
  }

  const bool have_cells = std::find(q_mask.begin(), q_mask.end(), 1) != q_mask.end();
  if (have_cells) {
    BuildOptions opts;
    opts.tau = p.tau;
    opts.max_sequences = cfg.max_sequences;
    abs = in_stage("abstraction", [&] { return build_abstraction(p.system, grid, q_mask, inputs, opts); });
    clock.mark("abstraction");
    ctrl = in_stage("synthesis", [&] { return invariant_controller(*abs); });
    clock.mark("synthesis");
  }
  if (!ctrl || ctrl->empty()) {
    rep.status = RunReport::Status::empty_domain;
  }

  Artifacts art;
  std::optional<DetController> dc;
  std::optional<Partition> part;
  if (rep.status == RunReport::Status::ok) {
    rep.domain_cells = ctrl->size();
    dc = in_stage("determinization", [&] {
      auto d = determinize(cfg.determinizer, *ctrl, *abs, cfg.seed);
      check_selection(d, *ctrl);
      return d;
    });
    rep.distinct_inputs = std::set<SeqId>(dc->choice.begin(), dc->choice.end()).size();
    clock.mark("determinization");
    part = in_stage("partition", [&] {
      auto pt = coarse_partition(*dc, cfg.partition);
      check_partition(pt, *dc);
      return pt;
    });
    rep.elements = part->size();
    clock.mark("partition");

    if (do_det) {
      in_stage("det-bound", [&] {
        auto g = labeled_graph(transition_matrix(*abs, *dc), *dc, *part);
        RunReport::Det det;
        det.gamma_edges = g.adj.edges();
        const SccResult comps = scc(g.adj);
        for (std::size_t c = 0; c < comps.components.size(); ++c) {
          if (comps.trivial[c]) continue;
          const auto sub = induced_subgraph(g, comps.components[c]);
          auto rr = right_resolve(sub);
          ComponentBound cb;
          cb.cells = sub.size();
          cb.rr_nodes = rr.nodes.size();
          cb.rho = spectral_radius(rr.R);
          cb.log2_rho = cb.rho > 0 ? std::log2(cb.rho) : 0.0;
          det.h_BA = std::max(det.h_BA, cb.log2_rho);
          det.rr_nodes += cb.rr_nodes;
          if (!cfg.output_dir.empty() && cb.rr_nodes <= kMatrixLimit)
            art.small_rr.emplace_back(det.components.size(), std::move(rr));
          det.components.push_back(cb);
        }
        det.sccs = det.components.size();
        det.bound = det.h_BA / p.tau;
        rep.det = std::move(det);
        if (!cfg.output_dir.empty() && g.size() <= kDotCellLimit) art.graph = std::move(g);
        return 0;
      });
      clock.mark("det-bound");
    }
    if (do_unc) {
      in_stage("unc-bound", [&] {
        auto wg = build_weighted_graph(*abs, *dc, *part);
        const UncBound ub = unc_upper_bound(wg);
        RunReport::Unc unc;
        unc.bound = ub.bound;
        unc.edges = ub.edges;
        unc.max_weight = ub.max_weight;
        unc.witness = ub.mcm.cycle;
        unc.witness_mean = ub.mcm.cycle_mean;
        rep.unc = std::move(unc);
        if (!cfg.output_dir.empty() && wg.size() <= kDotCellLimit) art.weighted = std::move(wg);
        return 0;
      });
      clock.mark("unc-bound");
    }
    if (rep.det) rep.bound = rep.det->bound;
    else if (rep.unc) rep.bound = rep.unc->bound;
  }

  if (!cfg.output_dir.empty()) {
    in_stage("artifacts", [&] {
      namespace fs = std::filesystem;
      const fs::path dir(cfg.output_dir);
      fs::create_directories(dir);
      if (ctrl && !ctrl->empty()) {
        if (ctrl->admissible.size() <= kControllerEntryLimit) {
          auto out = open_out(dir / "controller.txt");
          write_controller(out, *ctrl);
        }
        auto csv = open_out(dir / "partition.csv");
        write_partition_csv(csv, *part, *dc);
        if (dc->size() <= kDotCellLimit) {
          auto dot = open_out(dir / "partition.dot");
          write_partition_dot(dot, *part, *dc);
        }
      }
      if (rep.det) {
        DetBound db;
        db.bound = rep.det->bound;
        db.h_BA = rep.det->h_BA;
        db.components = rep.det->components;
        auto csv = open_out(dir / "components.csv");
        write_components_csv(csv, db);
      }
      if (art.graph) {
        auto dot = open_out(dir / "graph.dot");
        write_graph_dot(dot, *art.graph);
      }
      for (const auto& [k, rr] : art.small_rr) {
        auto dot = open_out(dir / ("rr_" + std::to_string(k) + ".dot"));
        write_rr_dot(dot, rr);
        auto txt = open_out(dir / ("R_" + std::to_string(k) + ".txt"));
        write_matrix_brackets(txt, rr.R);
        txt << "\n";
      }
      if (art.weighted) {
        auto dot = open_out(dir / "weighted.dot");
        write_weighted_dot(dot, *art.weighted);
      }
      if (rep.unc) {
        auto csv = open_out(dir / "unc.csv");
        csv << "eta_s,w_star,seconds\n";
        double secs = 0;
        for (const auto& t : rep.timings) secs += t.seconds;
        csv << rep.eta_s[0] << "," << rep.unc->bound << "," << secs << "\n";
      }
      auto js = open_out(dir / "report.json");
      write_json(js, report_to_json(rep));
      return 0;
    });
    clock.mark("artifacts");
    std::ofstream t(std::filesystem::path(cfg.output_dir) / "timings.csv");
    t << "stage,seconds\n";
    for (const auto& s : rep.timings) t << s.stage << "," << s.seconds << "\n";
    t << "total," << rep.wall_seconds << "\n";
  }
  return rep;
}

Json report_to_json(const RunReport& r) {
  Json j;
  j["system"] = r.system;
  j["pipeline"] = r.pipeline;
  j["determinizer"] = r.determinizer;
  j["partition"] = r.partition;
  j["seed"] = r.seed ? Json(*r.seed) : Json(nullptr);
  j["tau"] = r.tau;
  j["eta_s"] = r.eta_s;
  j["eta_i"] = r.eta_i;
  j["time_scale"] = r.time_scale;
  j["theory"] = r.theory ? Json(*r.theory) : Json(nullptr);
  j["status"] = r.status == RunReport::Status::ok ? "ok" : "empty-domain";
  j["q_cells"] = r.q_cells;
  j["inputs"] = r.inputs;
  j["alternations"] = r.alternations;
  j["domain_cells"] = r.domain_cells;
  j["elements"] = r.elements;
  j["distinct_inputs"] = r.distinct_inputs;
  j["bound"] = r.bound ? Json(*r.bound) : Json(nullptr);
  const auto bpt = r.bound_per_time();
  j["bound_per_time"] = bpt ? Json(*bpt) : Json(nullptr);
  if (r.det) {
    Json d;
    d["bound"] = r.det->bound;
    d["h_BA"] = r.det->h_BA;
    d["gamma_edges"] = r.det->gamma_edges;
    d["sccs"] = r.det->sccs;
    d["rr_nodes"] = r.det->rr_nodes;
    Json comps = Json::array();
    for (const auto& c : r.det->components)
      comps.push_back(Json{{"cells", c.cells}, {"rr_nodes", c.rr_nodes}, {"rho", c.rho},
                           {"log2_rho", c.log2_rho}});
    d["components"] = std::move(comps);
    j["det"] = std::move(d);
  }
  if (r.unc) {
    j["unc"] = Json{{"bound", r.unc->bound},
                    {"edges", r.unc->edges},
                    {"max_weight", r.unc->max_weight},
                    {"witness", r.unc->witness},
                    {"witness_mean", r.unc->witness_mean}};
  }
  return j;
}

RunReport report_from_json(const Json& j) {
  RunReport r;
  r.system = j.at("system").get<std::string>();
  r.pipeline = j.at("pipeline").get<std::string>();
  r.determinizer = j.at("determinizer").get<std::string>();
  r.partition = j.at("partition").get<std::string>();
  if (!j.at("seed").is_null()) r.seed = j["seed"].get<std::uint64_t>();
  r.tau = j.at("tau").get<int>();
  r.eta_s = j.at("eta_s").get<std::vector<double>>();
  r.eta_i = j.at("eta_i").get<std::vector<double>>();
  r.time_scale = j.at("time_scale").get<double>();
  if (!j.at("theory").is_null()) r.theory = j["theory"].get<double>();
  const auto status = j.at("status").get<std::string>();
  if (status == "ok") r.status = RunReport::Status::ok;
  else if (status == "empty-domain") r.status = RunReport::Status::empty_domain;
  else throw Error("report: unknown status '" + status + "'");
  r.q_cells = j.at("q_cells").get<std::size_t>();
  r.inputs = j.at("inputs").get<std::size_t>();
  r.alternations = j.at("alternations").get<int>();
  r.domain_cells = j.at("domain_cells").get<std::size_t>();
  r.elements = j.at("elements").get<std::size_t>();
  r.distinct_inputs = j.at("distinct_inputs").get<std::size_t>();
  if (!j.at("bound").is_null()) r.bound = j["bound"].get<double>();
  if (j.contains("det")) {
    const Json& d = j["det"];
    RunReport::Det det;
    det.bound = d.at("bound").get<double>();
    det.h_BA = d.at("h_BA").get<double>();
    det.gamma_edges = d.at("gamma_edges").get<std::size_t>();
    det.sccs = d.at("sccs").get<std::size_t>();
    det.rr_nodes = d.at("rr_nodes").get<std::size_t>();
    for (const auto& c : d.at("components")) {
      ComponentBound cb;
      cb.cells = c.at("cells").get<std::size_t>();
      cb.rr_nodes = c.at("rr_nodes").get<std::size_t>();
      cb.rho = c.at("rho").get<double>();
      cb.log2_rho = c.at("log2_rho").get<double>();
      det.components.push_back(cb);
    }
    r.det = std::move(det);
  }
  if (j.contains("unc")) {
    const Json& u = j["unc"];
    RunReport::Unc unc;
    unc.bound = u.at("bound").get<double>();
    unc.edges = u.at("edges").get<std::size_t>();
    unc.max_weight = u.at("max_weight").get<double>();
    unc.witness = u.at("witness").get<std::vector<std::uint32_t>>();
    unc.witness_mean = u.at("witness_mean").get<double>();
    r.unc = std::move(unc);
  }
  return r;
}

}  // namespace entrobound
