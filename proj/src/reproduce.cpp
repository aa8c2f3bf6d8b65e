#include "entrobound/reproduce.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "entrobound/pipeline.hpp"
#include "entrobound/reference_data.hpp"

namespace entrobound {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::vector<ReferenceValue> parse_reference(std::string_view text) {
  std::vector<ReferenceValue> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto f = split(line);
    if (f.size() != 7) throw Error("reference_values.csv: bad line '" + line + "'");
    ReferenceValue r;
    r.table = f[0];
    r.setting = f[1];
    r.param = f[2];
    r.value = std::stod(f[3]);
    r.pipeline = f[4];
    r.reference = std::stod(f[5]);
    if (!f[6].empty()) r.theory = std::stod(f[6]);
    out.push_back(std::move(r));
  }
  return out;
}

struct Case {
  std::string table;
  std::string setting;
  std::string param;
  double value = 0;
  RunConfig cfg;
  bool gated = false;
};

RunConfig pendulum_cfg(double rho, double b, double ts, double eta) {
  RunConfig c;
  c.system = "pendulum";
  c.params.rho = rho;
  c.params.b = b;
  c.params.sampling = ts;
  c.eta_s = std::vector<double>{eta};
  return c;
}

std::vector<Case> cases(std::string_view table, bool full) {
  std::vector<Case> out;
  if (table == "ex1") {
    RunConfig c;
    c.system = "example1";
    out.push_back({"ex1", "", "tau", 1, c});
  } else if (table == "lin-tau") {
    for (int tau : {1, 2, 3}) {
      RunConfig c;
      c.system = "linear2d";
      c.tau = tau;
      out.push_back({"lin-tau", "", "tau", double(tau), c});
    }
  } else if (table == "pend-Ts") {
    for (double ts : {0.8, 0.5, 0.1, 0.01, 0.001})
      out.push_back({"pend-Ts", "rho=1;b=1", "T_s", ts, pendulum_cfg(1, 1, ts, full ? 1e-6 : 1e-5)});
    for (double ts : {0.11, 0.1, 0.01, 0.001, 0.0001})
      out.push_back({"pend-Ts", "rho=50;b=10", "T_s", ts, pendulum_cfg(50, 10, ts, 1e-6)});
  } else if (table == "pend-tau") {
    for (int tau : {1, 2, 3, 4}) {
      RunConfig c = pendulum_cfg(1, 1, 0.01, 1e-4);
      c.tau = tau;
      out.push_back({"pend-tau", "rho=1;b=1;T_s=0.01", "tau", double(tau), c, tau == 4});
    }
  } else if (table == "henon") {
    // separate runs, so a det failure still leaves the unc row
    for (auto pipe : {PipelineKind::unc, PipelineKind::det}) {
      RunConfig c;
      c.system = "henon";
      c.pipeline = pipe;
      out.push_back({"henon", "epsilon=0.08", "eta_s", 0.009, c, true});
    }
  } else if (table == "unc-eta") {
    for (double eta : {0.2, 0.1, 0.09, 0.06, 0.03}) {
      RunConfig c;
      c.system = "uncertain-linear";
      c.pipeline = PipelineKind::unc;
      c.determinizer = Determinizer::minsucc;
      c.partition = PartitionMode::by_cell;
      c.eta_s = std::vector<double>{eta};
      out.push_back({"unc-eta", "", "eta_s", eta, c});
    }
  } else {
    throw Error("unknown table '" + std::string(table) + "'");
  }
  return out;
}

void put(std::ostream& os, const std::optional<double>& v) {
  if (!v) return;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", *v);
  os << buf;
}

}  // namespace

const std::vector<ReferenceValue>& reference_values() {
  static const std::vector<ReferenceValue> values = parse_reference(generated::kReferenceCsv);
  return values;
}

std::optional<ReferenceValue> find_reference(std::string_view table, std::string_view setting,
                                             double value, std::string_view pipeline) {
  for (const auto& r : reference_values()) {
    if (r.table == table && r.setting == setting && r.pipeline == pipeline &&
        std::abs(r.value - value) <= 1e-12 * std::max(1.0, std::abs(value)))
      return r;
  }
  return std::nullopt;
}

std::vector<std::string> reproduce_tables() {
  return {"ex1", "lin-tau", "pend-Ts", "pend-tau", "henon", "unc-eta"};
}

std::vector<ReproRow> reproduce(std::string_view table, const ReproOptions& opts) {
  std::vector<ReproRow> rows;
  for (const Case& c : cases(table, opts.full_scale)) {
    std::vector<std::string> pipes;
    if (c.cfg.pipeline == PipelineKind::both) pipes = {"det", "unc"};
    else pipes = {std::string(to_string(c.cfg.pipeline))};

    std::vector<ReproRow> group;
    for (const auto& pipe : pipes) {
      ReproRow r;
      r.table = c.table;
      r.setting = c.setting;
      r.param = c.param;
      r.value = c.value;
      r.pipeline = pipe;
      r.tau = c.cfg.tau.value_or(1);
      if (const auto ref = find_reference(c.table, c.setting, c.value, pipe)) {
        r.reference = ref->reference;
        r.theory = ref->theory;
      }
      group.push_back(std::move(r));
    }

    std::optional<Problem> problem;
    try {
      problem = configure_problem(c.cfg);
      for (auto& r : group) {
        r.eta_s = problem->eta_s[0];
        r.tau = problem->tau;
      }
    } catch (const Error& e) {
      for (auto& r : group) r.status = std::string("error: ") + e.what();
    }
    if (problem && c.gated && !opts.full_scale) {
      for (auto& r : group) r.status = "gated";
    } else if (problem) {
      const auto t0 = std::chrono::steady_clock::now();
      try {
        const RunReport rep = run(c.cfg, *problem);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        for (auto& r : group) {
          r.seconds = secs;
          r.domain = rep.domain_cells;
          r.elements = rep.elements;
          if (rep.status != RunReport::Status::ok) {
            r.status = "empty-domain";
            continue;
          }
          r.status = "ok";
          const double per = rep.time_scale;
          if (r.pipeline == "det" && rep.det) {
            r.bound = rep.det->bound / per;
            r.ceiling = std::log2(double(rep.elements)) / rep.tau / per;
          } else if (r.pipeline == "unc" && rep.unc) {
            r.bound = rep.unc->bound / per;
            r.ceiling = std::log2(double(rep.elements)) / per;
          }
        }
      } catch (const Error& e) {
        for (auto& r : group) r.status = std::string("error: ") + e.what();
      }
    }
    for (auto& r : group) rows.push_back(std::move(r));
  }
  return rows;
}

void write_repro_csv(std::ostream& os, const std::vector<ReproRow>& rows) {
  os << "table,setting,param,value,pipeline,eta_s,tau,status,domain,elements,bound,ceiling,"
        "reference,theory,seconds\n";
  for (const auto& r : rows) {
    os << r.table << "," << r.setting << "," << r.param << ",";
    put(os, r.value);
    os << "," << r.pipeline << ",";
    put(os, r.eta_s);
    std::string status = r.status;
    std::replace(status.begin(), status.end(), ',', ';');
    os << "," << r.tau << "," << status << "," << r.domain << "," << r.elements << ",";
    put(os, r.bound);
    os << ",";
    put(os, r.ceiling);
    os << ",";
    put(os, r.reference);
    os << ",";
    put(os, r.theory);
    os << ",";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", r.seconds);
    os << buf << "\n";
  }
}

}  // namespace entrobound
