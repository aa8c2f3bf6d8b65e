#pragma once

#include <optional>
#include <string>
#include <vector>

#include "entrobound/determinization.hpp"
#include "entrobound/entropy_unc.hpp"
#include "entrobound/system_file.hpp"

namespace entrobound {

enum class PipelineKind { det, unc, both };

std::string_view to_string(PipelineKind k);
PipelineKind pipeline_from_string(std::string_view s);

struct RunConfig {
  std::string system = "example1";  ///< builtin name or system file path
  PipelineKind pipeline = PipelineKind::det;
  std::optional<std::vector<double>> eta_s;
  std::optional<std::vector<double>> eta_i;
  std::optional<int> tau;
  Determinizer determinizer = Determinizer::maxfreq;
  PartitionMode partition = PartitionMode::by_input;
  std::optional<std::uint64_t> seed;
  std::string output_dir;  ///< no artifacts when empty
  BuiltinParams params;
  /// Alternate with the time-reversed system when the problem has one.
  bool forward_backward = true;
  std::uint64_t max_sequences = 1'000'000;
};

struct StageTime {
  std::string stage;
  double seconds = 0;
};

struct RunReport {
  enum class Status { ok, empty_domain };

  std::string system;
  std::string pipeline;
  std::string determinizer;
  std::string partition;
  std::optional<std::uint64_t> seed;
  int tau = 1;
  std::vector<double> eta_s;
  std::vector<double> eta_i;
  double time_scale = 1;
  std::optional<double> theory;

  Status status = Status::ok;
  std::size_t q_cells = 0;
  std::size_t inputs = 0;
  int alternations = 0;
  std::size_t domain_cells = 0;  ///< |B|
  std::size_t elements = 0;      ///< |A|
  std::size_t distinct_inputs = 0;

  std::optional<double> bound;  ///< primary bound per step: det when computed, else unc

  struct Det {
    double bound = 0;  ///< h(B,A) / tau
    double h_BA = 0;
    std::size_t gamma_edges = 0;
    std::size_t sccs = 0;
    std::size_t rr_nodes = 0;
    std::vector<ComponentBound> components;
  };
  struct Unc {
    double bound = 0;  ///< w*_m
    std::size_t edges = 0;
    double max_weight = 0;
    std::vector<std::uint32_t> witness;
    double witness_mean = 0;
  };
  std::optional<Det> det;
  std::optional<Unc> unc;

  std::vector<StageTime> timings;  ///< not serialized
  double wall_seconds = 0;         ///< not serialized

  /// Primary bound per time unit (bound / T_s for sampled systems).
  std::optional<double> bound_per_time() const;
  int exit_code() const { return status == Status::ok ? 0 : 2; }
};

Json report_to_json(const RunReport& r);
RunReport report_from_json(const Json& j);

/// Grid and tau overrides of the config, without pipeline checks.
Problem apply_overrides(Problem p, const RunConfig& cfg);

/// Applies the config overrides to a resolved problem and checks the pipeline constraints.
Problem configure_problem(const RunConfig& cfg);

/// Abstraction, synthesis, determinization, partition and bounds, in that order.
/// Writes artifacts to cfg.output_dir when it is set.
RunReport run(const RunConfig& cfg);
RunReport run(const RunConfig& cfg, const Problem& problem);

}  // namespace entrobound
