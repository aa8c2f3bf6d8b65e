#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace entrobound {

/// One line of data/reference_values.csv.
struct ReferenceValue {
  std::string table;
  std::string setting;
  std::string param;
  double value = 0;
  std::string pipeline;
  double reference = 0;
  std::optional<double> theory;
};

const std::vector<ReferenceValue>& reference_values();
std::optional<ReferenceValue> find_reference(std::string_view table, std::string_view setting,
                                             double value, std::string_view pipeline);

struct ReproRow {
  std::string table;
  std::string setting;
  std::string param;
  double value = 0;
  std::string pipeline;
  double eta_s = 0;
  int tau = 1;
  std::string status;  ///< ok, empty-domain, gated, or "error: ..."
  std::size_t domain = 0;
  std::size_t elements = 0;
  std::optional<double> bound;    ///< per time unit
  std::optional<double> ceiling;  ///< log2|A| / (tau T_s)
  std::optional<double> reference;
  std::optional<double> theory;
  double seconds = 0;
};

struct ReproOptions {
  bool full_scale = false;
};

std::vector<std::string> reproduce_tables();
std::vector<ReproRow> reproduce(std::string_view table, const ReproOptions& opts = {});

void write_repro_csv(std::ostream& os, const std::vector<ReproRow>& rows);

}  // namespace entrobound
