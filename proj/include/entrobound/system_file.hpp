#pragma once

#include <iosfwd>
#include <json.hpp>
#include <string>

#include "entrobound/dynamics.hpp"

namespace entrobound {

using Json = nlohmann::ordered_json;

/// Problem <-> JSON; the schema is documented in README.md.
Problem problem_from_json(const Json& j);
Json problem_to_json(const Problem& p);

SystemDef system_from_json(const Json& j);
Json system_to_json(const SystemDef& s);

/// Pretty JSON with arrays of scalars kept on one line.
void write_json(std::ostream& os, const Json& j);

Problem load_problem_file(const std::string& path);
void save_problem_file(const std::string& path, const Problem& p);

/// A builtin name, or a path to a system file when the argument names an existing file
/// or ends in ".json".
Problem resolve_problem(const std::string& name_or_path, const BuiltinParams& params = {});

}  // namespace entrobound
