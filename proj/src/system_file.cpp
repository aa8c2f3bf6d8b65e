#include "entrobound/system_file.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

namespace entrobound {

namespace {

const Json& need(const Json& j, const char* key) {
  if (!j.contains(key)) throw Error(std::string("system file: missing field '") + key + "'");
  return j.at(key);
}

HyperRect rect_from(const Json& j) {
  return HyperRect(j.at("lb").get<std::vector<double>>(), j.at("ub").get<std::vector<double>>());
}

Json rect_to(const HyperRect& r) { return Json{{"lb", r.lb()}, {"ub", r.ub()}}; }

Term term_from(const Json& j) {
  Term t;
  t.coef = need(j, "coef").get<double>();
  if (j.contains("x")) t.x_pow = j["x"].get<std::vector<int>>();
  if (j.contains("u")) t.u_pow = j["u"].get<std::vector<int>>();
  if (j.contains("sin")) t.sin_pow = j["sin"].get<std::vector<int>>();
  if (j.contains("cos")) t.cos_pow = j["cos"].get<std::vector<int>>();
  return t;
}

Json term_to(const Term& t) {
  Json j{{"coef", t.coef}};
  if (!t.x_pow.empty()) j["x"] = t.x_pow;
  if (!t.u_pow.empty()) j["u"] = t.u_pow;
  if (!t.sin_pow.empty()) j["sin"] = t.sin_pow;
  if (!t.cos_pow.empty()) j["cos"] = t.cos_pow;
  return j;
}

void dump_compact(std::ostream& os, const Json& j, int indent) {
  const std::string pad(indent + 2, ' ');
  auto nested = [](const Json& v) { return v.is_object() || v.is_array(); };
  if (j.is_object()) {
    os << "{\n";
    std::size_t k = 0;
    for (auto it = j.begin(); it != j.end(); ++it, ++k) {
      os << pad << Json(it.key()).dump() << ": ";
      dump_compact(os, it.value(), indent + 2);
      os << (k + 1 < j.size() ? ",\n" : "\n");
    }
    os << std::string(indent, ' ') << "}";
  } else if (j.is_array() && std::any_of(j.begin(), j.end(), nested)) {
    os << "[\n";
    for (std::size_t k = 0; k < j.size(); ++k) {
      os << pad;
      const bool flat_object = j[k].is_object() && std::none_of(j[k].begin(), j[k].end(), [&](const Json& v) {
        return v.is_object() || (v.is_array() && std::any_of(v.begin(), v.end(), nested));
      });
      if (!flat_object && nested(j[k]) && std::any_of(j[k].begin(), j[k].end(), nested)) {
        dump_compact(os, j[k], indent + 2);
      } else {
        os << j[k].dump();
      }
      os << (k + 1 < j.size() ? ",\n" : "\n");
    }
    os << std::string(indent, ' ') << "]";
  } else {
    os << j.dump();
  }
}

}  // namespace

void write_json(std::ostream& os, const Json& j) {
  dump_compact(os, j, 0);
  os << "\n";
}

SystemDef system_from_json(const Json& j) {
  SystemDef s;
  s.name = j.value("name", std::string("unnamed"));
  s.kind = system_kind_from_string(need(j, "kind").get<std::string>());
  s.state_dim = need(j, "state_dim").get<std::size_t>();
  s.input_dim = need(j, "input_dim").get<std::size_t>();
  if (s.kind == SystemKind::affine) {
    s.A = Matrix::from_rows(need(j, "A").get<std::vector<std::vector<double>>>());
    s.B = Matrix::from_rows(need(j, "B").get<std::vector<std::vector<double>>>());
  } else {
    for (const auto& comp : need(j, "map")) {
      Expr e;
      for (const auto& t : comp) e.push_back(term_from(t));
      s.map.push_back(std::move(e));
    }
  }
  if (s.kind == SystemKind::sampled_ode) {
    s.sampling_time = need(j, "T_s").get<double>();
    s.growth_bound = need(j, "L").get<double>();
  }
  if (j.contains("W")) s.disturbance = rect_from(j["W"]);
  s.validate();
  return s;
}

Json system_to_json(const SystemDef& s) {
  Json j;
  j["name"] = s.name;
  j["kind"] = std::string(to_string(s.kind));
  j["state_dim"] = s.state_dim;
  j["input_dim"] = s.input_dim;
  if (s.kind == SystemKind::affine) {
    j["A"] = s.A.to_rows();
    j["B"] = s.B.to_rows();
  } else {
    Json map = Json::array();
    for (const auto& e : s.map) {
      Json comp = Json::array();
      for (const auto& t : e) comp.push_back(term_to(t));
      map.push_back(std::move(comp));
    }
    j["map"] = std::move(map);
  }
  if (s.kind == SystemKind::sampled_ode) {
    j["T_s"] = s.sampling_time;
    j["L"] = s.growth_bound;
  }
  if (s.disturbance) j["W"] = rect_to(*s.disturbance);
  return j;
}

Problem problem_from_json(const Json& j) {
  Problem p;
  p.system = system_from_json(j);
  if (j.contains("reversed")) p.reversed = system_from_json(j["reversed"]);
  const Json& q = need(j, "Q");
  if (q.contains("H")) {
    p.q = Polytope(q["H"].get<std::vector<std::vector<double>>>(), q.at("b").get<std::vector<double>>());
  } else {
    p.q = rect_from(q);
  }
  p.state_box = j.contains("Q_X") ? rect_from(j["Q_X"]) : std::get<HyperRect>(p.q);
  const std::string grid = j.value("grid", std::string("lattice"));
  if (grid == "lattice") p.alignment = GridAlignment::lattice;
  else if (grid == "tile") p.alignment = GridAlignment::tile;
  else throw Error("system file: grid must be 'lattice' or 'tile'");
  p.input_box = rect_from(need(j, "U"));
  p.eta_s = need(j, "eta_s").get<std::vector<double>>();
  p.eta_i = need(j, "eta_i").get<std::vector<double>>();
  p.tau = j.value("tau", 1);
  if (j.contains("theory")) p.theory = j["theory"].get<double>();
  p.theory_note = j.value("theory_note", std::string());
  if (p.eta_s.size() != p.system.state_dim || p.state_box.dim() != p.system.state_dim)
    throw Error("system file: state dimension mismatch");
  if (p.eta_i.size() != p.system.input_dim || p.input_box.dim() != p.system.input_dim)
    throw Error("system file: input dimension mismatch");
  return p;
}

Json problem_to_json(const Problem& p) {
  Json j = system_to_json(p.system);
  if (const auto* r = std::get_if<HyperRect>(&p.q)) {
    j["Q"] = rect_to(*r);
  } else {
    const auto& poly = std::get<Polytope>(p.q);
    j["Q"] = Json{{"H", poly.H}, {"b", poly.b}};
  }
  j["Q_X"] = rect_to(p.state_box);
  j["grid"] = p.alignment == GridAlignment::lattice ? "lattice" : "tile";
  j["U"] = rect_to(p.input_box);
  j["eta_s"] = p.eta_s;
  j["eta_i"] = p.eta_i;
  j["tau"] = p.tau;
  if (p.reversed) j["reversed"] = system_to_json(*p.reversed);
  if (p.theory) j["theory"] = *p.theory;
  if (!p.theory_note.empty()) j["theory_note"] = p.theory_note;
  return j;
}

Problem load_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open system file '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error("system file '" + path + "': " + e.what());
  }
  try {
    return problem_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw Error("system file '" + path + "': " + e.what());
  }
}

void save_problem_file(const std::string& path, const Problem& p) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  write_json(out, problem_to_json(p));
}

Problem resolve_problem(const std::string& name_or_path, const BuiltinParams& params) {
  const bool is_file = name_or_path.ends_with(".json") || std::filesystem::is_regular_file(name_or_path);
  if (is_file) return load_problem_file(name_or_path);
  return builtin_system(name_or_path, params);
}

}  // namespace entrobound
