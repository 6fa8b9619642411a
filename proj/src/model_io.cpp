#include "levytail/model_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include "levytail/errors.hpp"

namespace levytail {

namespace {

using nlohmann::json;

[[noreturn]] void parse_error(const std::string& what) { fail(ErrorCode::ModelParse, what); }

const std::map<std::string, std::vector<std::string>>& family_params() {
  static const std::map<std::string, std::vector<std::string>> table = {
      {"none", {}},
      {"exponential", {"rate"}},
      {"pareto", {"alpha", "x_floor"}},
      {"weibull", {"shape", "scale"}},
      {"lognormal", {"mu", "sigma"}},
      {"normal", {"mean", "sd"}},
      {"uniform", {"lower", "upper"}},
      {"semistable", {"x0", "b", "delta", "gamma", "x_lower"}},
      {"two_sided", {"left_weight"}},
  };
  return table;
}

double get(const FamilySpec& s, const std::string& key, double fallback) {
  auto it = s.params.find(key);
  return it == s.params.end() ? fallback : it->second;
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) parse_error(where + " must be a JSON object");
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) parse_error("unknown key '" + item.key() + "' in " + where);
  }
}

double number(const json& j, const std::string& key) {
  if (!j.is_number()) parse_error("'" + key + "' must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) parse_error("'" + key + "' must be finite");
  return v;
}

FamilySpec parse_family(const json& j, const std::string& where) {
  FamilySpec f;
  if (!j.contains("family")) parse_error(where + ": missing 'family'");
  if (!j["family"].is_string()) parse_error(where + ": 'family' must be a string");
  f.name = j["family"].get<std::string>();
  auto it = family_params().find(f.name);
  if (it == family_params().end()) parse_error(where + ": unknown family '" + f.name + "'");
  if (j.contains("params")) {
    const json& p = j["params"];
    check_keys(p, std::set<std::string>(it->second.begin(), it->second.end()), where + ".params");
    for (const auto& item : p.items()) f.params[item.key()] = number(item.value(), item.key());
  }
  if (f.name == "two_sided") {
    if (!j.contains("left") || !j.contains("right")) parse_error(where + ": two_sided needs 'left' and 'right'");
    f.left = std::make_shared<FamilySpec>(parse_family(j["left"], where + ".left"));
    f.right = std::make_shared<FamilySpec>(parse_family(j["right"], where + ".right"));
  } else if (j.contains("left") || j.contains("right")) {
    parse_error(where + ": 'left'/'right' are only valid for two_sided");
  }
  return f;
}

json family_json(const FamilySpec& f) {
  json j = {{"family", f.name}};
  json p = json::object();
  for (const auto& [k, v] : f.params) p[k] = v;
  j["params"] = p;
  if (f.left) j["left"] = family_json(*f.left);
  if (f.right) j["right"] = family_json(*f.right);
  return j;
}

}  // namespace

JumpFamily make_family(const FamilySpec& s) {
  const std::string& n = s.name;
  if (n == "none") return JumpFamily(NoJumps{});
  if (n == "exponential") return JumpFamily(Exponential{get(s, "rate", 1.0)});
  if (n == "pareto") return JumpFamily(Pareto{get(s, "alpha", 1.5), get(s, "x_floor", 1.0)});
  if (n == "weibull") return JumpFamily(Weibull{get(s, "shape", 0.5), get(s, "scale", 1.0)});
  if (n == "lognormal") return JumpFamily(LogNormal{get(s, "mu", 0.0), get(s, "sigma", 1.0)});
  if (n == "normal") return JumpFamily(Normal{get(s, "mean", 0.0), get(s, "sd", 1.0)});
  if (n == "uniform") return JumpFamily(Uniform{get(s, "lower", 0.0), get(s, "upper", 1.0)});
  if (n == "semistable") {
    Semistable d;
    return JumpFamily(Semistable{get(s, "x0", d.x0), get(s, "b", d.b), get(s, "delta", d.delta),
                                 get(s, "gamma", d.gamma), get(s, "x_lower", d.x_lower)});
  }
  if (n == "two_sided") {
    if (!s.left || !s.right) fail(ErrorCode::InvalidParams, "two_sided needs left and right components");
    return JumpFamily(TwoSidedMixture{std::make_shared<const JumpFamily>(make_family(*s.left)),
                                      std::make_shared<const JumpFamily>(make_family(*s.right)),
                                      get(s, "left_weight", 0.5)});
  }
  fail(ErrorCode::InvalidParams, "unknown family '" + n + "'");
}

LevyTriplet make_triplet(const ModelSpec& m) {
  LevyTriplet t;
  t.drift = m.drift;
  t.gaussian = m.gaussian;
  t.jumps.family = make_family(m.family);
  t.jumps.total_mass = m.family.name == "none" ? 0.0 : m.total_mass;
  if (m.cutoff_eps) t.jumps.cutoff_eps = *m.cutoff_eps;
  t.validate();
  return t;
}

ModelSpec with_parameter(const ModelSpec& m, const std::string& name, double value) {
  ModelSpec out = m;
  if (name == "total_mass") {
    out.total_mass = value;
  } else if (name == "drift") {
    out.drift = value;
  } else if (name == "gaussian") {
    out.gaussian = value;
  } else {
    const auto& allowed = family_params().at(m.family.name);
    if (std::find(allowed.begin(), allowed.end(), name) == allowed.end())
      fail(ErrorCode::InvalidParams, "family '" + m.family.name + "' has no parameter '" + name + "'");
    out.family.params[name] = value;
  }
  return out;
}

ModelSpec parse_model(const json& j) {
  check_keys(j, {"family", "params", "left", "right", "total_mass", "drift", "gaussian", "grid", "cutoff_eps", "fit"},
             "model");
  ModelSpec m;
  m.family = parse_family(j, "model");
  if (j.contains("total_mass")) {
    const json& t = j["total_mass"];
    if (t.is_string() && (t.get<std::string>() == "inf" || t.get<std::string>() == "infinite")) {
      m.total_mass = kInf;
    } else {
      m.total_mass = number(t, "total_mass");
    }
  }
  if (j.contains("drift")) m.drift = number(j["drift"], "drift");
  if (j.contains("gaussian")) m.gaussian = number(j["gaussian"], "gaussian");
  if (j.contains("cutoff_eps")) m.cutoff_eps = number(j["cutoff_eps"], "cutoff_eps");
  if (j.contains("grid")) {
    const json& g = j["grid"];
    check_keys(g, {"x_min", "x_max", "dx"}, "grid");
    for (const char* k : {"x_min", "x_max", "dx"})
      if (!g.contains(k)) parse_error(std::string("grid: missing '") + k + "'");
    GridParams gp{number(g["x_min"], "x_min"), number(g["x_max"], "x_max"), number(g["dx"], "dx")};
    try {
      gp.validate();
    } catch (const Error& e) {
      parse_error(std::string("grid: ") + e.what());
    }
    m.grid = gp;
  }
  if (j.contains("fit")) {
    const json& f = j["fit"];
    check_keys(f, {"parameter", "lower", "upper"}, "fit");
    if (!f.contains("parameter") || !f["parameter"].is_string()) parse_error("fit: 'parameter' must be a string");
    if (!f.contains("lower") || !f.contains("upper")) parse_error("fit: missing 'lower' or 'upper'");
    FitSpec fs{f["parameter"].get<std::string>(), number(f["lower"], "lower"), number(f["upper"], "upper")};
    if (!(fs.lower <= fs.upper)) parse_error("fit: lower must not exceed upper");
    m.fit = fs;
  }
  try {
    make_triplet(m);
    if (m.fit) make_triplet(with_parameter(m, m.fit->parameter, m.fit->lower));
  } catch (const Error& e) {
    parse_error(std::string("invalid model: ") + e.what());
  }
  return m;
}

ModelSpec load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) parse_error("cannot open model file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    parse_error("malformed JSON in '" + path + "': " + e.what());
  }
  return parse_model(j);
}

json to_json(const ModelSpec& m) {
  json j = family_json(m.family);
  if (std::isinf(m.total_mass))
    j["total_mass"] = "inf";
  else
    j["total_mass"] = m.total_mass;
  j["drift"] = m.drift;
  j["gaussian"] = m.gaussian;
  if (m.cutoff_eps) j["cutoff_eps"] = *m.cutoff_eps;
  if (m.grid) j["grid"] = {{"x_min", m.grid->x_min}, {"x_max", m.grid->x_max}, {"dx", m.grid->dx}};
  if (m.fit) j["fit"] = {{"parameter", m.fit->parameter}, {"lower", m.fit->lower}, {"upper", m.fit->upper}};
  return j;
}

}  // namespace levytail
