#include "kaplan/pipeline/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "kaplan/error.hpp"
#include "kaplan/pipeline/toml_lite.hpp"

namespace kaplan::pipeline {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::ConfigInvalid, msg); }

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) invalid(where + " must be a table");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items()) {
    if (!ok.count(k)) invalid("unknown key '" + k + "' in " + where);
  }
}

template <class T>
T get(const json& j, const char* key, const std::string& where, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    invalid("bad type for '" + std::string(key) + "' in " + where);
  }
}

std::optional<double> get_opt(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  if (!j.at(key).is_number()) invalid("'" + std::string(key) + "' in " + where + " must be a number");
  return j.at(key).get<double>();
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

RunConfig RunConfig::from_json(const json& j, const std::filesystem::path& base_dir) {
  check_keys(j, "config", {"family", "metric", "nonlinearity", "datum", "criterion", "evolution", "output", "sweep"});
  RunConfig c;
  c.base_dir = base_dir;

  if (!j.contains("family")) invalid("config needs a [family] table");
  const json& fam = j["family"];
  check_keys(fam, "family",
             {"kind", "branching", "depth", "representation", "dim", "radius", "graph_file", "origin", "declared"});
  FamilySpec& f = c.family;
  f.kind = get<std::string>(fam, "kind", "family", f.kind);
  if (f.kind == "tree") {
    f.branching = get<json>(fam, "branching", "family", f.branching);
    f.depth = get<int>(fam, "depth", "family", f.depth);
    f.representation = get<std::string>(fam, "representation", "family", f.representation);
    if (f.representation != "full" && f.representation != "shell_quotient") {
      invalid("family.representation must be 'full' or 'shell_quotient'");
    }
    if (f.depth < 1) invalid("family.depth must be >= 1");
    try {
      (void)BranchingFunction::from_json(f.branching);
    } catch (const Error& e) {
      invalid(std::string("family.branching: ") + e.what());
    }
  } else if (f.kind == "lattice") {
    f.dim = get<int>(fam, "dim", "family", f.dim);
    f.radius = get<int>(fam, "radius", "family", f.radius);
    if (f.dim < 1 || f.radius < 1) invalid("lattice dim and radius must be >= 1");
  } else if (f.kind == "custom") {
    f.graph_file = get<std::string>(fam, "graph_file", "family", "");
    f.origin = get<Vertex>(fam, "origin", "family", 0);
    if (f.graph_file.empty()) invalid("custom family needs graph_file");
    if (!std::filesystem::exists(base_dir / f.graph_file)) invalid("graph_file '" + f.graph_file + "' does not exist");
  } else {
    invalid("family.kind must be tree, lattice or custom");
  }
  f.declared = get<json>(fam, "declared", "family", json::object());
  check_keys(f.declared, "family.declared", {"growth", "sup_outer_degree"});

  if (j.contains("metric")) {
    c.metric = get<std::string>(j, "metric", "config", "");
    try {
      (void)metric_kind_from_string(*c.metric);
    } catch (const Error& e) {
      invalid(e.what());
    }
  }

  c.nonlinearity = get<json>(j, "nonlinearity", "config", c.nonlinearity);
  try {
    (void)Nonlinearity::from_json(c.nonlinearity);
  } catch (const Error& e) {
    invalid(std::string("nonlinearity: ") + e.what());
  }

  if (j.contains("datum")) {
    const json& d = j["datum"];
    check_keys(d, "datum", {"kind", "amplitude", "vertex", "width", "values", "sup_outside"});
    DatumSpec& ds = c.datum;
    ds.kind = get<std::string>(d, "kind", "datum", ds.kind);
    ds.amplitude = get<double>(d, "amplitude", "datum", ds.amplitude);
    if (d.contains("vertex")) ds.vertex = get<Vertex>(d, "vertex", "datum", 0);
    ds.width = get<double>(d, "width", "datum", ds.width);
    ds.values = get<std::vector<double>>(d, "values", "datum", {});
    ds.sup_outside = get<double>(d, "sup_outside", "datum", 0.0);
    if (ds.kind != "delta" && ds.kind != "gaussian" && ds.kind != "list") {
      invalid("datum.kind must be delta, gaussian or list");
    }
    if (!(ds.amplitude >= 0.0)) invalid("datum.amplitude must be >= 0");
    if (ds.kind == "gaussian" && !(ds.width > 0.0)) invalid("datum.width must be positive");
    if (ds.kind == "list" && ds.values.empty()) invalid("datum.values must be nonempty");
    for (double v : ds.values) {
      if (!(v >= 0.0)) invalid("datum.values must be >= 0");
    }
    if (!(ds.sup_outside >= 0.0)) invalid("datum.sup_outside must be >= 0");
  }

  if (j.contains("criterion")) {
    const json& cr = j["criterion"];
    check_keys(cr, "criterion", {"theorem", "a", "k", "lambda", "R", "delta", "lambda_sweep", "barrier_file"});
    CriterionSpec& cs = c.criterion;
    cs.theorem = get<std::string>(cr, "theorem", "criterion", cs.theorem);
    try {
      (void)theorem_tag_from_string(cs.theorem);
    } catch (const Error& e) {
      invalid(e.what());
    }
    cs.a = get_opt(cr, "a", "criterion");
    cs.k = get_opt(cr, "k", "criterion");
    cs.lambda = get_opt(cr, "lambda", "criterion");
    cs.R = get_opt(cr, "R", "criterion");
    cs.delta = get<double>(cr, "delta", "criterion", cs.delta);
    cs.lambda_sweep = get<int>(cr, "lambda_sweep", "criterion", 0);
    cs.barrier_file = get<std::string>(cr, "barrier_file", "criterion", "");
    if (cs.theorem == "general") {
      if (cs.barrier_file.empty()) invalid("theorem 'general' needs criterion.barrier_file");
      if (!std::filesystem::exists(base_dir / cs.barrier_file)) {
        invalid("barrier_file '" + cs.barrier_file + "' does not exist");
      }
    }
  }

  if (j.contains("evolution")) {
    try {
      c.evolution = EvolutionConfig::from_json(j["evolution"]);
    } catch (const Error& e) {
      invalid(std::string("evolution: ") + e.what());
    } catch (const json::exception& e) {
      invalid(std::string("evolution: ") + e.what());
    }
  }

  if (j.contains("output")) {
    check_keys(j["output"], "output", {"dir"});
    c.out_dir = get<std::string>(j["output"], "dir", "output", c.out_dir);
  }

  if (j.contains("sweep")) {
    const json& s = j["sweep"];
    check_keys(s, "sweep", {"amplitude", "k", "a", "p"});
    for (const auto& [k, v] : s.items()) {
      std::vector<double> axis;
      try {
        axis = v.get<std::vector<double>>();
      } catch (const json::exception&) {
        invalid("sweep." + k + " must be a list of numbers");
      }
      if (axis.empty()) invalid("sweep." + k + " must be nonempty");
      if (k == "amplitude") {
        for (double a : axis) {
          if (!(a >= 0.0)) invalid("sweep amplitudes must be >= 0");
        }
      }
      c.sweep[k] = std::move(axis);
    }
  }
  return c;
}

json RunConfig::to_json() const {
  json fam = {{"kind", family.kind}};
  if (family.kind == "tree") {
    fam["branching"] = family.branching;
    fam["depth"] = family.depth;
    fam["representation"] = family.representation;
  } else if (family.kind == "lattice") {
    fam["dim"] = family.dim;
    fam["radius"] = family.radius;
  } else {
    fam["graph_file"] = family.graph_file;
    fam["origin"] = family.origin;
  }
  if (!family.declared.empty()) fam["declared"] = family.declared;

  json datum_j = {{"kind", datum.kind}, {"amplitude", datum.amplitude}, {"sup_outside", datum.sup_outside}};
  if (datum.vertex) datum_j["vertex"] = *datum.vertex;
  if (datum.kind == "gaussian") datum_j["width"] = datum.width;
  if (datum.kind == "list") datum_j["values"] = datum.values;

  json crit = {{"theorem", criterion.theorem},
               {"a", opt_json(criterion.a)},
               {"k", opt_json(criterion.k)},
               {"lambda", opt_json(criterion.lambda)},
               {"R", opt_json(criterion.R)},
               {"delta", criterion.delta},
               {"lambda_sweep", criterion.lambda_sweep}};
  if (!criterion.barrier_file.empty()) crit["barrier_file"] = criterion.barrier_file;

  json j = {{"family", fam},
            {"nonlinearity", nonlinearity},
            {"datum", datum_j},
            {"criterion", crit},
            {"evolution", evolution.to_json()},
            {"output", {{"dir", out_dir}}}};
  if (metric) j["metric"] = *metric;
  if (!sweep.empty()) j["sweep"] = sweep;
  return j;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  json j;
  const auto ext = path.extension().string();
  if (ext == ".toml") {
    j = toml_lite::parse(text);
  } else if (ext == ".json") {
    try {
      j = json::parse(text);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ConfigInvalid, std::string("config JSON: ") + e.what());
    }
  } else {
    throw Error(ErrorCode::ConfigInvalid, "config must end in .toml or .json");
  }
  return RunConfig::from_json(j, path.parent_path());
}

void save_config(const RunConfig& cfg, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  out << cfg.to_json().dump(2) << '\n';
}

}  // namespace kaplan::pipeline
