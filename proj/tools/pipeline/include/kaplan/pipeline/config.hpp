#pragma once

// Run configuration: one canonical schema read from TOML or JSON.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kaplan/criteria.hpp"
#include "kaplan/simulator.hpp"

namespace kaplan::pipeline {

struct FamilySpec {
  std::string kind = "tree";  // tree | lattice | custom
  // tree
  nlohmann::json branching = {{"kind", "constant"}, {"b", 2}};
  int depth = 10;
  std::string representation = "full";  // full | shell_quotient
  // lattice
  int dim = 1;
  int radius = 10;
  // custom
  std::string graph_file;
  Vertex origin = 0;
  nlohmann::json declared = nlohmann::json::object();  // declared_growth, declared_sup_outer
};

struct DatumSpec {
  std::string kind = "delta";  // delta | gaussian | list
  double amplitude = 1.0;
  std::optional<Vertex> vertex;  // delta: defaults to the centre
  double width = 1.0;            // gaussian: A exp(-(d/width)^2)
  std::vector<double> values;    // list: amplitude * values
  double sup_outside = 0.0;
};

struct CriterionSpec {
  std::string theorem = "tree";
  std::optional<double> a;
  std::optional<double> k;
  std::optional<double> lambda;
  std::optional<double> R;
  double delta = 0.5;
  int lambda_sweep = 0;
  std::string barrier_file;  // theorem "general"
};

struct RunConfig {
  FamilySpec family;
  std::optional<std::string> metric;  // overrides the family default
  nlohmann::json nonlinearity = {{"kind", "power"}, {"p", 2}};
  DatumSpec datum;
  CriterionSpec criterion;
  EvolutionConfig evolution;
  std::string out_dir = "out";
  std::map<std::string, std::vector<double>> sweep;  // amplitude | k | a | p
  std::filesystem::path base_dir;                    // resolves relative file references

  /// Throws Error(ConfigInvalid).
  static RunConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
  /// Canonical form; base_dir is not part of it.
  [[nodiscard]] nlohmann::json to_json() const;
};

/// By extension: .toml or .json. Throws ConfigInvalid, IoFailure.
[[nodiscard]] RunConfig load_config(const std::filesystem::path& path);
/// Writes the canonical JSON form.
void save_config(const RunConfig& cfg, const std::filesystem::path& path);

}  // namespace kaplan::pipeline
