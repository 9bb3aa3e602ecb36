#pragma once

// Truncations of model trees and of the integer lattice Z^N.

#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "kaplan/graph.hpp"

namespace kaplan {

/// b : N0 -> N. Either eventually periodic (a finite prefix, then a repeating
/// cycle; constants are the one-element cycle) or affine b(r) = b0 + slope*r.
class BranchingFunction {
 public:
  enum class Kind { EventuallyPeriodic, Affine };

  static BranchingFunction constant(unsigned b);
  /// Throws ZeroBranching if any entry is 0, BadParameter if the cycle is empty.
  static BranchingFunction eventually_periodic(std::vector<unsigned> prefix, std::vector<unsigned> cycle);
  static BranchingFunction affine(unsigned b0, unsigned slope);
  /// {"kind":"constant","b":2} | {"kind":"periodic","prefix":[..],"cycle":[..]} | {"kind":"affine","b0":..,"slope":..}
  static BranchingFunction from_json(const nlohmann::json& j);
  [[nodiscard]] nlohmann::json to_json() const;

  [[nodiscard]] unsigned operator()(int r) const;
  /// B = sup b(r); nullopt when unbounded.
  [[nodiscard]] std::optional<unsigned> sup() const;
  [[nodiscard]] Kind kind() const noexcept { return kind_; }
  [[nodiscard]] const std::vector<unsigned>& prefix() const noexcept { return prefix_; }
  [[nodiscard]] const std::vector<unsigned>& cycle() const noexcept { return cycle_; }
  [[nodiscard]] bool is_constant() const;

  /// S(r) = prod_{k<r} b(k) for r = 0..depth.
  [[nodiscard]] std::vector<double> shell_sizes(int depth) const;

  friend bool operator==(const BranchingFunction&, const BranchingFunction&) = default;

 private:
  Kind kind_ = Kind::EventuallyPeriodic;
  std::vector<unsigned> prefix_;
  std::vector<unsigned> cycle_{1};
  unsigned b0_ = 1;
  unsigned slope_ = 0;
};

struct TreeTruncation {
  WeightedGraph graph;
  Vertex root = 0;
  ShellDecomposition shells;
  BranchingFunction branching;
  int depth = 0;
};

/// Full tree with shells 0..depth; shell `depth` is the boundary layer.
/// Vertex id = (number of vertices in shells < r) + index within shell r;
/// the children of index i in shell r are indices i*b(r) .. i*b(r)+b(r)-1.
/// Throws ZeroBranching, BadParameter (depth < 1 or too many vertices).
[[nodiscard]] TreeTruncation model_tree(const BranchingFunction& b, int depth);
[[nodiscard]] TreeTruncation homogeneous_tree(unsigned b, int depth);

/// Shell quotient of model_tree(b, depth) built directly from S(r): a path
/// 0..depth with mu(r) = S(r) and omega(r,r+1) = S(r+1). Exact for radial data.
[[nodiscard]] TreeTruncation model_tree_quotient(const BranchingFunction& b, int depth);

struct LatticeSpec {
  int dim = 1;
  int radius = 1;
};

struct LatticeTruncation {
  WeightedGraph graph;
  Vertex origin = 0;
  GraphMetric metric;
  LatticeSpec spec;
};

/// All x in Z^N with |x| <= radius, unit weights between unit-distance pairs,
/// mu = 2N. A vertex with a lattice neighbour outside the ball is boundary.
/// Vertices are ordered lexicographically by coordinate. Throws BadParameter.
[[nodiscard]] LatticeTruncation lattice_ball(LatticeSpec spec);

}  // namespace kaplan
