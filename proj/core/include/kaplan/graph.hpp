#pragma once

// Weighted graphs (X, omega, mu) truncated to a finite ball, plus the discrete
// calculus on them: difference operator, weighted Laplacian, the product and
// integration-by-parts identities, pseudo-metrics, shells, inner/outer degrees.
//
// Truncation convention: a graph holds a finite ball of an infinite family.
// Vertices flagged `boundary` form the outermost layer; their stencils are
// incomplete, so operators that need a full neighbourhood are only evaluated
// at interior vertices.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace kaplan {

using Vertex = std::uint32_t;
using VertexFunction = std::vector<double>;

struct Edge {
  Vertex u = 0;
  Vertex v = 0;
  double w = 0.0;
};

struct Neighbor {
  Vertex v = 0;
  double w = 0.0;
};

/// Describes the infinite family a truncation was cut from.
/// `kind` is one of "tree", "lattice", "custom".
struct FamilyTag {
  std::string kind = "custom";
  nlohmann::json params = nlohmann::json::object();

  friend bool operator==(const FamilyTag&, const FamilyTag&) = default;
};

/// Integer coordinates attached to lattice truncations, row-major `dim` ints per vertex.
struct LatticeCoordinates {
  int dim = 0;
  std::vector<int> flat;

  [[nodiscard]] std::span<const int> of(Vertex x) const {
    return {flat.data() + static_cast<std::size_t>(x) * static_cast<std::size_t>(dim),
            static_cast<std::size_t>(dim)};
  }
  friend bool operator==(const LatticeCoordinates&, const LatticeCoordinates&) = default;
};

struct GraphSpec {
  std::vector<Edge> edges;
  std::vector<double> mu;
  std::vector<bool> boundary;  // empty means "no boundary"
  FamilyTag family;
  std::optional<LatticeCoordinates> coords;
};

class WeightedGraph {
 public:
  /// Validates and freezes a graph. Every unordered pair is stored once;
  /// listing (u,v) and (v,u) with the same weight is accepted, different
  /// weights raise AsymmetricWeight. Zero-weight entries are dropped.
  /// Throws SelfLoop, NonpositiveMeasure, AsymmetricWeight, InvalidWeight, Disconnected.
  static WeightedGraph build(GraphSpec spec);

  WeightedGraph() = default;

  [[nodiscard]] std::size_t size() const noexcept { return mu_.size(); }
  [[nodiscard]] bool contains(Vertex x) const noexcept { return x < mu_.size(); }
  [[nodiscard]] double mu(Vertex x) const { return mu_[x]; }
  [[nodiscard]] std::span<const double> measures() const noexcept { return mu_; }
  [[nodiscard]] bool is_boundary(Vertex x) const { return boundary_[x] != 0; }
  [[nodiscard]] bool is_interior(Vertex x) const { return boundary_[x] == 0; }
  [[nodiscard]] std::span<const Neighbor> neighbors(Vertex x) const {
    return {adjacency_.data() + offsets_[x], adjacency_.data() + offsets_[x + 1]};
  }
  /// omega(x,y); zero when not adjacent.
  [[nodiscard]] double weight(Vertex x, Vertex y) const;
  /// deg(x) = sum_y omega(x,y)
  [[nodiscard]] double degree(Vertex x) const { return degree_[x]; }
  /// Deg(x) = deg(x) / mu(x)
  [[nodiscard]] double weighted_degree(Vertex x) const { return degree_[x] / mu_[x]; }
  [[nodiscard]] const std::vector<Edge>& edges() const noexcept { return edges_; }
  [[nodiscard]] const FamilyTag& family() const noexcept { return family_; }
  [[nodiscard]] const std::optional<LatticeCoordinates>& coordinates() const noexcept { return coords_; }
  [[nodiscard]] std::vector<Vertex> interior_vertices() const;
  [[nodiscard]] std::size_t boundary_count() const;
  /// Largest Deg(x) over interior vertices (all vertices when none is interior).
  [[nodiscard]] double max_weighted_degree() const;

  friend bool operator==(const WeightedGraph& a, const WeightedGraph& b);

 private:
  std::vector<double> mu_;
  std::vector<char> boundary_;
  std::vector<Edge> edges_;  // u < v, sorted
  std::vector<std::size_t> offsets_;
  std::vector<Neighbor> adjacency_;  // sorted by neighbour id
  std::vector<double> degree_;
  FamilyTag family_;
  std::optional<LatticeCoordinates> coords_;
};

// ---------------------------------------------------------------------------
// Difference and Laplace operators

[[nodiscard]] inline double difference(std::span<const double> f, Vertex x, Vertex y) { return f[y] - f[x]; }

/// (1/mu(x)) sum_y omega(x,y) (f(y) - f(x)). Throws UnknownVertex.
[[nodiscard]] double laplacian(const WeightedGraph& g, std::span<const double> f, Vertex x);

/// Laplacian at every vertex (boundary entries use the truncated stencil).
[[nodiscard]] VertexFunction laplacian(const WeightedGraph& g, std::span<const double> f);

struct IdentityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;  // |lhs - rhs|
  double scale = 0.0;     // magnitude of the summed terms
  [[nodiscard]] double relative() const { return residual / (scale > 1.0 ? scale : 1.0); }
};

/// Compares sum_x Delta f(x) h(x) mu(x) with -(1/2) sum_{x,y} omega (grad f)(grad h).
/// Throws SupportTouchesBoundary when a vertex of supp(h) is a boundary vertex.
[[nodiscard]] IdentityCheck integration_by_parts_residual(const WeightedGraph& g, std::span<const double> f,
                                                          std::span<const double> h);

/// Delta(fh)(x) against f Delta h + h Delta f + (1/mu) sum omega (grad f)(grad h).
[[nodiscard]] IdentityCheck laplacian_product_residual(const WeightedGraph& g, std::span<const double> f,
                                                       std::span<const double> h, Vertex x);

// ---------------------------------------------------------------------------
// Pseudo-metrics

enum class MetricKind { Combinatorial, LatticeEuclidean };

[[nodiscard]] std::string_view to_string(MetricKind kind);
[[nodiscard]] MetricKind metric_kind_from_string(std::string_view name);

struct IntrinsicBound {
  double q = 1.0;
  double c0 = 0.0;
};

class GraphMetric {
 public:
  GraphMetric() = default;
  /// Attaches jump size and the q=1 intrinsic bound computed on g.
  static GraphMetric make(const WeightedGraph& g, MetricKind kind);

  [[nodiscard]] MetricKind kind() const noexcept { return kind_; }
  [[nodiscard]] double jump_size() const noexcept { return jump_size_; }
  [[nodiscard]] IntrinsicBound intrinsic_bound() const noexcept { return intrinsic_; }

  [[nodiscard]] double distance(const WeightedGraph& g, Vertex x, Vertex y) const;
  /// d(x, x0) for every x; unreachable vertices get +inf.
  [[nodiscard]] std::vector<double> distances_from(const WeightedGraph& g, Vertex x0) const;
  /// d(x,y) for an adjacent pair, without a graph search.
  [[nodiscard]] double edge_length(const WeightedGraph& g, Vertex x, Vertex y) const;

 private:
  MetricKind kind_ = MetricKind::Combinatorial;
  double jump_size_ = 0.0;
  IntrinsicBound intrinsic_{};
};

struct MetricDiagnostics {
  double jump_size = 0.0;
  double q = 1.0;
  double c0 = 0.0;
  bool jump_ok = false;       // 0 < s < inf
  bool finite_balls = false;  // declared for the infinite family
  bool intrinsic_ok = false;  // C0 finite
  std::string balls_note;
  [[nodiscard]] bool pm_ok() const { return jump_ok && finite_balls && intrinsic_ok; }
};

[[nodiscard]] MetricDiagnostics metric_diagnostics(const WeightedGraph& g, MetricKind kind, double q = 1.0);

/// Spot-checks d(x,x)=0, symmetry and the triangle inequality on `samples`
/// random triples. Returns the number of violated checks.
[[nodiscard]] std::size_t count_metric_axiom_violations(const WeightedGraph& g, const GraphMetric& m,
                                                        std::size_t samples, std::uint64_t seed);

/// Combinatorial distances from a vertex set (multi-source BFS). -1 when unreachable.
[[nodiscard]] std::vector<int> bfs_distances(const WeightedGraph& g, std::span<const Vertex> sources);

// ---------------------------------------------------------------------------
// Shells and spherical symmetry

struct ShellDecomposition {
  std::vector<Vertex> origin;
  std::vector<std::vector<Vertex>> shells;
  std::vector<double> shell_measure;  // S(r)
  std::vector<int> radius_of;         // rho(x, Omega), -1 beyond the covered radius

  [[nodiscard]] int max_radius() const { return static_cast<int>(shells.size()) - 1; }
  [[nodiscard]] int radius(Vertex x) const { return radius_of[x]; }
};

/// BFS layering from Omega up to r_max (unbounded when nullopt). Throws EmptyOriginSet, UnknownVertex.
[[nodiscard]] ShellDecomposition shell_decomposition(const WeightedGraph& g, std::span<const Vertex> origin,
                                                     std::optional<int> r_max = std::nullopt);

struct ShellDegrees {
  double inner = 0.0;  // D_-(x)
  double outer = 0.0;  // D_+(x)
};

/// Inner and outer degree of x. Throws RadiusExhausted when shell r(x)+1 is
/// not fully known (x on the last covered shell, beyond it, or a boundary vertex).
[[nodiscard]] ShellDegrees inner_outer_degrees(const WeightedGraph& g, const ShellDecomposition& sd, Vertex x);

/// Degrees for every vertex; NaN entries where inner_outer_degrees would throw.
[[nodiscard]] std::vector<ShellDegrees> all_inner_outer_degrees(const WeightedGraph& g, const ShellDecomposition& sd);

struct SymmetricProfile {
  std::vector<double> values;  // values[r]

  [[nodiscard]] int r_max() const { return static_cast<int>(values.size()) - 1; }
  /// Vertex function constant on shells. Uncovered vertices get 0.
  [[nodiscard]] VertexFunction lift(const ShellDecomposition& sd) const;
};

/// D_+(x)[p(r+1)-p(r)] + D_-(x)[p(r-1)-p(r)]; only the outer term on Omega.
/// Throws ProfileTooShort when p is not defined at r(x)+1.
[[nodiscard]] double laplacian_spherical(const ShellDecomposition& sd, std::span<const ShellDegrees> degrees,
                                         const SymmetricProfile& p, Vertex x);

/// True when D_- and D_+ are constant (to `tol`) on every shell whose
/// degrees are computable.
[[nodiscard]] bool is_weakly_spherically_symmetric(const WeightedGraph& g, const ShellDecomposition& sd,
                                                   double tol = 1e-12);

/// Collapses a weakly spherically symmetric truncation to the path graph of
/// its shells: node r has measure S(r), edge (r,r+1) carries the total weight
/// between shells r and r+1. For shell-constant functions the Laplacian,
/// barrier pairings and weighted degrees are preserved exactly.
/// Throws NotWeaklySphericallySymmetric.
[[nodiscard]] WeightedGraph shell_quotient(const WeightedGraph& g, const ShellDecomposition& sd);

}  // namespace kaplan
