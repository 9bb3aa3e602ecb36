#pragma once

// Cut-off functions, property (B_G) barriers and their certificates.

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kaplan/generators.hpp"
#include "kaplan/graph.hpp"

namespace kaplan {

// ---------------------------------------------------------------------------
// Cut-off

struct CutoffFunction {
  Vertex x0 = 0;
  double R = 0.0;
  double delta = 0.0;
  double s = 0.0;
  VertexFunction values;
  std::vector<double> dist;  // d(x, x0)

  /// x in closed B_R minus open B_{(1-delta)R - 2s}.
  [[nodiscard]] bool in_annulus(Vertex x) const;
};

/// chi_R(x) = min{[R - s - d(x,x0)]_+ / (delta R), 1}. Throws BadDelta, NonpositiveArgument.
[[nodiscard]] CutoffFunction cutoff(const GraphMetric& m, const WeightedGraph& g, Vertex x0, double R, double delta);

struct CutoffViolations {
  std::size_t range = 0;
  std::size_t support = 0;
  std::size_t limit = 0;
  std::size_t gradient = 0;
  std::size_t laplacian = 0;
  [[nodiscard]] std::size_t total() const { return range + support + limit + gradient + laplacian; }
};

/// Checks the five cut-off clauses pointwise on g: range [0,1]; support equal
/// to B_{R-s}; chi nondecreasing through three doublings of R and equal to 1
/// wherever R > (d + s)/(1 - delta); the gradient bound; the Laplacian bound
/// with C0 from the metric.
[[nodiscard]] CutoffViolations check_cutoff_lemma(const GraphMetric& m, const WeightedGraph& g, Vertex x0, double R,
                                                  double delta, double tol = 1e-12);

// ---------------------------------------------------------------------------
// Barriers

enum class BarrierKind { General, Tree, HomogeneousTree, Lattice };

[[nodiscard]] std::string_view to_string(BarrierKind kind);

struct Barrier {
  BarrierKind kind = BarrierKind::General;
  VertexFunction phi;
  Vertex center = 0;
  MetricKind metric = MetricKind::Combinatorial;
  double lambda = 0.0;                      // the theorem's lambda
  std::optional<double> lambda_alternative; // lattice: 2kN
  std::optional<double> a;
  std::optional<double> k;
  double norm_constant = 0.0;               // C
  double truncated_norm = 0.0;              // sum over the truncation of phi mu
  double tail_bound = 0.0;                  // phi-mass outside the truncation
  std::optional<double> log_min_phi;        // closed-form min log phi on the truncation (phi may underflow)
  double gradient_bound = 0.0;              // closed-form bound on sum_{x,y} omega |grad phi|
  std::string gradient_bound_source;
  nlohmann::json params = nlohmann::json::object();

  [[nodiscard]] nlohmann::json to_json() const;  // everything except phi
};

/// sum_{r >= L} S(r) e^{-a r} for S(r) = prod_{k<r} b(k), in closed form.
/// Throws SupBranchingUnbounded for affine branching with positive slope and
/// SeriesDivergent when the cycle growth rate is >= e^a.
[[nodiscard]] double tree_series_tail(const BranchingFunction& b, double a, int L);

/// phi = C e^{-a r(x)} with C = [sum_r S(r) e^{-a r}]^{-1}. `declared_growth`
/// is a bound G with S(r+1) <= G S(r) beyond the truncation; the remainder is
/// summed as the geometric extension S(L) (G e^{-a})^j. lambda is the larger
/// of the observed sup D_+ and `declared_sup_outer`.
/// Throws NonpositiveArgument, TailUnbounded (no growth declared), SeriesDivergent (G e^{-a} >= 1).
[[nodiscard]] Barrier barrier_general(const WeightedGraph& g, const ShellDecomposition& sd, double a,
                                      std::optional<double> declared_growth,
                                      std::optional<double> declared_sup_outer = std::nullopt);

/// C = {1 + sum_{r>=1} prod b(k) e^{-a r}}^{-1}, lambda = B. Throws SupBranchingUnbounded, ATooSmall.
[[nodiscard]] Barrier barrier_tree(const TreeTruncation& tree, double a);

/// phi = (1 - b e^{-a}) e^{-a r(x)}, lambda = b. Throws BadParameter (branching not constant), ATooSmall.
[[nodiscard]] Barrier barrier_homogeneous_tree(const TreeTruncation& tree, double a);

/// phi = C e^{-k |x|^2} with C = {2N theta(k/pi)^N}^{-1}; lambda = 1 - e^{-k},
/// alternative 2kN. Throws NonpositiveK.
[[nodiscard]] Barrier barrier_lattice(const LatticeTruncation& lattice, double k);

/// psi = e^{-k|x|^2}: Delta psi(x) = psi(x) [(e^{-k}/N) sum_i cosh(2k x_i) - 1].
[[nodiscard]] double lattice_gaussian_laplacian(std::span<const int> x, double k);

// ---------------------------------------------------------------------------
// Certificates

struct BGClause {
  std::string name;   // "a", "b", "c", "d"
  bool passed = false;
  double value = 0.0;
  std::string detail;
};

struct BGCertificate {
  std::vector<BGClause> clauses;
  double lambda = 0.0;
  double R = 0.0;
  double delta = 0.0;
  double min_phi = 0.0;
  double norm_gap = 0.0;          // |truncated + tail - 1|
  double annulus_sum = 0.0;
  double global_sum = 0.0;        // truncated sum_{x,y} omega |grad phi|
  double c1 = 0.0;
  bool c1_closed_form = false;
  double min_d_residual = 0.0;    // min interior Delta phi + lambda phi
  Vertex argmin_d = 0;

  [[nodiscard]] bool ok() const;
  [[nodiscard]] std::vector<std::string> failures() const;
  [[nodiscard]] nlohmann::json to_json() const;
};

/// Evaluates conditions (a)-(d) of (B_G) for `bar` on g, using bar.lambda
/// unless `lambda` is given.
[[nodiscard]] BGCertificate verify_BG(const WeightedGraph& g, const GraphMetric& m, const Barrier& bar, double R,
                                      double delta, std::optional<double> lambda = std::nullopt);

/// Throws ConditionFailed listing the failed clauses.
void enforce(const BGCertificate& cert);

/// Barrier mass on interior vertices adjacent to the boundary layer.
[[nodiscard]] double boundary_adjacent_mass(const WeightedGraph& g, const Barrier& bar);

}  // namespace kaplan
