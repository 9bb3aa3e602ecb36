#pragma once

// Blow-up criteria: pairing against a barrier, hypothesis checklists and
// margin reports for each theorem family.

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kaplan/barriers.hpp"
#include "kaplan/generators.hpp"
#include "kaplan/nonlinearity.hpp"

namespace kaplan {

enum class TheoremTag { General, GeneralGraph, Tree, HomogeneousTree, LatticeGeneralF, LatticePower };

[[nodiscard]] std::string_view to_string(TheoremTag tag);
[[nodiscard]] TheoremTag theorem_tag_from_string(std::string_view name);

enum class Verdict { Certified, NotCertified, HypothesisViolated };

[[nodiscard]] std::string_view to_string(Verdict v);

/// A truncation together with the structure the theorems refer to.
struct Domain {
  std::optional<TreeTruncation> tree;
  std::optional<LatticeTruncation> lattice;
  std::optional<WeightedGraph> custom_graph;
  GraphMetric metric;
  Vertex center = 0;
  ShellDecomposition shells;  // combinatorial shells from {center}

  static Domain from_tree(TreeTruncation t);
  static Domain from_lattice(LatticeTruncation l);
  /// Combinatorial metric, shells from {origin}.
  static Domain custom(WeightedGraph g, Vertex origin);

  [[nodiscard]] const WeightedGraph& graph() const;
};

struct PairingInterval {
  double truncated = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

/// sum u0 phi mu over the truncation; the upper end adds sup_outside * tail.
/// Throws NegativeDatum.
[[nodiscard]] PairingInterval pairing(const WeightedGraph& g, const Barrier& bar, std::span<const double> u0,
                                      double sup_outside = 0.0);

struct DegreeCheck {
  double observed = 0.0;
  std::optional<double> declared;  // sup Deg of the infinite family; nullopt when unbounded
  bool bounded = false;
  std::string note;
};

[[nodiscard]] DegreeCheck check_bounded_weighted_degree(const WeightedGraph& g);

struct CriterionParams {
  Nonlinearity f = Nonlinearity::power(2.0);
  std::optional<double> a;
  std::optional<double> k;
  std::optional<double> lambda;           // must be admissible; defaults to the theorem's value
  std::optional<Barrier> barrier;         // required by TheoremTag::General
  std::optional<double> declared_growth;  // general_graph on custom graphs
  std::optional<double> declared_sup_outer;
  double sup_outside = 0.0;               // sup of u0 beyond the truncation
  std::optional<double> R;                // certificate radius; half the covered radius by default
  double delta = 0.5;
  int lambda_sweep = 0;                   // number of points on [lambda, 10 lambda]
};

struct LambdaSweepPoint {
  double lambda = 0.0;
  double threshold = 0.0;
  double margin = 0.0;
};

struct LatticeForms {
  double gaussian_mass = 0.0;  // sum e^{-k|x|^2} u0 mu
  double phi0 = 0.0;           // (1/2N) theta^{-N} * mass
  double s0 = 0.0;             // (2kN)^{1/(p-1)}
  double rhs_power = 0.0;      // (2N)^{p/(p-1)} theta^N k^{1/(p-1)}
  bool general_form = false;   // phi0 > s0
  bool power_form = false;     // mass > rhs_power
};

/// Both lattice conditions from the Gaussian mass, with lambda = 2kN.
[[nodiscard]] LatticeForms lattice_forms(int N, double p, double k, double gaussian_mass);

struct CriterionReport {
  TheoremTag tag = TheoremTag::General;
  Verdict verdict = Verdict::NotCertified;
  PairingInterval pairing_value;
  double threshold = 0.0;
  double margin = 0.0;
  double lambda_used = 0.0;
  std::vector<HypothesisClause> checklist;
  std::optional<double> predicted_time_bound;
  std::optional<LatticeForms> lattice;
  std::optional<Barrier> barrier;
  std::optional<BGCertificate> certificate;
  std::vector<LambdaSweepPoint> sweep;
  std::vector<std::string> notes;

  [[nodiscard]] std::vector<std::string> failed_hypotheses() const;
  [[nodiscard]] nlohmann::json to_json() const;
};

/// Builds the matching barrier, checks every hypothesis and reports the margin.
/// A failed hypothesis yields Verdict::HypothesisViolated.
/// Throws NegativeDatum, BarrierConstructionFailed.
[[nodiscard]] CriterionReport evaluate_criterion(TheoremTag tag, const Domain& dom, std::span<const double> u0,
                                                 const CriterionParams& params);

/// Throws HypothesisViolated listing the failed checklist items.
void enforce(const CriterionReport& report);

}  // namespace kaplan
