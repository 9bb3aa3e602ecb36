#pragma once

// Explicit integration of u_t = Delta u + f(u) on a truncation with zero
// Dirichlet data on the boundary layer, plus Kaplan-functional monitoring.

#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "kaplan/barriers.hpp"
#include "kaplan/graph.hpp"
#include "kaplan/nonlinearity.hpp"

namespace kaplan {

struct EvolutionConfig {
  double dt_safety = 0.5;
  double max_time = 10.0;
  double blowup_norm_threshold = 1e8;
  double dt_floor = 1e-12;
  int record_stride = 1;
  std::optional<double> fixed_dt;    // overrides the adaptive rule (must still satisfy dt Deg < 1)
  std::vector<double> sample_times;  // when set, records t = 0 and exactly these times

  /// Throws BadParameter.
  void validate() const;
  static EvolutionConfig from_json(const nlohmann::json& j);
  [[nodiscard]] nlohmann::json to_json() const;
};

enum class RunVerdict { Blowup, Bounded, Horizon };

[[nodiscard]] std::string_view to_string(RunVerdict v);

struct BlowupInterval {
  double last_finite = 0.0;   // time at which the threshold was crossed (or the step collapsed)
  double extrapolated = 0.0;  // Aitken extrapolation of the doubling times
};

struct BlowupDetection {
  RunVerdict verdict = RunVerdict::Horizon;
  std::optional<BlowupInterval> t_star;
  bool step_collapse = false;
  std::optional<bool> within_bound;  // t_star->last_finite <= bound
};

struct Trajectory {
  std::vector<double> times;
  std::vector<double> sup_norm;
  std::vector<double> dt;           // step taken out of each record (0 for the last)
  std::vector<double> kaplan;       // Phi(t), when a barrier is supplied
  std::vector<double> residual;     // step-consistent Kaplan residual, when a barrier is supplied
  std::vector<double> flux_bound;   // boundary-adjacent barrier mass * sup u * max Deg
  std::vector<double> jensen_gap;   // sum phi f(u) mu - f(Phi)
  std::vector<double> doubling_times;
  std::size_t steps = 0;
  double lambda = 0.0;
  double first_dt = 0.0;
  bool dt_collapsed = false;
  bool threshold_crossed = false;
  VertexFunction final_state;
  BlowupDetection detection;

  [[nodiscard]] nlohmann::json summary_json() const;
};

/// Explicit steps u <- u + dt (Delta u + f(u)) on interior vertices with
/// dt = dt_safety / (max Deg + f(sup u)/sup u). Records Phi(t) when `bar` is
/// given, using `lambda` (default bar->lambda) for the residual.
/// Throws NegativeDatum, NaNDetected, InvariantViolated, BadParameter.
[[nodiscard]] Trajectory evolve(const WeightedGraph& g, std::span<const double> u0, const Nonlinearity& f,
                                const EvolutionConfig& cfg, const Barrier* bar = nullptr,
                                std::optional<double> lambda = std::nullopt);

/// Phi = sum phi u mu.
[[nodiscard]] double kaplan_functional(const WeightedGraph& g, const Barrier& bar, std::span<const double> u);

/// Phi at each state of a sequence.
[[nodiscard]] std::vector<double> kaplan_series(const WeightedGraph& g, const Barrier& bar,
                                                const std::vector<VertexFunction>& states);

enum class DifferenceScheme { Central, Forward };

/// Phi' + lambda Phi - f(Phi) at the record points. Central: three-point
/// differences at interior records. Forward: one-sided differences at every
/// record but the last. Throws TooFewSamples (fewer than 3 records).
[[nodiscard]] std::vector<double> inequality_residual(std::span<const double> times, std::span<const double> kaplan,
                                                      double lambda, const Nonlinearity& f,
                                                      DifferenceScheme scheme = DifferenceScheme::Central);

/// sum phi f(u) mu - f(sum phi u mu).
[[nodiscard]] double jensen_gap(const WeightedGraph& g, const Barrier& bar, std::span<const double> u,
                                const Nonlinearity& f);

/// Verdict from the recorded series. Blow-up when the sup norm crossed
/// `threshold` or the step fell below the floor while the norm grew.
[[nodiscard]] BlowupDetection detect_blowup(const Trajectory& traj, double threshold,
                                            std::optional<double> bound = std::nullopt);

}  // namespace kaplan
