#pragma once

// Reaction term f, the threshold s0(lambda), the Osgood integral and the ODE
// comparison y' = f(y) - lambda y.

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kaplan/expression.hpp"

namespace kaplan {

enum class NonlinearityKind { Power, Custom, Zero };

class Nonlinearity {
 public:
  /// f(u) = u^p. Throws BadParameter unless p > 0.
  static Nonlinearity power(double p);
  /// f given by an expression in u. `attested_convex` records the user's claim.
  static Nonlinearity custom(const std::string& expr, bool attested_convex = false);
  /// f = 0, for diffusion-only runs.
  static Nonlinearity zero();
  /// {"kind":"power","p":2} | {"kind":"custom","expr":"...","attested_convex":false} | {"kind":"zero"}
  static Nonlinearity from_json(const nlohmann::json& j);
  [[nodiscard]] nlohmann::json to_json() const;

  [[nodiscard]] double operator()(double u) const;
  /// f(u)/u for u > 0.
  [[nodiscard]] double ratio(double u) const;
  [[nodiscard]] NonlinearityKind kind() const noexcept { return kind_; }
  [[nodiscard]] double exponent() const noexcept { return p_; }
  [[nodiscard]] bool attested_convex() const noexcept { return attested_; }
  [[nodiscard]] std::string describe() const;

 private:
  NonlinearityKind kind_ = NonlinearityKind::Zero;
  double p_ = 0.0;
  Expression expr_;
  bool attested_ = false;
};

struct HypothesisClause {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct NonlinearityReport {
  std::vector<HypothesisClause> clauses;  // f(0)=0, positivity, convexity, ratio monotone, superlinear, osgood
  [[nodiscard]] bool ok() const;
  [[nodiscard]] std::vector<std::string> violations() const;
};

/// Log-spaced grid 1e-3 .. 1e6.
[[nodiscard]] std::vector<double> default_sample_grid();

[[nodiscard]] NonlinearityReport validate_hypotheses(const Nonlinearity& f, const std::vector<double>& grid);

/// inf{u > 0 : f(u)/u > lambda}. Closed form for the power law, bisection otherwise.
/// Throws NonpositiveArgument for lambda < 0, BracketNotFound.
[[nodiscard]] double s0(const Nonlinearity& f, double lambda);

/// Geometric bracket from 1e-8 up to 1e12, then bisection to 1e-10.
/// Returns 0 when f(u)/u > lambda already at u = 1e-8.
[[nodiscard]] double s0_bisection(const Nonlinearity& f, double lambda);

struct OsgoodTail {
  bool converged = false;
  std::vector<double> increments;  // integral of 1/f over [10^(2^j), 10^(2^(j+1))]
};

/// Convergence diagnostic for the integral of 1/f at infinity.
[[nodiscard]] OsgoodTail osgood_tail(const Nonlinearity& f);

/// Integral of du/f(u) over (y0, inf); +inf when the tail diverges.
/// Closed form y0^(1-p)/(p-1) for the power law.
[[nodiscard]] double osgood_integral(const Nonlinearity& f, double y0);

/// Same integral by quadrature only, after substituting u = y0/t.
[[nodiscard]] double osgood_quadrature(const Nonlinearity& f, double y0);

struct TimeBound {
  double c = 0.0;                      // 1 - lambda y0 / f(y0)
  double generic = 0.0;                // (1/c) * Osgood(y0)
  std::optional<double> closed_form;   // 1/((p-1)(y0^(p-1) - lambda))
  [[nodiscard]] double best() const { return closed_form && *closed_form < generic ? *closed_form : generic; }
};

/// Upper bound on the blow-up time of y' + lambda y >= f(y), y(0) = y0.
/// Throws BelowThreshold when y0 <= s0(lambda).
[[nodiscard]] TimeBound blowup_time_bound(const Nonlinearity& f, double lambda, double y0);

struct OdeOutcome {
  bool blowup = false;
  double time = 0.0;        // extrapolated blow-up time, or the time reached
  double last_time = 0.0;   // last integration time
  double last_value = 0.0;
  std::size_t steps = 0;
};

/// RK4 on y' = f(y) - lambda y with dt = eta / max(lambda, f(y)/y), eta = 1e-3.
/// Blow-up when y > 1e12; the time is extrapolated (Aitken) from the last
/// three doubling times. Bounded once t > cap.
[[nodiscard]] OdeOutcome ode_blowup_oracle(const Nonlinearity& f, double lambda, double y0, double cap,
                                           double eta = 1e-3);

}  // namespace kaplan
