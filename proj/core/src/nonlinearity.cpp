#include "kaplan/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "kaplan/error.hpp"

namespace kaplan {

using nlohmann::json;

Nonlinearity Nonlinearity::power(double p) {
  if (!(p > 0.0) || !std::isfinite(p)) throw Error(ErrorCode::BadParameter, "power-law exponent must be positive");
  Nonlinearity f;
  f.kind_ = NonlinearityKind::Power;
  f.p_ = p;
  f.attested_ = p >= 1.0;
  return f;
}

Nonlinearity Nonlinearity::custom(const std::string& expr, bool attested_convex) {
  Nonlinearity f;
  f.kind_ = NonlinearityKind::Custom;
  f.expr_ = Expression::parse(expr);
  f.attested_ = attested_convex;
  return f;
}

Nonlinearity Nonlinearity::zero() { return Nonlinearity{}; }

Nonlinearity Nonlinearity::from_json(const json& j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "power") return power(j.at("p").get<double>());
    if (kind == "custom") return custom(j.at("expr").get<std::string>(), j.value("attested_convex", false));
    if (kind == "zero") return zero();
    throw Error(ErrorCode::BadParameter, "unknown nonlinearity kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("nonlinearity: ") + e.what());
  }
}

json Nonlinearity::to_json() const {
  switch (kind_) {
    case NonlinearityKind::Power: return {{"kind", "power"}, {"p", p_}};
    case NonlinearityKind::Custom:
      return {{"kind", "custom"}, {"expr", expr_.text()}, {"attested_convex", attested_}};
    case NonlinearityKind::Zero: break;
  }
  return {{"kind", "zero"}};
}

double Nonlinearity::operator()(double u) const {
  switch (kind_) {
    case NonlinearityKind::Power:
      if (p_ == 2.0) return u * u;
      if (p_ == 3.0) return u * u * u;
      return u > 0.0 ? std::pow(u, p_) : 0.0;
    case NonlinearityKind::Custom: return expr_(u);
    case NonlinearityKind::Zero: break;
  }
  return 0.0;
}

double Nonlinearity::ratio(double u) const {
  switch (kind_) {
    case NonlinearityKind::Power:
      if (p_ == 2.0) return u;
      if (p_ == 3.0) return u * u;
      return std::pow(u, p_ - 1.0);
    case NonlinearityKind::Custom: return expr_(u) / u;
    case NonlinearityKind::Zero: break;
  }
  return 0.0;
}

std::string Nonlinearity::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case NonlinearityKind::Power: os << "u^" << p_; break;
    case NonlinearityKind::Custom: os << expr_.text(); break;
    case NonlinearityKind::Zero: os << "0"; break;
  }
  return os.str();
}

// ---------------------------------------------------------------------------

bool NonlinearityReport::ok() const {
  return std::all_of(clauses.begin(), clauses.end(), [](const HypothesisClause& c) { return c.passed; });
}

std::vector<std::string> NonlinearityReport::violations() const {
  std::vector<std::string> out;
  for (const auto& c : clauses) {
    if (!c.passed) out.push_back(c.name);
  }
  return out;
}

std::vector<double> default_sample_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 90; ++i) g.push_back(std::pow(10.0, -3.0 + i / 10.0));
  return g;
}

NonlinearityReport validate_hypotheses(const Nonlinearity& f, const std::vector<double>& grid) {
  if (grid.size() < 4) throw Error(ErrorCode::BadParameter, "sample grid needs at least 4 points");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0) || (i > 0 && !(grid[i] > grid[i - 1]))) {
      throw Error(ErrorCode::BadParameter, "sample grid must be positive and strictly increasing");
    }
  }
  NonlinearityReport rep;
  const double f0 = f(0.0);
  rep.clauses.push_back({"f(0)=0", std::abs(f0) <= 1e-14, "f(0) = " + std::to_string(f0)});

  bool positive = true;
  std::string pos_detail = "f > 0 on the grid";
  for (double u : grid) {
    const double v = f(u);
    if (!(v > 0.0)) {
      positive = false;
      pos_detail = "f(" + std::to_string(u) + ") = " + std::to_string(v);
      break;
    }
  }
  rep.clauses.push_back({"positivity", positive, pos_detail});

  bool convex = true;
  std::string conv_detail = "midpoint convexity holds on sampled pairs";
  for (std::size_t i = 0; i < grid.size() && convex; ++i) {
    for (std::size_t j = i + 1; j < grid.size(); j += 1 + (j - i) / 2) {
      const double u = grid[i], v = grid[j];
      const double mid = f(0.5 * (u + v));
      const double chord = 0.5 * (f(u) + f(v));
      if (mid > chord + 1e-12 * std::max(1.0, std::abs(chord))) {
        convex = false;
        conv_detail = "fails at (" + std::to_string(u) + ", " + std::to_string(v) + ")";
        break;
      }
    }
  }
  if (f.kind() == NonlinearityKind::Custom) {
    conv_detail += f.attested_convex() ? "; convexity attested" : "; convexity not attested";
  }
  rep.clauses.push_back({"convexity", convex, conv_detail});

  bool monotone = true;
  std::string mono_detail = "f(u)/u nondecreasing on the grid";
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double a = f.ratio(grid[i - 1]), b = f.ratio(grid[i]);
    if (b < a - 1e-12 * std::max(1.0, std::abs(a))) {
      monotone = false;
      mono_detail = "decreases near u = " + std::to_string(grid[i]);
      break;
    }
  }
  rep.clauses.push_back({"ratio_nondecreasing", monotone, mono_detail});

  // Superlinearity trend: f(u)/u keeps increasing over the last three decades.
  const double top = grid.back();
  bool superlinear = true;
  double prev = f.ratio(top / 1e3);
  for (double u : {top / 1e2, top / 1e1, top}) {
    const double r = f.ratio(u);
    if (!(r > prev * (1.0 + 1e-6))) superlinear = false;
    prev = r;
  }
  rep.clauses.push_back({"superlinear", superlinear,
                         "f(u)/u at u_max = " + std::to_string(f.ratio(top))});

  const OsgoodTail tail = osgood_tail(f);
  std::string tail_detail = "tail increments:";
  for (double inc : tail.increments) tail_detail += " " + std::to_string(inc);
  rep.clauses.push_back({"osgood", tail.converged, tail_detail});
  return rep;
}

// ---------------------------------------------------------------------------

double s0_bisection(const Nonlinearity& f, double lambda) {
  if (lambda < 0.0 || !std::isfinite(lambda)) {
    throw Error(ErrorCode::NonpositiveArgument, "lambda must be nonnegative and finite");
  }
  auto above = [&](double u) { return f.ratio(u) > lambda; };
  double hi = 1e-8;
  if (above(hi)) return 0.0;
  while (!above(hi)) {
    hi *= 2.0;
    if (hi > 1e12) {
      throw Error(ErrorCode::BracketNotFound, "f(u)/u <= lambda up to u = 1e12; s0 not found");
    }
  }
  double lo = hi / 2.0;
  for (int it = 0; it < 400 && hi - lo > std::max(1e-10, 4.0 * std::numeric_limits<double>::epsilon() * hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (above(mid) ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

double s0(const Nonlinearity& f, double lambda) {
  if (lambda < 0.0 || !std::isfinite(lambda)) {
    throw Error(ErrorCode::NonpositiveArgument, "lambda must be nonnegative and finite");
  }
  if (f.kind() == NonlinearityKind::Power && f.exponent() > 1.0) {
    if (lambda == 0.0) return 0.0;
    return std::pow(lambda, 1.0 / (f.exponent() - 1.0));
  }
  return s0_bisection(f, lambda);
}

// ---------------------------------------------------------------------------

namespace {

double inverse_f_log_scale(const Nonlinearity& f, double s) {
  const double u = std::exp(s);
  const double fu = f(u);
  if (!std::isfinite(u)) return 0.0;
  if (std::isinf(fu)) return 0.0;
  if (!(fu > 0.0)) return std::numeric_limits<double>::infinity();
  return u / fu;
}

}  // namespace

OsgoodTail osgood_tail(const Nonlinearity& f) {
  OsgoodTail out;
  const double ln10 = std::log(10.0);
  for (int j = 0; j < 7; ++j) {
    const double a = ln10 * std::ldexp(1.0, j);
    const double b = ln10 * std::ldexp(1.0, j + 1);
    double value = 0.0;
    try {
      value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
          [&](double s) { return inverse_f_log_scale(f, s); }, a, b, 12, 1e-10);
    } catch (const std::exception&) {
      value = std::numeric_limits<double>::infinity();
    }
    out.increments.push_back(value);
  }
  const auto& inc = out.increments;
  bool ok = std::all_of(inc.begin(), inc.end(), [](double v) { return std::isfinite(v); });
  for (std::size_t j = inc.size() - 2; ok && j < inc.size(); ++j) {
    if (inc[j] == 0.0) continue;
    if (!(inc[j] <= 0.75 * inc[j - 1])) ok = false;
  }
  out.converged = ok;
  return out;
}

double osgood_quadrature(const Nonlinearity& f, double y0) {
  if (!(y0 > 0.0)) throw Error(ErrorCode::NonpositiveArgument, "Osgood integral needs y0 > 0");
  auto integrand = [&](double t) {
    if (!(t > 0.0)) return 0.0;
    const double u = y0 / t;
    if (!std::isfinite(u)) return 0.0;
    const double fu = f(u);
    if (std::isinf(fu)) return 0.0;
    const double v = (u / fu) / t;
    return std::isfinite(v) ? v : 0.0;
  };
  boost::math::quadrature::tanh_sinh<double> integrator;
  return integrator.integrate(integrand, 0.0, 1.0, 1e-13);
}

double osgood_integral(const Nonlinearity& f, double y0) {
  if (!(y0 > 0.0)) throw Error(ErrorCode::NonpositiveArgument, "Osgood integral needs y0 > 0");
  if (f.kind() == NonlinearityKind::Power && f.exponent() > 1.0) {
    const double p = f.exponent();
    return std::pow(y0, 1.0 - p) / (p - 1.0);
  }
  if (!osgood_tail(f).converged) return std::numeric_limits<double>::infinity();
  return osgood_quadrature(f, y0);
}

TimeBound blowup_time_bound(const Nonlinearity& f, double lambda, double y0) {
  const double threshold = s0(f, lambda);
  if (!(y0 > threshold)) {
    throw Error(ErrorCode::BelowThreshold,
                "y0 = " + std::to_string(y0) + " does not exceed s0(lambda) = " + std::to_string(threshold));
  }
  TimeBound tb;
  tb.c = 1.0 - lambda * y0 / f(y0);
  if (!(tb.c > 0.0)) throw Error(ErrorCode::BelowThreshold, "c = 1 - lambda y0 / f(y0) is not positive");
  tb.generic = osgood_integral(f, y0) / tb.c;
  if (f.kind() == NonlinearityKind::Power && f.exponent() > 1.0) {
    const double p = f.exponent();
    tb.closed_form = 1.0 / ((p - 1.0) * (std::pow(y0, p - 1.0) - lambda));
  }
  return tb;
}

// ---------------------------------------------------------------------------

OdeOutcome ode_blowup_oracle(const Nonlinearity& f, double lambda, double y0, double cap, double eta) {
  if (!(y0 > 0.0)) throw Error(ErrorCode::NonpositiveArgument, "oracle needs y0 > 0");
  constexpr double kBlowup = 1e12;
  auto rhs = [&](double y) { return f(y) - lambda * y; };
  OdeOutcome out;
  double t = 0.0, y = y0;
  double level = y0 * 2.0;
  std::vector<double> crossings;
  const double dt_max = cap / 100.0;
  while (y <= kBlowup && t <= cap) {
    const double rate = std::max(lambda, y > 0.0 ? f.ratio(y) : 0.0);
    const double dt = rate > 0.0 ? std::min(eta / rate, dt_max) : dt_max;
    const double k1 = rhs(y);
    const double k2 = rhs(y + 0.5 * dt * k1);
    const double k3 = rhs(y + 0.5 * dt * k2);
    const double k4 = rhs(y + dt * k3);
    const double y_next = y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!std::isfinite(y_next)) break;
    while (y_next >= level && level <= kBlowup) {
      crossings.push_back(t + dt * (level - y) / (y_next - y));
      level *= 2.0;
    }
    t += dt;
    y = std::max(y_next, 0.0);
    ++out.steps;
  }
  out.last_time = t;
  out.last_value = y;
  if (y <= kBlowup && t > cap) {
    out.blowup = false;
    out.time = t;
    return out;
  }
  out.blowup = true;
  out.time = t;
  const std::size_t n = crossings.size();
  if (n >= 3) {
    const double d1 = crossings[n - 2] - crossings[n - 3];
    const double d2 = crossings[n - 1] - crossings[n - 2];
    if (d1 - d2 > 0.0) out.time = std::max(t, crossings[n - 1] + d2 * d2 / (d1 - d2));
  }
  return out;
}

}  // namespace kaplan
