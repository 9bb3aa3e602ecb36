#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "kaplan/error.hpp"
#include "kaplan/expression.hpp"
#include "kaplan/nonlinearity.hpp"

using namespace kaplan;

namespace {

bool clause_passed(const NonlinearityReport& r, const std::string& name) {
  for (const auto& c : r.clauses) {
    if (c.name == name) return c.passed;
  }
  ADD_FAILURE() << "missing clause " << name;
  return false;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::IoFailure;
}

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
  return out;
}

}  // namespace

TEST(Expression, Precedence) {
  EXPECT_DOUBLE_EQ(Expression::parse("1 + 2 * 3")(0), 7.0);
  EXPECT_DOUBLE_EQ(Expression::parse("2^3^2")(0), 512.0);
  EXPECT_DOUBLE_EQ(Expression::parse("-u^2")(3), -9.0);
  EXPECT_DOUBLE_EQ(Expression::parse("(1 + u) / 2")(3), 2.0);
  EXPECT_DOUBLE_EQ(Expression::parse("u*log(1+u)")(std::exp(1.0) - 1), std::exp(1.0) - 1);
  EXPECT_DOUBLE_EQ(Expression::parse("sqrt(u) + exp(0)")(4), 3.0);
  EXPECT_DOUBLE_EQ(Expression::parse("1.5e2")(0), 150.0);
}

TEST(Expression, RejectsMalformedInput) {
  for (const char* bad : {"", "u +", "(u", "foo(u)", "u u", "2 ** 3", "x"}) {
    EXPECT_EQ(code_of([&] { (void)Expression::parse(bad); }), ErrorCode::ParseError) << bad;
  }
}

TEST(Nonlinearity, JsonRoundTrip) {
  for (const auto& f : {Nonlinearity::power(2.5), Nonlinearity::custom("u^2 + u^3", true), Nonlinearity::zero()}) {
    const auto back = Nonlinearity::from_json(f.to_json());
    EXPECT_EQ(back.to_json(), f.to_json());
    EXPECT_DOUBLE_EQ(back(1.7), f(1.7));
  }
  EXPECT_EQ(code_of([] { (void)Nonlinearity::power(0.0); }), ErrorCode::BadParameter);
}

TEST(Validate, SquareSatisfiesEverything) {
  const auto r = validate_hypotheses(Nonlinearity::power(2), default_sample_grid());
  EXPECT_TRUE(r.ok());
  EXPECT_TRUE(r.violations().empty());
}

TEST(Validate, LinearFailsSuperlinearityAndOsgood) {
  const auto r = validate_hypotheses(Nonlinearity::custom("u"), default_sample_grid());
  EXPECT_FALSE(r.ok());
  EXPECT_FALSE(clause_passed(r, "superlinear"));
  EXPECT_FALSE(clause_passed(r, "osgood"));
  EXPECT_TRUE(clause_passed(r, "f(0)=0"));
}

TEST(Validate, LogarithmicGrowthFailsOsgood) {
  const auto r = validate_hypotheses(Nonlinearity::custom("u*log(1+u)"), default_sample_grid());
  EXPECT_FALSE(clause_passed(r, "osgood"));
  EXPECT_TRUE(clause_passed(r, "convexity"));
}

TEST(Validate, DetectsNonconvexAndNonzeroAtOrigin) {
  const auto sq = validate_hypotheses(Nonlinearity::custom("sqrt(u)"), default_sample_grid());
  EXPECT_FALSE(clause_passed(sq, "convexity"));
  const auto shifted = validate_hypotheses(Nonlinearity::custom("1 + u^2"), default_sample_grid());
  EXPECT_FALSE(clause_passed(shifted, "f(0)=0"));
}

TEST(S0, PowerLawClosedForm) {
  EXPECT_DOUBLE_EQ(s0(Nonlinearity::power(2), 4.0), 4.0);
  EXPECT_DOUBLE_EQ(s0(Nonlinearity::power(3), 4.0), 2.0);
  EXPECT_NEAR(s0(Nonlinearity::power(2), 1e-12), 0.0, 1e-11);
  EXPECT_EQ(code_of([] { (void)s0(Nonlinearity::power(2), -1.0); }), ErrorCode::NonpositiveArgument);
}

TEST(S0, BisectionAgreesWithClosedForm) {
  for (double p : {1.5, 2.0, 3.0}) {
    const auto f = Nonlinearity::power(p);
    const auto g = Nonlinearity::custom("u^" + std::to_string(p));
    for (double lambda : log_grid(1e-3, 1e3, 13)) {
      const double exact = std::pow(lambda, 1.0 / (p - 1.0));
      if (exact > 1e12) continue;
      EXPECT_NEAR(s0(g, lambda), exact, 1e-8 * std::max(1.0, exact)) << "p=" << p << " lambda=" << lambda;
      EXPECT_NEAR(s0_bisection(f, lambda), exact, 1e-8 * std::max(1.0, exact));
    }
  }
}

TEST(S0, LinearHasNoThreshold) {
  EXPECT_EQ(code_of([] { (void)s0(Nonlinearity::custom("2*u"), 3.0); }), ErrorCode::BracketNotFound);
}

TEST(Osgood, QuadratureMatchesClosedForm) {
  for (double p : {1.5, 2.0, 3.0, 5.0}) {
    const auto f = Nonlinearity::power(p);
    for (double y0 : {0.1, 1.0, 2.0, 10.0}) {
      const double exact = std::pow(y0, 1.0 - p) / (p - 1.0);
      EXPECT_NEAR(osgood_quadrature(f, y0), exact, 1e-8 * exact) << p << " " << y0;
      EXPECT_DOUBLE_EQ(osgood_integral(f, y0), exact);
    }
  }
}

TEST(Osgood, DivergentTailIsInfinite) {
  const auto f = Nonlinearity::custom("u*log(1+u)");
  EXPECT_FALSE(osgood_tail(f).converged);
  EXPECT_TRUE(std::isinf(osgood_integral(f, 1.0)));
  EXPECT_TRUE(osgood_tail(Nonlinearity::power(2)).converged);
}

TEST(TimeBound, GenericMatchesClosedForm) {
  const auto tb = blowup_time_bound(Nonlinearity::power(2), 1.0, 2.0);
  EXPECT_DOUBLE_EQ(tb.c, 0.5);
  EXPECT_NEAR(tb.generic, 1.0, 1e-14);
  ASSERT_TRUE(tb.closed_form.has_value());
  EXPECT_NEAR(*tb.closed_form, 1.0, 1e-14);
  EXPECT_NEAR(tb.best(), 1.0, 1e-14);
}

TEST(TimeBound, ZeroLambdaIsExactBlowupTime) {
  const auto tb = blowup_time_bound(Nonlinearity::power(2), 0.0, 1.0);
  EXPECT_DOUBLE_EQ(*tb.closed_form, 1.0);
}

TEST(TimeBound, AtThresholdThrows) {
  EXPECT_EQ(code_of([] { (void)blowup_time_bound(Nonlinearity::power(2), 1.0, 1.0); }), ErrorCode::BelowThreshold);
  EXPECT_EQ(code_of([] { (void)blowup_time_bound(Nonlinearity::power(2), 1.0, 0.5); }), ErrorCode::BelowThreshold);
}

TEST(TimeBound, NonincreasingInDatum) {
  for (const auto& f : {Nonlinearity::power(2), Nonlinearity::power(3), Nonlinearity::custom("u^2 + u^3")}) {
    const double lambda = 1.5;
    const double th = s0(f, lambda);
    double prev = std::numeric_limits<double>::infinity();
    for (double y0 : log_grid(1.01 * th, 100.0 * th, 30)) {
      const double b = blowup_time_bound(f, lambda, y0).best();
      EXPECT_LE(b, prev * (1 + 1e-12));
      prev = b;
    }
  }
}

TEST(OdeOracle, DeterministicExamples) {
  const auto f = Nonlinearity::power(2);
  const auto exact = ode_blowup_oracle(f, 0.0, 1.0, 10.0);
  EXPECT_TRUE(exact.blowup);
  EXPECT_NEAR(exact.time, 1.0, 0.01);
  const auto below = ode_blowup_oracle(f, 1.0, 0.5, 10.0);
  EXPECT_FALSE(below.blowup);
  EXPECT_LT(below.last_value, 0.5);
  const auto above = ode_blowup_oracle(f, 1.0, 2.0, 10.0);
  EXPECT_TRUE(above.blowup);
  EXPECT_LE(above.time, 1.0);
}

TEST(OdeOracle, LemmaBoundHoldsOnGrid) {
  for (const auto& f : {Nonlinearity::power(2), Nonlinearity::power(3), Nonlinearity::custom("u^2 + u^3")}) {
    for (double lambda : {0.1, 1.0, 10.0}) {
      const double th = s0(f, lambda);
      for (double factor : {1.01, 1.2, 2.0, 5.0}) {
        const double y0 = factor * th;
        const double bound = blowup_time_bound(f, lambda, y0).best();
        const auto out = ode_blowup_oracle(f, lambda, y0, 2.0 * bound + 1.0);
        ASSERT_TRUE(out.blowup) << f.describe() << " lambda=" << lambda << " y0=" << y0;
        EXPECT_LE(out.time, bound * 1.01) << f.describe() << " lambda=" << lambda << " y0=" << y0;
      }
    }
  }
}
