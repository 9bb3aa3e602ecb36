#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kaplan/criteria.hpp"
#include "kaplan/error.hpp"
#include "kaplan/theta.hpp"
#include "test_support.hpp"

using namespace kaplan;
using kaplan::testing::Rng;

namespace {

bool has_failed(const CriterionReport& r, const std::string& name) {
  const auto f = r.failed_hypotheses();
  return std::find(f.begin(), f.end(), name) != f.end();
}

VertexFunction delta_at(std::size_t n, Vertex x, double amplitude) {
  VertexFunction u(n, 0.0);
  u[x] = amplitude;
  return u;
}

Domain binary_tree_domain(int depth = 25) { return Domain::from_tree(model_tree_quotient(BranchingFunction::constant(2), depth)); }

CriterionParams tree_params(double a = std::log(3.0)) {
  CriterionParams p;
  p.f = Nonlinearity::power(2.0);
  p.a = a;
  return p;
}

CriterionParams lattice_params(double k = 1.0) {
  CriterionParams p;
  p.f = Nonlinearity::power(2.0);
  p.k = k;
  return p;
}

}  // namespace

TEST(Pairing, HomogeneousTreeRootDelta) {
  const auto dom = binary_tree_domain();
  const auto bar = barrier_homogeneous_tree(*dom.tree, std::log(3.0));
  const auto u0 = delta_at(dom.graph().size(), 0, 5.0);
  EXPECT_NEAR(pairing(dom.graph(), bar, u0).lower, 5.0 / 3.0, 1e-15);
  const VertexFunction zero(dom.graph().size(), 0.0);
  EXPECT_EQ(pairing(dom.graph(), bar, zero).lower, 0.0);
}

TEST(Pairing, LatticeOriginDelta) {
  const auto l = lattice_ball({1, 15});
  const auto bar = barrier_lattice(l, 1.0);
  const double A = 2.5;
  const auto p = pairing(l.graph, bar, delta_at(l.graph.size(), l.origin, A));
  EXPECT_NEAR(p.lower, A / theta(1.0 / std::numbers::pi), 1e-14);
}

TEST(Pairing, TailWidensTheUpperEnd) {
  const auto l = lattice_ball({1, 5});
  const auto bar = barrier_lattice(l, 1.0);
  const auto p = pairing(l.graph, bar, delta_at(l.graph.size(), l.origin, 1.0), 2.0);
  EXPECT_NEAR(p.upper - p.lower, 2.0 * bar.tail_bound, 1e-15 * p.upper);
}

TEST(Pairing, RejectsNegativeDatum) {
  const auto l = lattice_ball({1, 5});
  const auto bar = barrier_lattice(l, 1.0);
  auto u0 = delta_at(l.graph.size(), l.origin, 1.0);
  u0[1] = -1e-3;
  try {
    (void)pairing(l.graph, bar, u0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NegativeDatum);
  }
}

TEST(Pairing, LinearInAmplitude) {
  Rng rng(60);
  const auto l = lattice_ball({2, 6});
  const auto bar = barrier_lattice(l, 0.5);
  const auto u = kaplan::testing::random_function(rng, l.graph.size(), 0.0, 1.0);
  const double base = pairing(l.graph, bar, u).lower;
  for (double A : {0.5, 2.0, 17.0}) {
    VertexFunction v = u;
    for (double& x : v) x *= A;
    EXPECT_NEAR(pairing(l.graph, bar, v).lower, A * base, 1e-14 * A * base);
  }
}

TEST(DegreeCheck, LatticeAndTrees) {
  for (int N = 1; N <= 3; ++N) {
    const auto d = check_bounded_weighted_degree(lattice_ball({N, 4}).graph);
    EXPECT_DOUBLE_EQ(d.observed, 1.0);
    EXPECT_TRUE(d.bounded);
  }
  for (unsigned b : {1u, 2u, 5u}) {
    const auto d = check_bounded_weighted_degree(homogeneous_tree(b, 4).graph);
    EXPECT_TRUE(d.bounded);
    ASSERT_TRUE(d.declared.has_value());
    EXPECT_DOUBLE_EQ(*d.declared, b + 1.0);
  }
  const auto unbounded = check_bounded_weighted_degree(model_tree(BranchingFunction::affine(1, 1), 4).graph);
  EXPECT_FALSE(unbounded.bounded);
}

TEST(Criterion, HomogeneousTreeDemoIsCertified) {
  const auto dom = binary_tree_domain();
  auto p = tree_params();
  p.lambda = 2.0;
  const auto u0 = delta_at(dom.graph().size(), 0, 7.0);
  const auto r = evaluate_criterion(TheoremTag::HomogeneousTree, dom, u0, p);
  EXPECT_EQ(r.verdict, Verdict::Certified) << ::testing::PrintToString(r.failed_hypotheses());
  EXPECT_NEAR(r.pairing_value.lower, 7.0 / 3.0, 1e-14);
  EXPECT_NEAR(r.threshold, 2.0, 1e-15);
  EXPECT_NEAR(r.margin, 1.0 / 3.0, 1e-14);
  ASSERT_TRUE(r.predicted_time_bound.has_value());
  EXPECT_NEAR(*r.predicted_time_bound, 3.0, 1e-12);
  EXPECT_NO_THROW(enforce(r));
}

TEST(Criterion, TreeTheoremAgreesWithHomogeneousOnConstantBranching) {
  const auto dom = binary_tree_domain();
  const auto u0 = delta_at(dom.graph().size(), 0, 7.0);
  const auto h = evaluate_criterion(TheoremTag::HomogeneousTree, dom, u0, tree_params());
  const auto t = evaluate_criterion(TheoremTag::Tree, dom, u0, tree_params());
  EXPECT_EQ(h.verdict, t.verdict);
  EXPECT_NEAR(h.margin, t.margin, 1e-14);
  EXPECT_DOUBLE_EQ(t.lambda_used, 2.0);
}

TEST(Criterion, LowerAmplitudeOnTreeIsNotCertified) {
  const auto dom = binary_tree_domain();
  const auto r = evaluate_criterion(TheoremTag::HomogeneousTree, dom, delta_at(dom.graph().size(), 0, 5.9), tree_params());
  EXPECT_EQ(r.verdict, Verdict::NotCertified);
  EXPECT_LT(r.margin, 0.0);
  EXPECT_FALSE(r.predicted_time_bound.has_value());
}

TEST(Criterion, LatticePowerThresholdNearTwoTheta) {
  const auto l = lattice_ball({1, 20});
  const auto dom = Domain::from_lattice(l);
  const double critical = 2.0 * theta(1.0 / std::numbers::pi);
  EXPECT_NEAR(critical, 3.5453, 1e-4);
  const auto below = evaluate_criterion(TheoremTag::LatticePower, dom,
                                        delta_at(l.graph.size(), l.origin, critical * (1 - 1e-6)), lattice_params());
  const auto above = evaluate_criterion(TheoremTag::LatticePower, dom,
                                        delta_at(l.graph.size(), l.origin, critical * (1 + 1e-6)), lattice_params());
  EXPECT_EQ(below.verdict, Verdict::NotCertified);
  EXPECT_EQ(above.verdict, Verdict::Certified);
  ASSERT_TRUE(above.lattice.has_value());
  EXPECT_NEAR(above.lattice->rhs_power, 4.0 * theta(1.0 / std::numbers::pi), 1e-13);
  EXPECT_NEAR(above.lattice->gaussian_mass, 2.0 * critical * (1 + 1e-6), 1e-12);
  EXPECT_DOUBLE_EQ(above.lambda_used, 2.0);
}

TEST(Criterion, LatticePowerRejectsOtherLambda) {
  const auto l = lattice_ball({1, 10});
  auto p = lattice_params();
  p.lambda = 2.5;
  const auto r = evaluate_criterion(TheoremTag::LatticePower, Domain::from_lattice(l),
                                    delta_at(l.graph.size(), l.origin, 10.0), p);
  EXPECT_EQ(r.verdict, Verdict::HypothesisViolated);
  EXPECT_TRUE(has_failed(r, "lambda = 2kN"));
}

TEST(Criterion, LatticeGeneralFormUsesSmallLambda) {
  const auto l = lattice_ball({2, 10});
  const auto r = evaluate_criterion(TheoremTag::LatticeGeneralF, Domain::from_lattice(l),
                                    delta_at(l.graph.size(), l.origin, 10.0), lattice_params(0.5));
  EXPECT_NEAR(r.lambda_used, 1.0 - std::exp(-0.5), 1e-15);
  EXPECT_EQ(r.verdict, Verdict::Certified);
}

TEST(Criterion, LogBIsAHypothesisViolation) {
  const auto dom = Domain::from_tree(model_tree(BranchingFunction::eventually_periodic({1}, {2, 1}), 12));
  const auto r = evaluate_criterion(TheoremTag::Tree, dom, delta_at(dom.graph().size(), 0, 50.0), tree_params(std::log(2.0)));
  EXPECT_EQ(r.verdict, Verdict::HypothesisViolated);
  EXPECT_TRUE(has_failed(r, "a > log(B)"));
  try {
    enforce(r);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::HypothesisViolated);
    EXPECT_NE(std::find(e.details().begin(), e.details().end(), "a > log(B)"), e.details().end());
  }
}

TEST(Criterion, HomogeneousTagNeedsConstantBranching) {
  const auto dom = Domain::from_tree(model_tree(BranchingFunction::eventually_periodic({3}, {2}), 6));
  const auto r = evaluate_criterion(TheoremTag::HomogeneousTree, dom, delta_at(dom.graph().size(), 0, 50.0), tree_params(2.0));
  EXPECT_TRUE(has_failed(r, "constant branching"));
}

TEST(Criterion, NonOsgoodReactionFailsChecklist) {
  const auto dom = binary_tree_domain(10);
  auto p = tree_params();
  p.f = Nonlinearity::custom("u*log(1+u)");
  const auto r = evaluate_criterion(TheoremTag::HomogeneousTree, dom, delta_at(dom.graph().size(), 0, 50.0), p);
  EXPECT_EQ(r.verdict, Verdict::HypothesisViolated);
  EXPECT_TRUE(has_failed(r, "f: osgood"));
}

TEST(Criterion, MissingParameterIsConstructionFailure) {
  const auto dom = binary_tree_domain(6);
  CriterionParams p;
  try {
    (void)evaluate_criterion(TheoremTag::Tree, dom, delta_at(dom.graph().size(), 0, 1.0), p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BarrierConstructionFailed);
  }
}

TEST(Criterion, GeneralGraphOnTree) {
  const auto dom = Domain::from_tree(model_tree(BranchingFunction::eventually_periodic({3}, {2, 1}), 10));
  auto p = tree_params(1.5);
  p.declared_growth = 3.0;
  const auto r = evaluate_criterion(TheoremTag::GeneralGraph, dom, delta_at(dom.graph().size(), 0, 100.0), p);
  EXPECT_EQ(r.verdict, Verdict::Certified) << ::testing::PrintToString(r.failed_hypotheses());
  EXPECT_DOUBLE_EQ(r.lambda_used, 3.0);
}

TEST(Criterion, GeneralGraphNeedsDeclaredGrowthOnCustomGraphs) {
  Rng rng(61);
  const auto dom = Domain::custom(kaplan::testing::random_graph(rng, 30, 5), 0);
  auto p = tree_params(1.5);
  const auto r = evaluate_criterion(TheoremTag::GeneralGraph, dom, delta_at(dom.graph().size(), 0, 100.0), p);
  EXPECT_EQ(r.verdict, Verdict::HypothesisViolated);
  EXPECT_TRUE(has_failed(r, "series convergent"));
}

TEST(Criterion, GeneralWithSuppliedBarrier) {
  const auto dom = binary_tree_domain();
  auto p = tree_params();
  p.barrier = barrier_homogeneous_tree(*dom.tree, std::log(3.0));
  const auto r = evaluate_criterion(TheoremTag::General, dom, delta_at(dom.graph().size(), 0, 7.0), p);
  EXPECT_EQ(r.verdict, Verdict::Certified);
  EXPECT_NEAR(r.margin, 1.0 / 3.0, 1e-14);
}

TEST(Criterion, ZeroThresholdCertifiesTinyDatum) {
  const auto dom = binary_tree_domain(10);
  auto p = tree_params();
  p.f = Nonlinearity::custom("u^2 + 3*u");
  const auto r = evaluate_criterion(TheoremTag::HomogeneousTree, dom, delta_at(dom.graph().size(), 0, 1e-12), p);
  EXPECT_EQ(r.threshold, 0.0);
  EXPECT_EQ(r.verdict, Verdict::Certified) << ::testing::PrintToString(r.failed_hypotheses());
  EXPECT_FALSE(r.notes.empty());
}

TEST(Criterion, LatticeFormsAreEquivalent) {
  Rng rng(70);
  int compared = 0;
  for (int i = 0; i < 400; ++i) {
    const int N = kaplan::testing::uniform_int(rng, 1, 4);
    const double p = kaplan::testing::uniform(rng, 1.2, 4.0);
    const double k = kaplan::testing::uniform(rng, 0.05, 3.0);
    const double mass = std::exp(kaplan::testing::uniform(rng, -3.0, 6.0));
    const auto lf = lattice_forms(N, p, k, mass);
    const double th = std::pow(theta(k / std::numbers::pi), N);
    const double phi0 = mass / (2.0 * N * th);
    const double s = std::pow(2.0 * k * N, 1.0 / (p - 1.0));
    const double rhs = std::pow(2.0 * N, p / (p - 1.0)) * th * std::pow(k, 1.0 / (p - 1.0));
    EXPECT_NEAR(lf.rhs_power, rhs, 1e-12 * rhs);
    if (std::abs(phi0 / s - 1.0) < 1e-10) continue;
    ++compared;
    EXPECT_EQ(lf.general_form, phi0 > s);
    EXPECT_EQ(lf.power_form, mass > rhs);
    EXPECT_EQ(lf.general_form, lf.power_form) << "N=" << N << " p=" << p << " k=" << k << " mass=" << mass;
  }
  EXPECT_GT(compared, 300);
}

TEST(Criterion, CertificationMonotoneInAmplitude) {
  const auto l = lattice_ball({1, 20});
  const auto dom = Domain::from_lattice(l);
  bool seen = false;
  for (double A = 0.5; A < 10.0; A += 0.25) {
    const auto r = evaluate_criterion(TheoremTag::LatticePower, dom, delta_at(l.graph.size(), l.origin, A), lattice_params());
    const bool c = r.verdict == Verdict::Certified;
    if (seen) EXPECT_TRUE(c) << A;
    seen |= c;
  }
  EXPECT_TRUE(seen);
}

TEST(Criterion, ReportsAreDeterministic) {
  const auto dom = binary_tree_domain();
  auto p = tree_params();
  p.lambda_sweep = 5;
  const auto u0 = delta_at(dom.graph().size(), 0, 7.0);
  const auto a = evaluate_criterion(TheoremTag::HomogeneousTree, dom, u0, p).to_json().dump();
  const auto b = evaluate_criterion(TheoremTag::HomogeneousTree, dom, u0, p).to_json().dump();
  EXPECT_EQ(a, b);
}

TEST(Criterion, LambdaSweepCoversTheRay) {
  const auto dom = binary_tree_domain();
  auto p = tree_params();
  p.lambda_sweep = 4;
  const auto r = evaluate_criterion(TheoremTag::HomogeneousTree, dom, delta_at(dom.graph().size(), 0, 7.0), p);
  ASSERT_EQ(r.sweep.size(), 4u);
  EXPECT_DOUBLE_EQ(r.sweep.front().lambda, 2.0);
  EXPECT_NEAR(r.sweep.back().lambda, 20.0, 1e-12);
  for (std::size_t i = 1; i < r.sweep.size(); ++i) EXPECT_LT(r.sweep[i].margin, r.sweep[i - 1].margin);
}

TEST(Criterion, TagNamesRoundTrip) {
  for (auto t : {TheoremTag::General, TheoremTag::GeneralGraph, TheoremTag::Tree, TheoremTag::HomogeneousTree,
                 TheoremTag::LatticeGeneralF, TheoremTag::LatticePower}) {
    EXPECT_EQ(theorem_tag_from_string(to_string(t)), t);
  }
  EXPECT_THROW((void)theorem_tag_from_string("nope"), Error);
}
