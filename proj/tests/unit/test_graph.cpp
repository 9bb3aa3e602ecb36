#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "kaplan/error.hpp"
#include "kaplan/generators.hpp"
#include "kaplan/graph.hpp"
#include "kaplan/graph_io.hpp"
#include "test_support.hpp"

using namespace kaplan;
using kaplan::testing::Rng;

namespace {

WeightedGraph path3() {
  GraphSpec s;
  s.mu = {1, 1, 1};
  s.edges = {{0, 1, 1.0}, {1, 2, 1.0}};
  return WeightedGraph::build(s);
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

Vertex lattice_vertex(const LatticeTruncation& l, std::vector<int> x) {
  const auto& c = *l.graph.coordinates();
  for (Vertex v = 0; v < l.graph.size(); ++v) {
    auto cv = c.of(v);
    if (std::equal(cv.begin(), cv.end(), x.begin())) return v;
  }
  ADD_FAILURE() << "lattice point not found";
  return 0;
}

}  // namespace

TEST(BuildGraph, PathHasDegreeTwoInTheMiddle) {
  const auto g = path3();
  EXPECT_EQ(g.size(), 3u);
  EXPECT_DOUBLE_EQ(g.degree(1), 2.0);
  EXPECT_DOUBLE_EQ(g.weight(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(g.weight(0, 2), 0.0);
}

TEST(BuildGraph, RejectsSelfLoop) {
  GraphSpec s;
  s.mu = {1, 1};
  s.edges = {{0, 0, 1.0}, {0, 1, 1.0}};
  EXPECT_EQ(code_of([&] { (void)WeightedGraph::build(s); }), ErrorCode::SelfLoop);
}

TEST(BuildGraph, RejectsNonpositiveMeasure) {
  GraphSpec s;
  s.mu = {1, 1, 1, 0};
  s.edges = {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}};
  EXPECT_EQ(code_of([&] { (void)WeightedGraph::build(s); }), ErrorCode::NonpositiveMeasure);
}

TEST(BuildGraph, RejectsAsymmetricWeights) {
  GraphSpec s;
  s.mu = {1, 1};
  s.edges = {{0, 1, 1.0}, {1, 0, 2.0}};
  EXPECT_EQ(code_of([&] { (void)WeightedGraph::build(s); }), ErrorCode::AsymmetricWeight);
}

TEST(BuildGraph, AcceptsBothOrientationsWithEqualWeight) {
  GraphSpec s;
  s.mu = {1, 1};
  s.edges = {{0, 1, 1.5}, {1, 0, 1.5}};
  const auto g = WeightedGraph::build(s);
  EXPECT_EQ(g.edges().size(), 1u);
  EXPECT_DOUBLE_EQ(g.weight(1, 0), 1.5);
}

TEST(BuildGraph, RejectsDisconnectedInterior) {
  GraphSpec s;
  s.mu = {1, 1, 1, 1};
  s.edges = {{0, 1, 1.0}, {2, 3, 1.0}};
  EXPECT_EQ(code_of([&] { (void)WeightedGraph::build(s); }), ErrorCode::Disconnected);
}

TEST(BuildGraph, RejectsUnknownVertexAndBadWeight) {
  GraphSpec s;
  s.mu = {1, 1};
  s.edges = {{0, 5, 1.0}};
  EXPECT_EQ(code_of([&] { (void)WeightedGraph::build(s); }), ErrorCode::UnknownVertex);
  s.edges = {{0, 1, -1.0}};
  EXPECT_EQ(code_of([&] { (void)WeightedGraph::build(s); }), ErrorCode::InvalidWeight);
}

TEST(BuildGraph, WeightedDegreeIsDegreeOverMeasure) {
  Rng rng(11);
  for (int t = 0; t < 10; ++t) {
    const auto g = kaplan::testing::random_graph(rng, 30, 5);
    for (Vertex x = 0; x < g.size(); ++x) {
      double deg = 0.0;
      for (const auto& [y, w] : g.neighbors(x)) deg += w;
      EXPECT_DOUBLE_EQ(g.degree(x), deg);
      EXPECT_DOUBLE_EQ(g.degree(x), g.mu(x) * g.weighted_degree(x));
    }
  }
}

TEST(Laplacian, DeltaOnZ1) {
  const auto lat = lattice_ball({1, 5});
  VertexFunction f(lat.graph.size(), 0.0);
  f[lat.origin] = 1.0;
  EXPECT_DOUBLE_EQ(laplacian(lat.graph, f, lat.origin), -1.0);
  EXPECT_DOUBLE_EQ(laplacian(lat.graph, f, lattice_vertex(lat, {1})), 0.5);
  EXPECT_DOUBLE_EQ(laplacian(lat.graph, f, lattice_vertex(lat, {-1})), 0.5);
}

TEST(Laplacian, ConstantFunctionIsHarmonic) {
  Rng rng(3);
  const auto g = kaplan::testing::random_graph(rng, 60, 10);
  const VertexFunction c(g.size(), 3.7);
  for (double v : laplacian(g, c)) EXPECT_EQ(v, 0.0);
}

TEST(Laplacian, LinearProfileAtTreeRoot) {
  const auto t = homogeneous_tree(2, 4);
  VertexFunction f(t.graph.size());
  for (Vertex x = 0; x < t.graph.size(); ++x) f[x] = t.shells.radius(x);
  EXPECT_DOUBLE_EQ(laplacian(t.graph, f, t.root), 2.0);
}

TEST(Laplacian, UnknownVertexThrows) {
  const auto g = path3();
  const VertexFunction f(3, 0.0);
  EXPECT_EQ(code_of([&] { (void)laplacian(g, f, 7); }), ErrorCode::UnknownVertex);
}

TEST(IntegrationByParts, ConstantsGiveZero) {
  const auto t = homogeneous_tree(2, 4);
  const VertexFunction f(t.graph.size(), 2.0);
  VertexFunction h(t.graph.size(), 0.0);
  for (Vertex x = 0; x < t.graph.size(); ++x) h[x] = t.graph.is_interior(x) ? 1.5 : 0.0;
  const auto r = integration_by_parts_residual(t.graph, f, h);
  EXPECT_EQ(r.residual, 0.0);
}

TEST(IntegrationByParts, RandomFunctionDeltaOnFiftyVertexTree) {
  Rng rng(5);
  const auto t = model_tree(BranchingFunction::eventually_periodic({3}, {2, 1}), 6);
  ASSERT_GE(t.graph.size(), 50u);
  const auto f = kaplan::testing::random_function(rng, t.graph.size());
  for (Vertex x : t.graph.interior_vertices()) {
    VertexFunction h(t.graph.size(), 0.0);
    h[x] = 1.0;
    EXPECT_LT(integration_by_parts_residual(t.graph, f, h).relative(), 1e-12);
  }
}

TEST(IntegrationByParts, AdjacentDeltasOnZ1) {
  const auto lat = lattice_ball({1, 4});
  VertexFunction f(lat.graph.size(), 0.0), h(lat.graph.size(), 0.0);
  f[lat.origin] = 1.0;
  h[lattice_vertex(lat, {1})] = 1.0;
  const auto r = integration_by_parts_residual(lat.graph, f, h);
  EXPECT_NEAR(r.lhs, 1.0, 1e-15);  // Delta f(1) h(1) mu(1) = (1/2)(2)
  EXPECT_NEAR(r.rhs, 1.0, 1e-15);
  EXPECT_LT(r.residual, 1e-14);
}

TEST(IntegrationByParts, SupportOnBoundaryThrows) {
  const auto lat = lattice_ball({1, 3});
  VertexFunction f(lat.graph.size(), 1.0), h(lat.graph.size(), 0.0);
  h[lattice_vertex(lat, {3})] = 1.0;
  EXPECT_EQ(code_of([&] { (void)integration_by_parts_residual(lat.graph, f, h); }),
            ErrorCode::SupportTouchesBoundary);
}

TEST(IntegrationByParts, LaplacianHasZeroMeanAgainstMeasure) {
  Rng rng(8);
  for (int t = 0; t < 10; ++t) {
    const auto g = kaplan::testing::random_graph(rng, 40, 8);
    VertexFunction f(g.size(), 0.0);
    for (Vertex x : g.interior_vertices()) {
      bool touches = false;
      for (const auto& [y, w] : g.neighbors(x)) touches |= g.is_boundary(y);
      if (!touches) f[x] = kaplan::testing::uniform(rng, -1, 1);
    }
    double sum = 0.0, scale = 0.0;
    const auto lf = laplacian(g, f);
    for (Vertex x = 0; x < g.size(); ++x) {
      sum += lf[x] * g.mu(x);
      scale += std::abs(lf[x] * g.mu(x));
    }
    EXPECT_LT(std::abs(sum), 1e-12 * std::max(1.0, scale));
  }
}

TEST(ProductFormula, RandomGraphs) {
  Rng rng(13);
  for (int t = 0; t < 20; ++t) {
    const auto g = kaplan::testing::random_graph(rng, kaplan::testing::uniform_int(rng, 5, 180), 10);
    const auto f = kaplan::testing::random_function(rng, g.size());
    const auto h = kaplan::testing::random_function(rng, g.size());
    for (Vertex x = 0; x < g.size(); ++x) EXPECT_LT(laplacian_product_residual(g, f, h, x).relative(), 1e-12);
  }
}

TEST(Metric, LatticeEuclideanDiagnostics) {
  for (int N = 1; N <= 3; ++N) {
    const auto lat = lattice_ball({N, 4});
    const auto md = metric_diagnostics(lat.graph, MetricKind::LatticeEuclidean, 1.0);
    EXPECT_DOUBLE_EQ(md.jump_size, 1.0);
    EXPECT_DOUBLE_EQ(md.c0, 1.0);
    EXPECT_TRUE(md.pm_ok());
  }
}

TEST(Metric, TreeCombinatorialBoundIsSupDegree) {
  const auto t = homogeneous_tree(3, 4);
  const auto md = metric_diagnostics(t.graph, MetricKind::Combinatorial, 1.0);
  EXPECT_DOUBLE_EQ(md.jump_size, 1.0);
  EXPECT_DOUBLE_EQ(md.c0, 4.0);
}

TEST(Metric, SingleEdgeJumpSize) {
  GraphSpec s;
  s.mu = {1, 1};
  s.edges = {{0, 1, 2.5}};
  const auto g = WeightedGraph::build(s);
  EXPECT_DOUBLE_EQ(metric_diagnostics(g, MetricKind::Combinatorial).jump_size, 1.0);
}

TEST(Metric, AxiomsHoldOnSampledTriples) {
  Rng rng(21);
  const auto g = kaplan::testing::random_graph(rng, 50, 5);
  EXPECT_EQ(count_metric_axiom_violations(g, GraphMetric::make(g, MetricKind::Combinatorial), 500, 1), 0u);
  const auto lat = lattice_ball({2, 5});
  EXPECT_EQ(count_metric_axiom_violations(lat.graph, lat.metric, 500, 2), 0u);
}

TEST(Shells, BinaryTreeShellMeasures) {
  const auto t = homogeneous_tree(2, 4);
  const Vertex o[] = {t.root};
  const auto sd = shell_decomposition(t.graph, o);
  ASSERT_GE(sd.shell_measure.size(), 3u);
  EXPECT_DOUBLE_EQ(sd.shell_measure[0], 1.0);
  EXPECT_DOUBLE_EQ(sd.shell_measure[1], 2.0);
  EXPECT_DOUBLE_EQ(sd.shell_measure[2], 4.0);
}

TEST(Shells, Z2FirstShellHasFourVertices) {
  const auto lat = lattice_ball({2, 4});
  const Vertex o[] = {lat.origin};
  const auto sd = shell_decomposition(lat.graph, o);
  EXPECT_EQ(sd.shells[1].size(), 4u);
}

TEST(Shells, ZeroRadiusIsOrigin) {
  Rng rng(4);
  const auto g = kaplan::testing::random_graph(rng, 20, 3);
  const Vertex o[] = {2, 5};
  const auto sd = shell_decomposition(g, o, 0);
  ASSERT_EQ(sd.shells.size(), 1u);
  EXPECT_EQ(sd.shells[0], (std::vector<Vertex>{2, 5}));
}

TEST(Shells, EmptyOriginThrows) {
  const auto g = path3();
  EXPECT_EQ(code_of([&] { (void)shell_decomposition(g, std::span<const Vertex>{}); }), ErrorCode::EmptyOriginSet);
}

TEST(Shells, PartitionCoversEveryVertexOnce) {
  Rng rng(6);
  for (int t = 0; t < 10; ++t) {
    const auto g = kaplan::testing::random_graph(rng, 50, 10);
    const Vertex o[] = {0};
    const auto sd = shell_decomposition(g, o);
    std::vector<int> seen(g.size(), 0);
    for (std::size_t r = 0; r < sd.shells.size(); ++r) {
      EXPECT_GT(sd.shell_measure[r], 0.0);
      for (Vertex x : sd.shells[r]) {
        ++seen[x];
        EXPECT_EQ(sd.radius(x), static_cast<int>(r));
      }
    }
    for (int c : seen) EXPECT_EQ(c, 1);
    const auto bfs = bfs_distances(g, o);
    for (Vertex x = 0; x < g.size(); ++x) EXPECT_EQ(bfs[x], sd.radius(x));
  }
}

TEST(InnerOuter, HomogeneousTreeOffRoot) {
  const auto t = homogeneous_tree(3, 4);
  for (Vertex x = 1; x < t.graph.size(); ++x) {
    if (t.shells.radius(x) >= 3) continue;
    const auto d = inner_outer_degrees(t.graph, t.shells, x);
    EXPECT_DOUBLE_EQ(d.inner, 1.0);
    EXPECT_DOUBLE_EQ(d.outer, 3.0);
  }
  EXPECT_DOUBLE_EQ(inner_outer_degrees(t.graph, t.shells, t.root).inner, 0.0);
}

TEST(InnerOuter, Z2ShowsNonSymmetry) {
  const auto lat = lattice_ball({2, 5});
  const Vertex o[] = {lat.origin};
  const auto sd = shell_decomposition(lat.graph, o);
  const auto d11 = inner_outer_degrees(lat.graph, sd, lattice_vertex(lat, {1, 1}));
  const auto d20 = inner_outer_degrees(lat.graph, sd, lattice_vertex(lat, {2, 0}));
  EXPECT_DOUBLE_EQ(d11.inner, 0.5);
  EXPECT_DOUBLE_EQ(d11.outer, 0.5);
  EXPECT_DOUBLE_EQ(d20.inner, 0.25);
  EXPECT_DOUBLE_EQ(d20.outer, 0.75);
  EXPECT_FALSE(is_weakly_spherically_symmetric(lat.graph, sd));
}

TEST(InnerOuter, LastShellIsExhausted) {
  const auto t = homogeneous_tree(2, 3);
  const Vertex leaf = static_cast<Vertex>(t.graph.size() - 1);
  EXPECT_EQ(code_of([&] { (void)inner_outer_degrees(t.graph, t.shells, leaf); }), ErrorCode::RadiusExhausted);
}

TEST(Spherical, ConstantProfileIsZero) {
  const auto t = homogeneous_tree(2, 5);
  const auto deg = all_inner_outer_degrees(t.graph, t.shells);
  SymmetricProfile p{std::vector<double>(6, 4.0)};
  for (Vertex x = 0; x < t.graph.size(); ++x) {
    if (t.shells.radius(x) < 5) EXPECT_EQ(laplacian_spherical(t.shells, deg, p, x), 0.0);
  }
}

TEST(Spherical, ExponentialProfileAtRoot) {
  const auto t = homogeneous_tree(2, 5);
  const auto deg = all_inner_outer_degrees(t.graph, t.shells);
  SymmetricProfile p;
  for (int r = 0; r <= 5; ++r) p.values.push_back(std::exp(-std::log(3.0) * r));
  EXPECT_NEAR(laplacian_spherical(t.shells, deg, p, t.root), -4.0 / 3.0, 1e-15);
}

TEST(Spherical, ShortProfileThrows) {
  const auto t = homogeneous_tree(2, 5);
  const auto deg = all_inner_outer_degrees(t.graph, t.shells);
  SymmetricProfile p{{1.0, 2.0}};
  const Vertex x = t.shells.shells[1].front();
  EXPECT_EQ(code_of([&] { (void)laplacian_spherical(t.shells, deg, p, x); }), ErrorCode::ProfileTooShort);
}

TEST(Spherical, MatchesGenericLaplacianOnTrees) {
  Rng rng(30);
  const auto t = model_tree(BranchingFunction::eventually_periodic({2, 3}, {1, 2}), 8);
  EXPECT_TRUE(is_weakly_spherically_symmetric(t.graph, t.shells));
  const auto deg = all_inner_outer_degrees(t.graph, t.shells);
  for (int trial = 0; trial < 5; ++trial) {
    SymmetricProfile p{kaplan::testing::random_function(rng, 9)};
    const auto f = p.lift(t.shells);
    for (Vertex x : t.graph.interior_vertices()) {
      EXPECT_NEAR(laplacian_spherical(t.shells, deg, p, x), laplacian(t.graph, f, x), 1e-14);
    }
  }
}

TEST(ShellQuotient, PreservesRadialLaplacian) {
  Rng rng(31);
  const auto b = BranchingFunction::eventually_periodic({3}, {2, 1});
  const auto full = model_tree(b, 7);
  const auto q = shell_quotient(full.graph, full.shells);
  const auto direct = model_tree_quotient(b, 7);
  ASSERT_EQ(q.size(), direct.graph.size());
  for (Vertex r = 0; r < q.size(); ++r) {
    EXPECT_DOUBLE_EQ(q.mu(r), direct.graph.mu(r));
    EXPECT_EQ(q.is_boundary(r), direct.graph.is_boundary(r));
    if (r + 1 < q.size()) EXPECT_DOUBLE_EQ(q.weight(r, r + 1), direct.graph.weight(r, r + 1));
  }
  SymmetricProfile p{kaplan::testing::random_function(rng, 8)};
  const auto f = p.lift(full.shells);
  const auto lq = laplacian(q, p.values);
  for (Vertex x : full.graph.interior_vertices()) {
    EXPECT_NEAR(laplacian(full.graph, f, x), lq[static_cast<std::size_t>(full.shells.radius(x))], 1e-13);
  }
}

TEST(ShellQuotient, RejectsNonSymmetricGraph) {
  const auto lat = lattice_ball({2, 5});
  const Vertex o[] = {lat.origin};
  const auto sd = shell_decomposition(lat.graph, o);
  EXPECT_EQ(code_of([&] { (void)shell_quotient(lat.graph, sd); }), ErrorCode::NotWeaklySphericallySymmetric);
}

TEST(GraphIo, RoundTripIsExact) {
  Rng rng(40);
  const auto g = kaplan::testing::random_graph(rng, 40, 6);
  const auto back = graph_from_json(graph_to_json(g));
  EXPECT_TRUE(back == g);
  const auto lat = lattice_ball({2, 3});
  const auto path = std::filesystem::temp_directory_path() / "kaplan_graph_io_test.json";
  save_graph(lat.graph, path);
  const auto loaded = load_graph(path);
  EXPECT_TRUE(loaded == lat.graph);
  EXPECT_EQ(loaded.family().kind, "lattice");
  std::filesystem::remove(path);
}

TEST(GraphIo, MalformedDocumentIsParseError) {
  EXPECT_EQ(code_of([] { (void)graph_from_json(nlohmann::json{{"vertices", 3}}); }), ErrorCode::ParseError);
}
