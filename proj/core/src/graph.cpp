#include "kaplan/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <random>

#include "kaplan/error.hpp"

namespace kaplan {

namespace {

void require_vertex(const WeightedGraph& g, Vertex x) {
  if (!g.contains(x)) {
    throw Error(ErrorCode::UnknownVertex, "vertex " + std::to_string(x) + " is not in the graph");
  }
}

// BFS over the vertices accepted by `keep`, returns number reached.
template <class Keep>
std::size_t reach_count(const WeightedGraph& g, Vertex start, Keep keep) {
  std::vector<char> seen(g.size(), 0);
  std::deque<Vertex> queue{start};
  seen[start] = 1;
  std::size_t count = 1;
  while (!queue.empty()) {
    const Vertex x = queue.front();
    queue.pop_front();
    for (const auto& [y, w] : g.neighbors(x)) {
      if (!seen[y] && keep(y)) {
        seen[y] = 1;
        ++count;
        queue.push_back(y);
      }
    }
  }
  return count;
}

}  // namespace

WeightedGraph WeightedGraph::build(GraphSpec spec) {
  WeightedGraph g;
  const std::size_t n = spec.mu.size();
  if (n == 0) throw Error(ErrorCode::BadParameter, "graph needs at least one vertex");
  for (std::size_t x = 0; x < n; ++x) {
    if (!(spec.mu[x] > 0.0) || !std::isfinite(spec.mu[x])) {
      throw Error(ErrorCode::NonpositiveMeasure, "mu(" + std::to_string(x) + ") must be positive and finite");
    }
  }
  if (!spec.boundary.empty() && spec.boundary.size() != n) {
    throw Error(ErrorCode::BadParameter, "boundary mask size does not match vertex count");
  }
  if (spec.coords && spec.coords->flat.size() != n * static_cast<std::size_t>(spec.coords->dim)) {
    throw Error(ErrorCode::BadParameter, "coordinate table size does not match vertex count");
  }

  std::vector<Edge> pairs;
  pairs.reserve(spec.edges.size());
  for (const Edge& e : spec.edges) {
    if (e.u >= n || e.v >= n) {
      throw Error(ErrorCode::UnknownVertex, "edge endpoint outside the vertex set");
    }
    if (e.u == e.v) {
      throw Error(ErrorCode::SelfLoop, "omega(x,x) must vanish; got edge at vertex " + std::to_string(e.u));
    }
    if (!std::isfinite(e.w) || e.w < 0.0) {
      throw Error(ErrorCode::InvalidWeight, "edge weights must be finite and nonnegative");
    }
    if (e.w == 0.0) continue;
    pairs.push_back({std::min(e.u, e.v), std::max(e.u, e.v), e.w});
  }
  std::sort(pairs.begin(), pairs.end(), [](const Edge& a, const Edge& b) {
    return a.u != b.u ? a.u < b.u : a.v < b.v;
  });
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (!g.edges_.empty() && g.edges_.back().u == pairs[i].u && g.edges_.back().v == pairs[i].v) {
      if (g.edges_.back().w != pairs[i].w) {
        throw Error(ErrorCode::AsymmetricWeight, "omega(" + std::to_string(pairs[i].u) + "," +
                                                     std::to_string(pairs[i].v) + ") listed with two weights");
      }
      continue;
    }
    g.edges_.push_back(pairs[i]);
  }

  g.mu_ = std::move(spec.mu);
  g.boundary_.assign(n, 0);
  for (std::size_t x = 0; x < spec.boundary.size(); ++x) g.boundary_[x] = spec.boundary[x] ? 1 : 0;

  std::vector<std::size_t> count(n, 0);
  for (const Edge& e : g.edges_) {
    ++count[e.u];
    ++count[e.v];
  }
  g.offsets_.assign(n + 1, 0);
  for (std::size_t x = 0; x < n; ++x) g.offsets_[x + 1] = g.offsets_[x] + count[x];
  g.adjacency_.resize(g.offsets_[n]);
  std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
  for (const Edge& e : g.edges_) {
    g.adjacency_[cursor[e.u]++] = {e.v, e.w};
    g.adjacency_[cursor[e.v]++] = {e.u, e.w};
  }
  g.degree_.assign(n, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    auto first = g.adjacency_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[x]);
    auto last = g.adjacency_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[x + 1]);
    std::sort(first, last, [](const Neighbor& a, const Neighbor& b) { return a.v < b.v; });
    double deg = 0.0;
    for (auto it = first; it != last; ++it) deg += it->w;
    g.degree_[x] = deg;
  }
  g.family_ = std::move(spec.family);
  g.coords_ = std::move(spec.coords);

  if (reach_count(g, 0, [](Vertex) { return true; }) != n) {
    throw Error(ErrorCode::Disconnected, "graph is not connected");
  }
  const auto interior = g.interior_vertices();
  if (!interior.empty()) {
    const auto reached = reach_count(g, interior.front(), [&g](Vertex y) { return g.is_interior(y); });
    if (reached != interior.size()) {
      throw Error(ErrorCode::Disconnected, "interior vertices do not form a connected subgraph");
    }
  }
  return g;
}

double WeightedGraph::weight(Vertex x, Vertex y) const {
  const auto nb = neighbors(x);
  auto it = std::lower_bound(nb.begin(), nb.end(), y, [](const Neighbor& a, Vertex v) { return a.v < v; });
  return (it != nb.end() && it->v == y) ? it->w : 0.0;
}

std::vector<Vertex> WeightedGraph::interior_vertices() const {
  std::vector<Vertex> out;
  out.reserve(size());
  for (Vertex x = 0; x < size(); ++x) {
    if (is_interior(x)) out.push_back(x);
  }
  return out;
}

std::size_t WeightedGraph::boundary_count() const {
  return static_cast<std::size_t>(std::count(boundary_.begin(), boundary_.end(), 1));
}

double WeightedGraph::max_weighted_degree() const {
  double best = 0.0;
  bool any_interior = false;
  for (Vertex x = 0; x < size(); ++x) {
    if (is_interior(x)) {
      any_interior = true;
      best = std::max(best, weighted_degree(x));
    }
  }
  if (!any_interior) {
    for (Vertex x = 0; x < size(); ++x) best = std::max(best, weighted_degree(x));
  }
  return best;
}

bool operator==(const WeightedGraph& a, const WeightedGraph& b) {
  if (a.mu_ != b.mu_ || a.boundary_ != b.boundary_ || a.family_ != b.family_ || a.coords_ != b.coords_) {
    return false;
  }
  if (a.edges_.size() != b.edges_.size()) return false;
  for (std::size_t i = 0; i < a.edges_.size(); ++i) {
    const Edge& x = a.edges_[i];
    const Edge& y = b.edges_[i];
    if (x.u != y.u || x.v != y.v || x.w != y.w) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

double laplacian(const WeightedGraph& g, std::span<const double> f, Vertex x) {
  require_vertex(g, x);
  double acc = 0.0;
  const double fx = f[x];
  for (const auto& [y, w] : g.neighbors(x)) acc += w * (f[y] - fx);
  return acc / g.mu(x);
}

VertexFunction laplacian(const WeightedGraph& g, std::span<const double> f) {
  VertexFunction out(g.size());
  for (Vertex x = 0; x < g.size(); ++x) {
    double acc = 0.0;
    const double fx = f[x];
    for (const auto& [y, w] : g.neighbors(x)) acc += w * (f[y] - fx);
    out[x] = acc / g.mu(x);
  }
  return out;
}

IdentityCheck integration_by_parts_residual(const WeightedGraph& g, std::span<const double> f,
                                            std::span<const double> h) {
  IdentityCheck out;
  for (Vertex x = 0; x < g.size(); ++x) {
    if (h[x] == 0.0) continue;
    if (g.is_boundary(x)) {
      throw Error(ErrorCode::SupportTouchesBoundary,
                  "supp(h) contains boundary vertex " + std::to_string(x));
    }
    const double term = laplacian(g, f, x) * h[x] * g.mu(x);
    out.lhs += term;
    out.scale += std::abs(term);
  }
  // -(1/2) sum over ordered pairs == -sum over unordered edges
  for (const Edge& e : g.edges()) {
    const double term = e.w * (f[e.v] - f[e.u]) * (h[e.v] - h[e.u]);
    out.rhs -= term;
    out.scale += std::abs(term);
  }
  out.residual = std::abs(out.lhs - out.rhs);
  return out;
}

IdentityCheck laplacian_product_residual(const WeightedGraph& g, std::span<const double> f,
                                         std::span<const double> h, Vertex x) {
  require_vertex(g, x);
  IdentityCheck out;
  const double mu = g.mu(x);
  double lap_fh = 0.0, lap_f = 0.0, lap_h = 0.0, cross = 0.0;
  for (const auto& [y, w] : g.neighbors(x)) {
    const double df = f[y] - f[x];
    const double dh = h[y] - h[x];
    lap_fh += w * (f[y] * h[y] - f[x] * h[x]);
    lap_f += w * df;
    lap_h += w * dh;
    cross += w * df * dh;
    out.scale += w * (std::abs(f[y] * h[y]) + std::abs(f[x] * h[x]) + std::abs(df * dh)) / mu;
  }
  out.lhs = lap_fh / mu;
  out.rhs = f[x] * (lap_h / mu) + h[x] * (lap_f / mu) + cross / mu;
  out.residual = std::abs(out.lhs - out.rhs);
  return out;
}

// ---------------------------------------------------------------------------

std::string_view to_string(MetricKind kind) {
  return kind == MetricKind::Combinatorial ? "combinatorial" : "lattice-euclidean";
}

MetricKind metric_kind_from_string(std::string_view name) {
  if (name == "combinatorial") return MetricKind::Combinatorial;
  if (name == "lattice-euclidean" || name == "euclidean") return MetricKind::LatticeEuclidean;
  throw Error(ErrorCode::BadParameter, "unknown metric '" + std::string(name) + "'");
}

std::vector<int> bfs_distances(const WeightedGraph& g, std::span<const Vertex> sources) {
  std::vector<int> dist(g.size(), -1);
  std::deque<Vertex> queue;
  for (Vertex s : sources) {
    require_vertex(g, s);
    if (dist[s] != 0) {
      dist[s] = 0;
      queue.push_back(s);
    }
  }
  while (!queue.empty()) {
    const Vertex x = queue.front();
    queue.pop_front();
    for (const auto& [y, w] : g.neighbors(x)) {
      if (dist[y] < 0) {
        dist[y] = dist[x] + 1;
        queue.push_back(y);
      }
    }
  }
  return dist;
}

namespace {

double euclidean(const WeightedGraph& g, Vertex x, Vertex y) {
  const auto& coords = g.coordinates();
  if (!coords) throw Error(ErrorCode::BadParameter, "lattice-euclidean metric needs vertex coordinates");
  const auto a = coords->of(x);
  const auto b = coords->of(y);
  std::int64_t sq = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::int64_t d = a[i] - b[i];
    sq += d * d;
  }
  return std::sqrt(static_cast<double>(sq));
}

}  // namespace

GraphMetric GraphMetric::make(const WeightedGraph& g, MetricKind kind) {
  GraphMetric m;
  m.kind_ = kind;
  const auto diag = metric_diagnostics(g, kind, 1.0);
  m.jump_size_ = diag.jump_size;
  m.intrinsic_ = {1.0, diag.c0};
  return m;
}

double GraphMetric::distance(const WeightedGraph& g, Vertex x, Vertex y) const {
  require_vertex(g, x);
  require_vertex(g, y);
  if (kind_ == MetricKind::LatticeEuclidean) return euclidean(g, x, y);
  if (x == y) return 0.0;
  const Vertex src[] = {x};
  const int d = bfs_distances(g, src)[y];
  return d < 0 ? std::numeric_limits<double>::infinity() : static_cast<double>(d);
}

std::vector<double> GraphMetric::distances_from(const WeightedGraph& g, Vertex x0) const {
  require_vertex(g, x0);
  std::vector<double> out(g.size());
  if (kind_ == MetricKind::LatticeEuclidean) {
    for (Vertex x = 0; x < g.size(); ++x) out[x] = euclidean(g, x, x0);
    return out;
  }
  const Vertex src[] = {x0};
  const auto d = bfs_distances(g, src);
  for (Vertex x = 0; x < g.size(); ++x) {
    out[x] = d[x] < 0 ? std::numeric_limits<double>::infinity() : static_cast<double>(d[x]);
  }
  return out;
}

double GraphMetric::edge_length(const WeightedGraph& g, Vertex x, Vertex y) const {
  if (kind_ == MetricKind::LatticeEuclidean) return euclidean(g, x, y);
  return x == y ? 0.0 : 1.0;
}

MetricDiagnostics metric_diagnostics(const WeightedGraph& g, MetricKind kind, double q) {
  MetricDiagnostics out;
  out.q = q;
  auto length = [&](Vertex x, Vertex y) {
    return kind == MetricKind::LatticeEuclidean ? euclidean(g, x, y) : 1.0;
  };
  for (const Edge& e : g.edges()) out.jump_size = std::max(out.jump_size, length(e.u, e.v));

  for (Vertex x = 0; x < g.size(); ++x) {
    double acc = 0.0;
    for (const auto& [y, w] : g.neighbors(x)) acc += w * std::pow(length(x, y), q);
    out.c0 = std::max(out.c0, acc / g.mu(x));
  }
  out.jump_ok = out.jump_size > 0.0 && std::isfinite(out.jump_size);
  out.intrinsic_ok = out.c0 > 0.0 && std::isfinite(out.c0);
  const std::string& fam = g.family().kind;
  if (fam == "tree" || fam == "lattice") {
    out.finite_balls = true;
    out.balls_note = "balls finite for the declared " + fam + " family";
  } else {
    out.finite_balls = true;
    out.balls_note = "finite truncation; infinite extension not declared";
  }
  return out;
}

std::size_t count_metric_axiom_violations(const WeightedGraph& g, const GraphMetric& m, std::size_t samples,
                                          std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Vertex> pick(0, static_cast<Vertex>(g.size() - 1));
  std::size_t violations = 0;
  constexpr double tol = 1e-12;
  for (std::size_t i = 0; i < samples; ++i) {
    const Vertex x = pick(rng), y = pick(rng), z = pick(rng);
    const double dxy = m.distance(g, x, y);
    if (m.distance(g, x, x) != 0.0) ++violations;
    if (std::abs(dxy - m.distance(g, y, x)) > tol) ++violations;
    if (dxy > m.distance(g, x, z) + m.distance(g, z, y) + tol) ++violations;
  }
  return violations;
}

// ---------------------------------------------------------------------------

ShellDecomposition shell_decomposition(const WeightedGraph& g, std::span<const Vertex> origin,
                                       std::optional<int> r_max) {
  if (origin.empty()) throw Error(ErrorCode::EmptyOriginSet, "origin set must be nonempty");
  ShellDecomposition sd;
  sd.radius_of.assign(g.size(), -1);
  std::vector<Vertex> frontier;
  for (Vertex x : origin) {
    require_vertex(g, x);
    if (sd.radius_of[x] < 0) {
      sd.radius_of[x] = 0;
      frontier.push_back(x);
      sd.origin.push_back(x);
    }
  }
  const int cap = r_max.value_or(std::numeric_limits<int>::max());
  int r = 0;
  while (!frontier.empty()) {
    double measure = 0.0;
    for (Vertex x : frontier) measure += g.mu(x);
    sd.shell_measure.push_back(measure);
    sd.shells.push_back(frontier);
    if (r >= cap) break;
    std::vector<Vertex> next;
    for (Vertex x : sd.shells.back()) {
      for (const auto& [y, w] : g.neighbors(x)) {
        if (sd.radius_of[y] < 0) {
          sd.radius_of[y] = r + 1;
          next.push_back(y);
        }
      }
    }
    std::sort(next.begin(), next.end());
    frontier = std::move(next);
    ++r;
  }
  return sd;
}

ShellDegrees inner_outer_degrees(const WeightedGraph& g, const ShellDecomposition& sd, Vertex x) {
  require_vertex(g, x);
  const int r = sd.radius(x);
  if (r < 0 || r >= sd.max_radius() || g.is_boundary(x)) {
    throw Error(ErrorCode::RadiusExhausted,
                "outer degree of vertex " + std::to_string(x) + " needs a shell beyond the truncation");
  }
  ShellDegrees d;
  for (const auto& [y, w] : g.neighbors(x)) {
    const int ry = sd.radius(y);
    if (ry == r - 1) d.inner += w;
    else if (ry == r + 1) d.outer += w;
  }
  d.inner /= g.mu(x);
  d.outer /= g.mu(x);
  return d;
}

std::vector<ShellDegrees> all_inner_outer_degrees(const WeightedGraph& g, const ShellDecomposition& sd) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<ShellDegrees> out(g.size(), ShellDegrees{nan, nan});
  for (Vertex x = 0; x < g.size(); ++x) {
    const int r = sd.radius(x);
    if (r < 0 || r >= sd.max_radius() || g.is_boundary(x)) continue;
    out[x] = inner_outer_degrees(g, sd, x);
  }
  return out;
}

VertexFunction SymmetricProfile::lift(const ShellDecomposition& sd) const {
  VertexFunction out(sd.radius_of.size(), 0.0);
  for (std::size_t x = 0; x < out.size(); ++x) {
    const int r = sd.radius_of[x];
    if (r >= 0 && r < static_cast<int>(values.size())) out[x] = values[static_cast<std::size_t>(r)];
  }
  return out;
}

double laplacian_spherical(const ShellDecomposition& sd, std::span<const ShellDegrees> degrees,
                           const SymmetricProfile& p, Vertex x) {
  const int r = sd.radius(x);
  if (r < 0 || r + 1 > p.r_max()) {
    throw Error(ErrorCode::ProfileTooShort, "profile must be defined up to r(x)+1");
  }
  const auto& v = p.values;
  const auto ur = static_cast<std::size_t>(r);
  const ShellDegrees& d = degrees[x];
  double out = d.outer * (v[ur + 1] - v[ur]);
  if (r > 0) out += d.inner * (v[ur - 1] - v[ur]);
  return out;
}

bool is_weakly_spherically_symmetric(const WeightedGraph& g, const ShellDecomposition& sd, double tol) {
  for (int r = 0; r < sd.max_radius(); ++r) {
    std::optional<ShellDegrees> ref;
    for (Vertex x : sd.shells[static_cast<std::size_t>(r)]) {
      if (g.is_boundary(x)) continue;
      const ShellDegrees d = inner_outer_degrees(g, sd, x);
      if (!ref) {
        ref = d;
        continue;
      }
      if (std::abs(d.inner - ref->inner) > tol * std::max(1.0, std::abs(ref->inner)) ||
          std::abs(d.outer - ref->outer) > tol * std::max(1.0, std::abs(ref->outer))) {
        return false;
      }
    }
  }
  return true;
}

WeightedGraph shell_quotient(const WeightedGraph& g, const ShellDecomposition& sd) {
  if (!is_weakly_spherically_symmetric(g, sd)) {
    throw Error(ErrorCode::NotWeaklySphericallySymmetric, "shell quotient needs a WSS truncation");
  }
  const int last = sd.max_radius();
  GraphSpec spec;
  spec.mu = sd.shell_measure;
  spec.boundary.assign(spec.mu.size(), false);
  for (int r = 0; r < last; ++r) {
    for (Vertex x : sd.shells[static_cast<std::size_t>(r)]) {
      if (g.is_boundary(x)) {
        throw Error(ErrorCode::NotWeaklySphericallySymmetric,
                    "shell " + std::to_string(r) + " mixes interior and boundary vertices");
      }
    }
  }
  spec.boundary[static_cast<std::size_t>(last)] = true;
  std::vector<double> between(static_cast<std::size_t>(std::max(last, 0)), 0.0);
  for (int r = 0; r < last; ++r) {
    for (Vertex x : sd.shells[static_cast<std::size_t>(r)]) {
      for (const auto& [y, w] : g.neighbors(x)) {
        if (sd.radius(y) == r + 1) between[static_cast<std::size_t>(r)] += w;
      }
    }
  }
  for (int r = 0; r < last; ++r) {
    spec.edges.push_back({static_cast<Vertex>(r), static_cast<Vertex>(r + 1), between[static_cast<std::size_t>(r)]});
  }
  spec.family = g.family();
  spec.family.params["representation"] = "shell_quotient";
  return WeightedGraph::build(std::move(spec));
}

}  // namespace kaplan
