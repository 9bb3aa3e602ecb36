#include "kaplan/barriers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "kaplan/error.hpp"
#include "kaplan/theta.hpp"

namespace kaplan {

using nlohmann::json;

namespace {

constexpr double kNormTolerance = 1e-8;
constexpr double kResidualTolerance = 1e-12;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

double jump_size_of(const WeightedGraph& g, const GraphMetric& m) {
  if (m.jump_size() > 0.0) return m.jump_size();
  return metric_diagnostics(g, m.kind()).jump_size;
}

}  // namespace

// ---------------------------------------------------------------------------

bool CutoffFunction::in_annulus(Vertex x) const {
  const double d = dist[x];
  return d <= R && !(d < (1.0 - delta) * R - 2.0 * s);
}

CutoffFunction cutoff(const GraphMetric& m, const WeightedGraph& g, Vertex x0, double R, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorCode::BadDelta, "delta must lie in (0,1)");
  if (!(R > 0.0) || !std::isfinite(R)) throw Error(ErrorCode::NonpositiveArgument, "cut-off radius must be positive");
  CutoffFunction chi;
  chi.x0 = x0;
  chi.R = R;
  chi.delta = delta;
  chi.s = jump_size_of(g, m);
  chi.dist = m.distances_from(g, x0);
  chi.values.resize(g.size());
  for (Vertex x = 0; x < g.size(); ++x) {
    const double num = std::max(R - chi.s - chi.dist[x], 0.0);
    chi.values[x] = std::min(num / (delta * R), 1.0);
  }
  return chi;
}

CutoffViolations check_cutoff_lemma(const GraphMetric& m, const WeightedGraph& g, Vertex x0, double R, double delta,
                                    double tol) {
  CutoffViolations v;
  const CutoffFunction chi = cutoff(m, g, x0, R, delta);
  const double c0 = metric_diagnostics(g, m.kind(), 1.0).c0;
  const double s = chi.s;

  for (Vertex x = 0; x < g.size(); ++x) {
    const double c = chi.values[x];
    if (!(c >= 0.0 && c <= 1.0)) ++v.range;
    const bool in_ball = R > s && chi.dist[x] < R - s;
    if ((c > 0.0) != in_ball) ++v.support;
  }

  VertexFunction prev = chi.values;
  for (int j = 1; j <= 3; ++j) {
    const double Rj = std::ldexp(R, j);
    const CutoffFunction next = cutoff(m, g, x0, Rj, delta);
    for (Vertex x = 0; x < g.size(); ++x) {
      if (next.values[x] < prev[x] - tol) ++v.limit;
      if (Rj > (chi.dist[x] + s) / (1.0 - delta) && std::abs(next.values[x] - 1.0) > tol) ++v.limit;
    }
    prev = next.values;
  }

  for (Vertex x = 0; x < g.size(); ++x) {
    const bool ann = chi.in_annulus(x);
    double lap = 0.0;
    for (const auto& [y, w] : g.neighbors(x)) {
      const double grad = chi.values[y] - chi.values[x];
      const double bound = ann ? m.edge_length(g, x, y) / (delta * R) : 0.0;
      if (std::abs(grad) > bound + tol) ++v.gradient;
      lap += w * grad;
    }
    lap /= g.mu(x);
    const double lap_bound = ann ? c0 / (delta * R) : 0.0;
    if (std::abs(lap) > lap_bound + tol) ++v.laplacian;
  }
  return v;
}

// ---------------------------------------------------------------------------

std::string_view to_string(BarrierKind kind) {
  switch (kind) {
    case BarrierKind::General: return "general";
    case BarrierKind::Tree: return "tree";
    case BarrierKind::HomogeneousTree: return "homogeneous_tree";
    case BarrierKind::Lattice: return "lattice";
  }
  return "general";
}

json Barrier::to_json() const {
  json j = {{"kind", to_string(kind)},
            {"center", center},
            {"metric", to_string(metric)},
            {"lambda", lambda},
            {"norm_constant", norm_constant},
            {"truncated_norm", truncated_norm},
            {"tail_bound", tail_bound},
            {"gradient_bound", gradient_bound},
            {"gradient_bound_source", gradient_bound_source},
            {"params", params}};
  if (lambda_alternative) j["lambda_alternative"] = *lambda_alternative;
  if (a) j["a"] = *a;
  if (k) j["k"] = *k;
  if (log_min_phi) j["log_min_phi"] = *log_min_phi;
  return j;
}

double tree_series_tail(const BranchingFunction& b, double a, int L) {
  if (!(a > 0.0)) throw Error(ErrorCode::NonpositiveArgument, "a must be positive");
  if (L < 0) L = 0;
  std::vector<unsigned> prefix, cycle;
  if (b.kind() == BranchingFunction::Kind::Affine) {
    if (!b.sup()) throw Error(ErrorCode::SupBranchingUnbounded, "branching function is unbounded");
    cycle = {*b.sup()};
  } else {
    prefix = b.prefix();
    cycle = b.cycle();
  }
  const auto P0 = static_cast<int>(prefix.size());
  const auto P = static_cast<int>(cycle.size());
  double log_growth = 0.0;
  for (unsigned c : cycle) log_growth += std::log(static_cast<double>(c));
  const double log_q = log_growth - a * P;
  if (!(log_q < 0.0)) {
    throw Error(ErrorCode::SeriesDivergent, "sum S(r) e^{-a r} diverges: cycle growth exceeds e^{a}");
  }
  const double q = std::exp(log_q);

  // log S(r) e^{-a r} walked forward from r = 0
  auto branching_at = [&](int r) -> double {
    if (r < P0) return prefix[static_cast<std::size_t>(r)];
    return cycle[static_cast<std::size_t>((r - P0) % P)];
  };
  double log_term = 0.0;  // r = 0
  const int start = std::max(L, P0);
  for (int r = 0; r < start; ++r) log_term += std::log(branching_at(r)) - a;

  double head = 0.0;
  {
    double lt = 0.0;
    for (int r = 0; r < start; ++r) {
      if (r >= L) head += std::exp(lt);
      lt += std::log(branching_at(r)) - a;
    }
  }
  // one period starting at `start`, then the geometric factor 1/(1-q)
  double period = 0.0;
  double lt = log_term;
  for (int j = 0; j < P; ++j) {
    period += std::exp(lt);
    lt += std::log(branching_at(start + j)) - a;
  }
  return head + period / (1.0 - q);
}

namespace {

void fill_radial(Barrier& bar, const WeightedGraph& g, const ShellDecomposition& sd, double C, double a) {
  bar.phi.assign(g.size(), 0.0);
  for (Vertex x = 0; x < g.size(); ++x) {
    const int r = sd.radius(x);
    if (r < 0) throw Error(ErrorCode::BadParameter, "shell decomposition does not cover the graph");
    bar.phi[x] = C * std::exp(-a * r);
  }
  bar.truncated_norm = 0.0;
  for (Vertex x = 0; x < g.size(); ++x) bar.truncated_norm += bar.phi[x] * g.mu(x);
  bar.log_min_phi = std::log(C) - a * sd.max_radius();
  bar.center = sd.origin.front();
  bar.norm_constant = C;
  bar.a = a;
  bar.metric = MetricKind::Combinatorial;
}

}  // namespace

Barrier barrier_general(const WeightedGraph& g, const ShellDecomposition& sd, double a,
                        std::optional<double> declared_growth, std::optional<double> declared_sup_outer) {
  if (!(a > 0.0) || !std::isfinite(a)) throw Error(ErrorCode::NonpositiveArgument, "a must be positive");
  if (!declared_growth) {
    throw Error(ErrorCode::TailUnbounded, "no growth bound declared for S(r) beyond the truncation");
  }
  const double G = *declared_growth;
  if (!(G > 0.0) || !std::isfinite(G)) throw Error(ErrorCode::TailUnbounded, "declared growth must be finite");
  const double q = G * std::exp(-a);
  if (!(q < 1.0)) {
    throw Error(ErrorCode::SeriesDivergent, "declared growth G = " + fmt(G) + " gives G e^{-a} >= 1");
  }
  const int L = sd.max_radius();
  double head = 0.0;
  for (int r = 0; r <= L; ++r) head += sd.shell_measure[static_cast<std::size_t>(r)] * std::exp(-a * r);
  const double tail = sd.shell_measure[static_cast<std::size_t>(L)] * std::exp(-a * L) * q / (1.0 - q);
  const double C = 1.0 / (head + tail);

  Barrier bar;
  bar.kind = BarrierKind::General;
  fill_radial(bar, g, sd, C, a);
  bar.tail_bound = C * tail;

  double d_plus = 0.0, d_minus = 0.0;
  for (const ShellDegrees& d : all_inner_outer_degrees(g, sd)) {
    if (std::isnan(d.outer)) continue;
    d_plus = std::max(d_plus, d.outer);
    d_minus = std::max(d_minus, d.inner);
  }
  bar.lambda = std::max(d_plus, declared_sup_outer.value_or(0.0));
  bar.gradient_bound = std::max(bar.lambda, d_minus) * (std::exp(a) - std::exp(-a));
  bar.gradient_bound_source = "max(sup D+, sup D-) (e^a - e^-a)";
  bar.params = {{"a", a},
                {"declared_growth", G},
                {"observed_sup_outer_degree", d_plus},
                {"observed_sup_inner_degree", d_minus}};
  if (declared_sup_outer) bar.params["declared_sup_outer_degree"] = *declared_sup_outer;
  return bar;
}

Barrier barrier_tree(const TreeTruncation& tree, double a) {
  const auto B = tree.branching.sup();
  if (!B) throw Error(ErrorCode::SupBranchingUnbounded, "B = sup b(r) must be finite");
  if (!(a > std::log(static_cast<double>(*B)))) {
    throw Error(ErrorCode::ATooSmall, "a = " + fmt(a) + " must exceed log(B) = " + fmt(std::log(*B)),
                {"a > log(B)"});
  }
  const double series = tree_series_tail(tree.branching, a, 0);
  const double C = 1.0 / series;
  Barrier bar;
  bar.kind = BarrierKind::Tree;
  fill_radial(bar, tree.graph, tree.shells, C, a);
  bar.tail_bound = C * tree_series_tail(tree.branching, a, tree.depth + 1);
  bar.lambda = *B;
  bar.gradient_bound = std::max(static_cast<double>(*B), 1.0) * (std::exp(a) - std::exp(-a));
  bar.gradient_bound_source = "max(B, 1) (e^a - e^-a)";
  bar.params = {{"a", a}, {"B", *B}, {"branching", tree.branching.to_json()}, {"depth", tree.depth}};
  return bar;
}

Barrier barrier_homogeneous_tree(const TreeTruncation& tree, double a) {
  if (!tree.branching.is_constant()) {
    throw Error(ErrorCode::BadParameter, "homogeneous-tree barrier needs constant branching");
  }
  const double b = tree.branching(0);
  if (!(a > std::log(b))) {
    throw Error(ErrorCode::ATooSmall, "a = " + fmt(a) + " must exceed log(b) = " + fmt(std::log(b)),
                {"a > log(b)"});
  }
  const double ratio = b * std::exp(-a);
  const double C = 1.0 - ratio;
  Barrier bar;
  bar.kind = BarrierKind::HomogeneousTree;
  fill_radial(bar, tree.graph, tree.shells, C, a);
  bar.tail_bound = std::pow(ratio, tree.depth + 1);
  bar.lambda = b;
  bar.gradient_bound = std::max(b, 1.0) * (std::exp(a) - std::exp(-a));
  bar.gradient_bound_source = "max(b, 1) (e^a - e^-a)";
  bar.params = {{"a", a}, {"b", b}, {"depth", tree.depth}};
  return bar;
}

double lattice_gaussian_laplacian(std::span<const int> x, double k) {
  double r2 = 0.0, ch = 0.0;
  for (int v : x) {
    r2 += static_cast<double>(v) * v;
    ch += std::cosh(2.0 * k * v);
  }
  const double N = static_cast<double>(x.size());
  return std::exp(-k * r2) * (std::exp(-k) / N * ch - 1.0);
}

Barrier barrier_lattice(const LatticeTruncation& lat, double k) {
  if (!(k > 0.0) || !std::isfinite(k)) throw Error(ErrorCode::NonpositiveK, "k must be positive");
  const int N = lat.spec.dim;
  const auto& coords = lat.graph.coordinates();
  if (!coords) throw Error(ErrorCode::BadParameter, "lattice truncation lost its coordinates");
  const double theta_n = std::pow(theta(k / std::numbers::pi), N);
  const double C = 1.0 / (2.0 * N * theta_n);

  Barrier bar;
  bar.kind = BarrierKind::Lattice;
  bar.metric = MetricKind::LatticeEuclidean;
  bar.center = lat.origin;
  bar.k = k;
  bar.norm_constant = C;
  bar.phi.assign(lat.graph.size(), 0.0);
  for (Vertex x = 0; x < lat.graph.size(); ++x) {
    double r2 = 0.0;
    for (int v : coords->of(x)) r2 += static_cast<double>(v) * v;
    bar.phi[x] = C * std::exp(-k * r2);
  }
  for (Vertex x = 0; x < lat.graph.size(); ++x) bar.truncated_norm += bar.phi[x] * lat.graph.mu(x);
  double r2max = 0.0;
  for (Vertex x = 0; x < lat.graph.size(); ++x) {
    double r2 = 0.0;
    for (int v : coords->of(x)) r2 += static_cast<double>(v) * v;
    r2max = std::max(r2max, r2);
  }
  bar.log_min_phi = std::log(C) - k * r2max;
  bar.tail_bound = C * 2.0 * N * lattice_gaussian_tail_bound(N, k, lat.spec.radius);
  bar.lambda = 1.0 - std::exp(-k);
  bar.lambda_alternative = 2.0 * k * N;
  bar.gradient_bound = 4.0 * N * C * theta_n;
  bar.gradient_bound_source = "4 N C theta(k/pi)^N";
  bar.params = {{"k", k}, {"N", N}, {"radius", lat.spec.radius}, {"theta_k_over_pi", theta(k / std::numbers::pi)}};
  return bar;
}

// ---------------------------------------------------------------------------

bool BGCertificate::ok() const {
  return std::all_of(clauses.begin(), clauses.end(), [](const BGClause& c) { return c.passed; });
}

std::vector<std::string> BGCertificate::failures() const {
  std::vector<std::string> out;
  for (const auto& c : clauses) {
    if (!c.passed) out.push_back("(" + c.name + ") " + c.detail);
  }
  return out;
}

json BGCertificate::to_json() const {
  json cl = json::array();
  for (const auto& c : clauses) {
    cl.push_back({{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"detail", c.detail}});
  }
  return {{"ok", ok()},
          {"lambda", lambda},
          {"R", R},
          {"delta", delta},
          {"min_phi", min_phi},
          {"norm_gap", norm_gap},
          {"annulus_sum", annulus_sum},
          {"global_sum", global_sum},
          {"C1", c1},
          {"C1_closed_form", c1_closed_form},
          {"min_d_residual", min_d_residual},
          {"argmin_d", argmin_d},
          {"clauses", std::move(cl)}};
}

BGCertificate verify_BG(const WeightedGraph& g, const GraphMetric& m, const Barrier& bar, double R, double delta,
                        std::optional<double> lambda) {
  if (bar.phi.size() != g.size()) throw Error(ErrorCode::BadParameter, "barrier and graph disagree on vertex count");
  if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorCode::BadDelta, "delta must lie in (0,1)");
  BGCertificate cert;
  cert.lambda = lambda.value_or(bar.lambda);
  cert.R = R;
  cert.delta = delta;

  cert.min_phi = *std::min_element(bar.phi.begin(), bar.phi.end());
  if (cert.min_phi > 0.0 || !bar.log_min_phi) {
    cert.clauses.push_back({"a", cert.min_phi > 0.0, cert.min_phi, "min phi = " + fmt(cert.min_phi)});
  } else {
    const bool pos = std::isfinite(*bar.log_min_phi);
    cert.clauses.push_back({"a", pos, cert.min_phi,
                            "phi underflows; closed-form min log phi = " + fmt(*bar.log_min_phi)});
  }

  double norm = 0.0;
  for (Vertex x = 0; x < g.size(); ++x) norm += bar.phi[x] * g.mu(x);
  cert.norm_gap = std::abs(norm + bar.tail_bound - 1.0);
  cert.clauses.push_back({"b", cert.norm_gap <= kNormTolerance, cert.norm_gap,
                          "truncated " + fmt(norm) + " + tail " + fmt(bar.tail_bound)});

  const double s = jump_size_of(g, m);
  const auto dist = m.distances_from(g, bar.center);
  const double inner = (1.0 - delta) * R - 2.0 * s;
  for (Vertex x = 0; x < g.size(); ++x) {
    double row = 0.0;
    for (const auto& [y, w] : g.neighbors(x)) row += w * std::abs(bar.phi[y] - bar.phi[x]);
    cert.global_sum += row;
    if (dist[x] <= R && !(dist[x] < inner)) cert.annulus_sum += row;
  }
  cert.c1_closed_form = bar.gradient_bound > 0.0;
  cert.c1 = cert.c1_closed_form ? bar.gradient_bound : cert.global_sum;
  const double slack = 1e-12 * std::max(1.0, cert.c1);
  const bool c_ok = std::isfinite(cert.c1) && cert.annulus_sum <= cert.global_sum + slack &&
                    cert.global_sum <= cert.c1 + slack;
  std::string c_detail = "annulus " + fmt(cert.annulus_sum) + " <= global " + fmt(cert.global_sum) + " <= C1 " +
                         fmt(cert.c1);
  c_detail += cert.c1_closed_form ? " (" + bar.gradient_bound_source + ")"
                                  : " (verified on truncation, unbounded tail unproven)";
  cert.clauses.push_back({"c", c_ok, cert.annulus_sum, c_detail});

  cert.min_d_residual = std::numeric_limits<double>::infinity();
  for (Vertex x = 0; x < g.size(); ++x) {
    if (g.is_boundary(x)) continue;
    const double r = laplacian(g, bar.phi, x) + cert.lambda * bar.phi[x];
    if (r < cert.min_d_residual) {
      cert.min_d_residual = r;
      cert.argmin_d = x;
    }
  }
  cert.clauses.push_back({"d", cert.min_d_residual >= -kResidualTolerance, cert.min_d_residual,
                          "min Delta phi + lambda phi = " + fmt(cert.min_d_residual) + " at vertex " +
                              std::to_string(cert.argmin_d)});
  return cert;
}

void enforce(const BGCertificate& cert) {
  if (!cert.ok()) throw Error(ErrorCode::ConditionFailed, "property (B_G) fails", cert.failures());
}

double boundary_adjacent_mass(const WeightedGraph& g, const Barrier& bar) {
  double mass = 0.0;
  for (Vertex x = 0; x < g.size(); ++x) {
    if (g.is_boundary(x)) continue;
    for (const auto& [y, w] : g.neighbors(x)) {
      if (g.is_boundary(y)) {
        mass += bar.phi[x] * g.mu(x);
        break;
      }
    }
  }
  return mass;
}

}  // namespace kaplan
