#include "kaplan/criteria.hpp"

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

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

json clause_json(const HypothesisClause& c) { return {{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}}; }

}  // namespace

std::string_view to_string(TheoremTag tag) {
  switch (tag) {
    case TheoremTag::General: return "general";
    case TheoremTag::GeneralGraph: return "general_graph";
    case TheoremTag::Tree: return "tree";
    case TheoremTag::HomogeneousTree: return "homogeneous_tree";
    case TheoremTag::LatticeGeneralF: return "lattice_general_f";
    case TheoremTag::LatticePower: return "lattice_power";
  }
  return "?";
}

TheoremTag theorem_tag_from_string(std::string_view name) {
  for (TheoremTag t : {TheoremTag::General, TheoremTag::GeneralGraph, TheoremTag::Tree, TheoremTag::HomogeneousTree,
                       TheoremTag::LatticeGeneralF, TheoremTag::LatticePower}) {
    if (to_string(t) == name) return t;
  }
  throw Error(ErrorCode::BadParameter, "unknown theorem tag '" + std::string(name) + "'");
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Certified: return "certified";
    case Verdict::NotCertified: return "not_certified";
    case Verdict::HypothesisViolated: return "hypothesis_violated";
  }
  return "?";
}

// ---------------------------------------------------------------------------

Domain Domain::from_tree(TreeTruncation t) {
  Domain d;
  d.metric = GraphMetric::make(t.graph, MetricKind::Combinatorial);
  d.center = t.root;
  d.shells = t.shells;
  d.tree = std::move(t);
  return d;
}

Domain Domain::from_lattice(LatticeTruncation l) {
  Domain d;
  d.metric = l.metric;
  d.center = l.origin;
  const Vertex origin[] = {l.origin};
  d.shells = shell_decomposition(l.graph, origin);
  d.lattice = std::move(l);
  return d;
}

Domain Domain::custom(WeightedGraph g, Vertex origin) {
  if (!g.contains(origin)) throw Error(ErrorCode::UnknownVertex, "origin is not a vertex");
  Domain d;
  d.metric = GraphMetric::make(g, MetricKind::Combinatorial);
  d.center = origin;
  const Vertex o[] = {origin};
  d.shells = shell_decomposition(g, o);
  d.custom_graph = std::move(g);
  return d;
}

const WeightedGraph& Domain::graph() const {
  if (tree) return tree->graph;
  if (lattice) return lattice->graph;
  return *custom_graph;
}

// ---------------------------------------------------------------------------

PairingInterval pairing(const WeightedGraph& g, const Barrier& bar, std::span<const double> u0, double sup_outside) {
  if (u0.size() != g.size()) throw Error(ErrorCode::BadParameter, "datum and graph disagree on vertex count");
  if (!(sup_outside >= 0.0) || !std::isfinite(sup_outside)) {
    throw Error(ErrorCode::NegativeDatum, "sup of the datum outside the truncation must be finite and >= 0");
  }
  PairingInterval out;
  for (Vertex x = 0; x < g.size(); ++x) {
    const double v = u0[x];
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::NegativeDatum, "u0(" + std::to_string(x) + ") = " + fmt(v) + " is not a finite nonnegative value");
    }
    out.truncated += v * bar.phi[x] * g.mu(x);
  }
  out.lower = out.truncated;
  out.upper = out.truncated + sup_outside * bar.tail_bound;
  return out;
}

DegreeCheck check_bounded_weighted_degree(const WeightedGraph& g) {
  DegreeCheck out;
  out.observed = g.max_weighted_degree();
  const FamilyTag& fam = g.family();
  if (fam.kind == "tree") {
    const auto it = fam.params.find("sup_branching");
    if (it != fam.params.end() && it->is_number()) {
      out.declared = it->get<double>() + 1.0;
      out.note = "tree family: sup Deg = B + 1";
    } else {
      out.note = "tree family: branching unbounded";
    }
  } else if (fam.kind == "lattice") {
    out.declared = 1.0;
    out.note = "lattice family: Deg = 1";
  } else {
    const auto it = fam.params.find("declared_sup_degree");
    if (it != fam.params.end()) {
      if (it->is_number()) {
        out.declared = it->get<double>();
        out.note = "declared by the family";
      } else {
        out.note = "declared unbounded";
      }
    } else {
      out.declared = out.observed;
      out.note = "finite graph: observed maximum";
    }
  }
  out.bounded = out.declared.has_value() && std::isfinite(*out.declared);
  return out;
}

LatticeForms lattice_forms(int N, double p, double k, double gaussian_mass) {
  if (N < 1) throw Error(ErrorCode::BadParameter, "lattice dimension must be >= 1");
  if (!(p > 1.0)) throw Error(ErrorCode::BadParameter, "power-law lattice form needs p > 1");
  if (!(k > 0.0)) throw Error(ErrorCode::NonpositiveK, "k must be positive");
  const double th = std::pow(theta(k / std::numbers::pi), N);
  LatticeForms out;
  out.gaussian_mass = gaussian_mass;
  out.phi0 = gaussian_mass / (2.0 * N * th);
  out.s0 = std::pow(2.0 * k * N, 1.0 / (p - 1.0));
  out.rhs_power = std::pow(2.0 * N, p / (p - 1.0)) * th * std::pow(k, 1.0 / (p - 1.0));
  out.general_form = out.phi0 > out.s0;
  out.power_form = gaussian_mass > out.rhs_power;
  return out;
}

// ---------------------------------------------------------------------------

std::vector<std::string> CriterionReport::failed_hypotheses() const {
  std::vector<std::string> out;
  for (const auto& c : checklist) {
    if (!c.passed) out.push_back(c.name);
  }
  return out;
}

json CriterionReport::to_json() const {
  json j;
  j["theorem_tag"] = std::string(to_string(tag));
  j["verdict"] = std::string(to_string(verdict));
  j["pairing_value"] = pairing_value.lower;
  j["pairing_interval"] = {pairing_value.lower, pairing_value.upper};
  j["threshold"] = threshold;
  j["margin"] = margin;
  j["lambda_used"] = lambda_used;
  j["hypothesis_checklist"] = json::array();
  for (const auto& c : checklist) j["hypothesis_checklist"].push_back(clause_json(c));
  j["predicted_time_bound"] = predicted_time_bound ? json(*predicted_time_bound) : json(nullptr);
  if (lattice) {
    j["lattice_forms"] = {{"gaussian_mass", lattice->gaussian_mass}, {"phi0", lattice->phi0},
                          {"s0", lattice->s0},                       {"rhs_power", lattice->rhs_power},
                          {"general_form", lattice->general_form},   {"power_form", lattice->power_form}};
  }
  if (barrier) j["barrier"] = barrier->to_json();
  if (certificate) j["certificate"] = certificate->to_json();
  if (!sweep.empty()) {
    j["lambda_sweep"] = json::array();
    for (const auto& s : sweep) j["lambda_sweep"].push_back({{"lambda", s.lambda}, {"threshold", s.threshold}, {"margin", s.margin}});
  }
  j["notes"] = notes;
  return j;
}

namespace {

struct Evaluation {
  CriterionReport rep;
  void add(std::string name, bool passed, std::string detail = {}) {
    rep.checklist.push_back({std::move(name), passed, std::move(detail)});
  }
  [[nodiscard]] bool all_pass() const {
    return std::all_of(rep.checklist.begin(), rep.checklist.end(), [](const auto& c) { return c.passed; });
  }
};

double covered_radius(const Domain& dom) {
  if (dom.lattice) return dom.lattice->spec.radius;
  if (dom.tree) return dom.tree->depth;
  return dom.shells.max_radius();
}

Barrier build_or_fail(auto&& make) {
  try {
    return make();
  } catch (const Error& e) {
    std::vector<std::string> details = e.details();
    details.insert(details.begin(), std::string(to_string(e.code())));
    throw Error(ErrorCode::BarrierConstructionFailed, std::string("barrier construction failed: ") + e.what(),
                std::move(details));
  }
}

}  // namespace

CriterionReport evaluate_criterion(TheoremTag tag, const Domain& dom, std::span<const double> u0,
                                   const CriterionParams& params) {
  const WeightedGraph& g = dom.graph();
  Evaluation ev;
  ev.rep.tag = tag;
  const Nonlinearity& f = params.f;

  if (u0.size() != g.size()) throw Error(ErrorCode::BadParameter, "datum and graph disagree on vertex count");
  for (Vertex x = 0; x < g.size(); ++x) {
    if (!(u0[x] >= 0.0) || !std::isfinite(u0[x])) {
      throw Error(ErrorCode::NegativeDatum, "u0(" + std::to_string(x) + ") = " + fmt(u0[x]) + " is not a finite nonnegative value");
    }
  }

  const NonlinearityReport nr = validate_hypotheses(f, default_sample_grid());
  for (const auto& c : nr.clauses) ev.add("f: " + c.name, c.passed, c.detail);

  const MetricDiagnostics md = metric_diagnostics(g, dom.metric.kind());
  ev.add("(PM)", md.pm_ok(), std::string(to_string(dom.metric.kind())) + " metric, jump size " + fmt(md.jump_size));

  const DegreeCheck deg = check_bounded_weighted_degree(g);
  ev.add("bounded weighted degree", deg.bounded,
         "observed " + fmt(deg.observed) + (deg.declared ? ", declared " + fmt(*deg.declared) : ", declared unbounded") +
             "; " + deg.note);

  std::optional<Barrier> bar;
  double theorem_lambda = 0.0;
  const char* lambda_name = "lambda";

  switch (tag) {
    case TheoremTag::General: {
      if (!params.barrier) throw Error(ErrorCode::BarrierConstructionFailed, "the general criterion needs a barrier");
      if (params.barrier->phi.size() != g.size()) {
        throw Error(ErrorCode::BarrierConstructionFailed, "barrier and graph disagree on vertex count");
      }
      bar = *params.barrier;
      theorem_lambda = bar->lambda;
      lambda_name = "lambda >= barrier lambda";
      break;
    }
    case TheoremTag::GeneralGraph: {
      if (!params.a) throw Error(ErrorCode::BarrierConstructionFailed, "general_graph needs parameter a");
      const double a = *params.a;
      std::optional<double> growth = params.declared_growth;
      std::optional<double> sup_outer = params.declared_sup_outer;
      bool degrees_bounded = true;
      std::string degree_detail = "observed on the truncation";
      if (dom.tree) {
        const auto B = dom.tree->branching.sup();
        degrees_bounded = B.has_value();
        if (B) {
          if (!growth) growth = static_cast<double>(*B);
          if (!sup_outer) sup_outer = static_cast<double>(*B);
          degree_detail = "tree family: sup D+ = B = " + fmt(*B) + ", sup D- = 1";
        } else {
          degree_detail = "tree family: branching unbounded";
        }
      } else if (sup_outer) {
        degree_detail = "declared sup D+ = " + fmt(*sup_outer);
      }
      ev.add("sup D+ < inf and sup D- < inf", degrees_bounded, degree_detail);
      const bool converges = growth && std::isfinite(*growth) && *growth * std::exp(-a) < 1.0;
      ev.add("series convergent", converges,
             growth ? "declared growth " + fmt(*growth) + ", G e^{-a} = " + fmt(*growth * std::exp(-a))
                    : "no growth bound declared");
      if (!converges || !degrees_bounded) break;
      bar = build_or_fail([&] { return barrier_general(g, dom.shells, a, growth, sup_outer); });
      theorem_lambda = bar->lambda;
      lambda_name = "lambda >= sup D+";
      break;
    }
    case TheoremTag::Tree:
    case TheoremTag::HomogeneousTree: {
      if (!dom.tree) throw Error(ErrorCode::BarrierConstructionFailed, "tree criteria need a tree domain");
      if (!params.a) throw Error(ErrorCode::BarrierConstructionFailed, "tree criteria need parameter a");
      const double a = *params.a;
      const auto& br = dom.tree->branching;
      const bool homogeneous = tag == TheoremTag::HomogeneousTree;
      if (homogeneous) {
        ev.add("constant branching", br.is_constant(), br.to_json().dump());
        if (!br.is_constant()) break;
      }
      const auto B = br.sup();
      ev.add("B < inf", B.has_value(), B ? "B = " + fmt(*B) : "branching unbounded");
      if (!B) break;
      const bool a_ok = a > std::log(static_cast<double>(*B));
      ev.add(homogeneous ? "a > log(b)" : "a > log(B)", a_ok,
             "a = " + fmt(a) + ", log = " + fmt(std::log(static_cast<double>(*B))));
      if (!a_ok) break;
      bar = build_or_fail([&] { return homogeneous ? barrier_homogeneous_tree(*dom.tree, a) : barrier_tree(*dom.tree, a); });
      theorem_lambda = bar->lambda;
      lambda_name = homogeneous ? "lambda >= b" : "lambda >= B";
      break;
    }
    case TheoremTag::LatticeGeneralF:
    case TheoremTag::LatticePower: {
      if (!dom.lattice) throw Error(ErrorCode::BarrierConstructionFailed, "lattice criteria need a lattice domain");
      if (!params.k) throw Error(ErrorCode::BarrierConstructionFailed, "lattice criteria need parameter k");
      const double k = *params.k;
      ev.add("k > 0", k > 0.0 && std::isfinite(k), "k = " + fmt(k));
      if (!(k > 0.0) || !std::isfinite(k)) break;
      if (tag == TheoremTag::LatticePower) {
        const bool pw = f.kind() == NonlinearityKind::Power && f.exponent() > 1.0;
        ev.add("f = u^p, p > 1", pw, f.describe());
        if (!pw) break;
      }
      bar = build_or_fail([&] { return barrier_lattice(*dom.lattice, k); });
      if (tag == TheoremTag::LatticePower) {
        theorem_lambda = *bar->lambda_alternative;
        lambda_name = "lambda = 2kN";
      } else {
        theorem_lambda = bar->lambda;
        lambda_name = "lambda >= 1 - e^{-k}";
      }
      break;
    }
  }

  if (!bar) {
    ev.rep.verdict = Verdict::HypothesisViolated;
    ev.rep.notes.push_back("barrier not constructed: hypotheses fail");
    return std::move(ev.rep);
  }

  const double lambda = params.lambda.value_or(theorem_lambda);
  ev.rep.lambda_used = lambda;
  const bool lambda_ok = tag == TheoremTag::LatticePower
                             ? std::abs(lambda - theorem_lambda) <= 1e-12 * std::max(1.0, theorem_lambda)
                             : lambda >= theorem_lambda;
  ev.add(lambda_name, lambda_ok, "lambda = " + fmt(lambda) + ", theorem value " + fmt(theorem_lambda));

  const double R = params.R.value_or(0.5 * covered_radius(dom));
  BGCertificate cert = verify_BG(g, dom.metric, *bar, R, params.delta, lambda);
  ev.add("(B_G)", cert.ok(), cert.ok() ? "conditions (a)-(d) hold" : "failed clauses: " + [&] {
    std::string s;
    for (const auto& c : cert.failures()) s += (s.empty() ? "" : ",") + c;
    return s;
  }());

  ev.rep.pairing_value = pairing(g, *bar, u0, params.sup_outside);

  bool threshold_ok = true;
  try {
    ev.rep.threshold = s0(f, lambda);
  } catch (const Error& e) {
    threshold_ok = false;
    ev.rep.threshold = std::numeric_limits<double>::infinity();
    ev.add("s0(lambda) finite", false, e.what());
  }
  ev.rep.margin = ev.rep.pairing_value.lower - ev.rep.threshold;
  if (threshold_ok && ev.rep.threshold == 0.0) {
    ev.rep.notes.push_back("s0(lambda) = 0: certified for any nontrivial datum");
  }

  bool exceeds = ev.rep.margin > 0.0;
  if (tag == TheoremTag::LatticePower) {
    const auto& coords = *g.coordinates();
    double mass = 0.0;
    for (Vertex x = 0; x < g.size(); ++x) {
      double r2 = 0.0;
      for (int v : coords.of(x)) r2 += static_cast<double>(v) * v;
      mass += std::exp(-*params.k * r2) * u0[x] * g.mu(x);
    }
    ev.rep.lattice = lattice_forms(dom.lattice->spec.dim, f.exponent(), *params.k, mass);
    exceeds = ev.rep.lattice->power_form;
    if (ev.rep.lattice->power_form != ev.rep.lattice->general_form) {
      ev.rep.notes.push_back("the two lattice forms disagree at this datum (rounding at the threshold)");
    }
  }

  if (!ev.all_pass()) {
    ev.rep.verdict = Verdict::HypothesisViolated;
  } else if (exceeds) {
    ev.rep.verdict = Verdict::Certified;
    try {
      ev.rep.predicted_time_bound = blowup_time_bound(f, lambda, ev.rep.pairing_value.lower).best();
    } catch (const Error& e) {
      ev.rep.notes.push_back(std::string("time bound unavailable: ") + e.what());
    }
  } else {
    ev.rep.verdict = Verdict::NotCertified;
  }

  if (params.lambda_sweep > 0 && threshold_ok) {
    const int n = params.lambda_sweep;
    for (int i = 0; i < n; ++i) {
      const double l = n == 1 ? lambda : lambda * std::pow(10.0, static_cast<double>(i) / (n - 1));
      LambdaSweepPoint pt;
      pt.lambda = l;
      try {
        pt.threshold = s0(f, l);
      } catch (const Error&) {
        pt.threshold = std::numeric_limits<double>::infinity();
      }
      pt.margin = ev.rep.pairing_value.lower - pt.threshold;
      ev.rep.sweep.push_back(pt);
    }
  }

  ev.rep.barrier = std::move(bar);
  ev.rep.certificate = std::move(cert);
  return std::move(ev.rep);
}

void enforce(const CriterionReport& report) {
  if (report.verdict == Verdict::HypothesisViolated) {
    throw Error(ErrorCode::HypothesisViolated, "criterion hypotheses fail", report.failed_hypotheses());
  }
}

}  // namespace kaplan
