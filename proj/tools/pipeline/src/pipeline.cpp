#include "kaplan/pipeline/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <openssl/evp.h>

#include "kaplan/graph_io.hpp"

#ifndef KAPLAN_VERSION
#define KAPLAN_VERSION "0.0.0"
#endif

namespace kaplan::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::Generate: return "generate";
    case Stage::Barrier: return "barrier";
    case Stage::Certify: return "certify";
    case Stage::Run: return "run";
  }
  return "?";
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigInvalid:
    case ErrorCode::BadParameter:
    case ErrorCode::ParseError:
    case ErrorCode::UnknownVertex:
      return 1;
    case ErrorCode::HypothesisViolated:
    case ErrorCode::ConditionFailed:
    case ErrorCode::BarrierConstructionFailed:
    case ErrorCode::ATooSmall:
    case ErrorCode::SeriesDivergent:
    case ErrorCode::TailUnbounded:
    case ErrorCode::SupBranchingUnbounded:
    case ErrorCode::NonpositiveK:
    case ErrorCode::BelowThreshold:
    case ErrorCode::NegativeDatum:
    case ErrorCode::NotWeaklySphericallySymmetric:
    case ErrorCode::Disconnected:
      return 2;
    case ErrorCode::IoFailure:
      return 4;
    default:
      return 3;
  }
}

Error stage_failed(Stage stage, const Error& cause) {
  std::vector<std::string> details{std::string(to_string(stage)), std::string(to_string(cause.code()))};
  for (const auto& d : cause.details()) details.push_back(d);
  return Error(ErrorCode::StageFailed,
               "stage " + std::string(to_string(stage)) + " failed: " + cause.what(),
               std::move(details));
}

ErrorCode stage_cause(const Error& e) {
  if (e.code() != ErrorCode::StageFailed || e.details().size() < 2) return e.code();
  for (int c = 0; c <= static_cast<int>(ErrorCode::IoFailure); ++c) {
    if (to_string(static_cast<ErrorCode>(c)) == e.details()[1]) return static_cast<ErrorCode>(c);
  }
  return e.code();
}

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, data.data(), data.size()) != 1 || EVP_DigestFinal_ex(ctx, md, &len) != 1) {
    EVP_MD_CTX_free(ctx);
    throw Error(ErrorCode::IoFailure, "SHA-256 failed");
  }
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> opt_from(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<double>();
}

Artifact write_artifact(const std::string& name, const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  out << content;
  out.close();
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
  return {name, path, sha256_hex(content)};
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string trajectory_csv(const Trajectory& tr) {
  std::string out = "time,sup_norm,phi,residual,dt,flux_bound\n";
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    out += num(tr.times[i]) + "," + num(tr.sup_norm[i]) + ",";
    out += (i < tr.kaplan.size() ? num(tr.kaplan[i]) : "") + ",";
    out += (i < tr.residual.size() ? num(tr.residual[i]) : "") + ",";
    out += num(tr.dt[i]) + ",";
    out += (i < tr.flux_bound.size() ? num(tr.flux_bound[i]) : "") + "\n";
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

json SummaryRow::to_json() const {
  return {{"id", id},
          {"axes", axes},
          {"theorem", theorem},
          {"certificate_verdict", certificate_verdict},
          {"margin", margin},
          {"s0", threshold},
          {"phi0", phi0},
          {"predicted_bound", opt_json(predicted_bound)},
          {"run_verdict", run_verdict},
          {"t_star_lower", opt_json(t_star_lower)},
          {"t_star_upper", opt_json(t_star_upper)},
          {"exit_code", exit_code},
          {"error", error}};
}

SummaryRow SummaryRow::from_json(const json& j) {
  SummaryRow r;
  r.id = j.value("id", "");
  if (j.contains("axes")) r.axes = j["axes"].get<std::map<std::string, double>>();
  r.theorem = j.value("theorem", "");
  r.certificate_verdict = j.value("certificate_verdict", "");
  r.margin = j.value("margin", 0.0);
  r.threshold = j.value("s0", 0.0);
  r.phi0 = j.value("phi0", 0.0);
  r.predicted_bound = opt_from(j, "predicted_bound");
  r.run_verdict = j.value("run_verdict", "");
  r.t_star_lower = opt_from(j, "t_star_lower");
  r.t_star_upper = opt_from(j, "t_star_upper");
  r.exit_code = j.value("exit_code", 0);
  r.error = j.value("error", "");
  return r;
}

Domain build_domain(const RunConfig& cfg) {
  const FamilySpec& f = cfg.family;
  Domain dom;
  if (f.kind == "tree") {
    const BranchingFunction b = BranchingFunction::from_json(f.branching);
    dom = Domain::from_tree(f.representation == "shell_quotient" ? model_tree_quotient(b, f.depth)
                                                                 : model_tree(b, f.depth));
  } else if (f.kind == "lattice") {
    dom = Domain::from_lattice(lattice_ball({f.dim, f.radius}));
  } else {
    WeightedGraph g = load_graph(cfg.base_dir / f.graph_file);
    if (!g.contains(f.origin)) throw Error(ErrorCode::ConfigInvalid, "family.origin is not a vertex");
    dom = Domain::custom(std::move(g), f.origin);
  }
  if (cfg.metric) dom.metric = GraphMetric::make(dom.graph(), metric_kind_from_string(*cfg.metric));
  return dom;
}

VertexFunction build_datum(const RunConfig& cfg, const Domain& dom) {
  const WeightedGraph& g = dom.graph();
  const DatumSpec& d = cfg.datum;
  VertexFunction u(g.size(), 0.0);
  if (d.kind == "delta") {
    const Vertex v = d.vertex.value_or(dom.center);
    if (!g.contains(v)) throw Error(ErrorCode::ConfigInvalid, "datum.vertex is not a vertex");
    u[v] = d.amplitude;
  } else if (d.kind == "gaussian") {
    const auto dist = dom.metric.distances_from(g, dom.center);
    for (Vertex x = 0; x < g.size(); ++x) {
      const double r = dist[x] / d.width;
      u[x] = d.amplitude * std::exp(-r * r);
    }
  } else {
    if (d.values.size() != g.size()) {
      throw Error(ErrorCode::ConfigInvalid, "datum.values has " + std::to_string(d.values.size()) +
                                                " entries for " + std::to_string(g.size()) + " vertices");
    }
    for (Vertex x = 0; x < g.size(); ++x) u[x] = d.amplitude * d.values[x];
  }
  return u;
}

Barrier barrier_from_json(const json& j) {
  try {
    Barrier b;
    const std::string kind = j.value("kind", "general");
    if (kind == "general") b.kind = BarrierKind::General;
    else if (kind == "tree") b.kind = BarrierKind::Tree;
    else if (kind == "homogeneous_tree") b.kind = BarrierKind::HomogeneousTree;
    else if (kind == "lattice") b.kind = BarrierKind::Lattice;
    else throw Error(ErrorCode::ParseError, "unknown barrier kind '" + kind + "'");
    b.phi = j.at("phi").get<VertexFunction>();
    b.lambda = j.at("lambda").get<double>();
    b.center = j.value("center", Vertex{0});
    b.metric = metric_kind_from_string(j.value("metric", "combinatorial"));
    b.tail_bound = j.value("tail_bound", 0.0);
    b.gradient_bound = j.value("gradient_bound", 0.0);
    b.gradient_bound_source = j.value("gradient_bound_source", "");
    b.norm_constant = j.value("norm_constant", 0.0);
    b.a = opt_from(j, "a");
    b.k = opt_from(j, "k");
    b.lambda_alternative = opt_from(j, "lambda_alternative");
    b.log_min_phi = opt_from(j, "log_min_phi");
    if (j.contains("params")) b.params = j["params"];
    for (double v : b.phi) b.truncated_norm += v;
    return b;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("barrier JSON: ") + e.what());
  }
}

CriterionParams build_params(const RunConfig& cfg, const Domain& dom) {
  CriterionParams p;
  p.f = Nonlinearity::from_json(cfg.nonlinearity);
  p.a = cfg.criterion.a;
  p.k = cfg.criterion.k;
  p.lambda = cfg.criterion.lambda;
  p.R = cfg.criterion.R;
  p.delta = cfg.criterion.delta;
  p.lambda_sweep = cfg.criterion.lambda_sweep;
  p.sup_outside = cfg.datum.sup_outside;
  p.declared_growth = opt_from(cfg.family.declared, "growth");
  p.declared_sup_outer = opt_from(cfg.family.declared, "sup_outer_degree");
  if (cfg.criterion.theorem == "general") {
    Barrier b = barrier_from_json(json::parse(read_file(cfg.base_dir / cfg.criterion.barrier_file)));
    if (b.phi.size() != dom.graph().size()) {
      throw Error(ErrorCode::ConfigInvalid, "barrier_file does not match the graph size");
    }
    b.truncated_norm = 0.0;
    for (Vertex x = 0; x < dom.graph().size(); ++x) b.truncated_norm += b.phi[x] * dom.graph().mu(x);
    p.barrier = std::move(b);
  }
  return p;
}

PipelineResult run_pipeline(const RunConfig& cfg, const fs::path& out_dir, Stage last, const json& provenance_extra) {
  PipelineResult res;
  res.row.theorem = cfg.criterion.theorem;
  Stage stage = Stage::Generate;
  const std::string config_text = cfg.to_json().dump(2) + "\n";
  auto finish = [&] {
    res.row.exit_code = res.exit_code;
    res.row.error = res.error;
    try {
      std::ofstream(out_dir / "row.json") << res.row.to_json().dump(2) << '\n';
      json prov = {{"tool", "kaplan"},
                   {"version", KAPLAN_VERSION},
                   {"created_utc", utc_now()},
                   {"config_sha256", sha256_hex(config_text)},
                   {"last_stage", std::string(to_string(last))},
                   {"exit_code", res.exit_code},
                   {"artifacts", json::array()}};
      for (const auto& a : res.artifacts) {
        prov["artifacts"].push_back({{"name", a.name}, {"file", a.path.filename().string()}, {"sha256", a.sha256}});
      }
      for (const auto& [k, v] : provenance_extra.items()) prov[k] = v;
      std::ofstream(out_dir / "provenance.json") << prov.dump(2) << '\n';
    } catch (...) {
      if (res.exit_code == 0) res.exit_code = 4;
    }
  };

  try {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + out_dir.string() + ": " + ec.message());
    res.artifacts.push_back(write_artifact("config", out_dir / "config.json", config_text));
  } catch (const Error& e) {
    res.exit_code = exit_code_for(e.code());
    res.error = e.what();
    return res;
  }

  try {
    Domain dom;
    VertexFunction u0;
    CriterionParams params;
    try {
      dom = build_domain(cfg);
      u0 = build_datum(cfg, dom);
      params = build_params(cfg, dom);
    } catch (const Error& e) {
      throw stage_failed(Stage::Generate, e);
    }
    const Artifact graph_art = write_artifact("graph", out_dir / "graph.json", graph_to_json(dom.graph()).dump(1) + "\n");
    res.artifacts.push_back(graph_art);
    if (last == Stage::Generate) {
      finish();
      return res;
    }

    stage = Stage::Barrier;
    const TheoremTag tag = theorem_tag_from_string(cfg.criterion.theorem);
    CriterionReport report;
    try {
      report = evaluate_criterion(tag, dom, u0, params);
    } catch (const Error& e) {
      throw stage_failed(Stage::Barrier, e);
    }
    res.row.threshold = report.threshold;
    res.row.margin = report.margin;
    res.row.phi0 = report.pairing_value.lower;
    res.row.certificate_verdict = std::string(to_string(report.verdict));

    json bar_j;
    if (report.barrier) {
      bar_j = report.barrier->to_json();
      bar_j["phi"] = report.barrier->phi;
      bar_j["constructed"] = true;
      if (report.certificate) bar_j["certificate"] = report.certificate->to_json();
    } else {
      bar_j = {{"constructed", false}, {"failed_hypotheses", report.failed_hypotheses()}};
    }
    bar_j["graph_sha256"] = graph_art.sha256;
    const Artifact bar_art = write_artifact("barrier", out_dir / "barrier.json", bar_j.dump(1) + "\n");
    res.artifacts.push_back(bar_art);
    if (last == Stage::Barrier) {
      finish();
      return res;
    }

    stage = Stage::Certify;
    json rep_j = report.to_json();
    rep_j["graph_sha256"] = graph_art.sha256;
    rep_j["barrier_sha256"] = bar_art.sha256;
    const Artifact rep_art = write_artifact("report", out_dir / "report.json", rep_j.dump(2) + "\n");
    res.artifacts.push_back(rep_art);
    res.report = report;
    if (report.verdict == Verdict::Certified) res.row.predicted_bound = report.predicted_time_bound;
    try {
      enforce(report);
    } catch (const Error& e) {
      throw stage_failed(Stage::Certify, e);
    }
    if (last == Stage::Certify) {
      finish();
      return res;
    }

    stage = Stage::Run;
    Trajectory tr;
    try {
      tr = evolve(dom.graph(), u0, params.f, cfg.evolution, &*report.barrier, report.lambda_used);
    } catch (const Error& e) {
      throw stage_failed(Stage::Run, e);
    }
    tr.detection = detect_blowup(tr, cfg.evolution.blowup_norm_threshold, report.predicted_time_bound);
    const Artifact traj_art = write_artifact("trajectory", out_dir / "trajectory.csv", trajectory_csv(tr));
    res.artifacts.push_back(traj_art);
    json summary = tr.summary_json();
    summary["certificate_verdict"] = std::string(to_string(report.verdict));
    summary["predicted_time_bound"] = opt_json(report.predicted_time_bound);
    summary["boundary_adjacent_mass"] = boundary_adjacent_mass(dom.graph(), *report.barrier);
    summary["references"] = {{"config_sha256", res.artifacts.front().sha256},
                             {"graph_sha256", graph_art.sha256},
                             {"barrier_sha256", bar_art.sha256},
                             {"report_sha256", rep_art.sha256},
                             {"trajectory_sha256", traj_art.sha256}};
    res.artifacts.push_back(write_artifact("run", out_dir / "run_summary.json", summary.dump(2) + "\n"));
    res.run_summary = summary;
    res.row.run_verdict = std::string(to_string(tr.detection.verdict));
    if (tr.detection.t_star) {
      res.row.t_star_lower = tr.detection.t_star->last_finite;
      res.row.t_star_upper = tr.detection.t_star->extrapolated;
    }
  } catch (const Error& e) {
    const Error wrapped = e.code() == ErrorCode::StageFailed ? e : stage_failed(stage, e);
    res.exit_code = exit_code_for(stage_cause(wrapped));
    res.error = wrapped.what();
  }
  finish();
  return res;
}

// ---------------------------------------------------------------------------

std::vector<SweepPoint> expand_sweep(const RunConfig& cfg) {
  std::vector<SweepPoint> points;
  RunConfig base = cfg;
  base.sweep.clear();
  std::vector<std::pair<std::string, std::vector<double>>> axes(cfg.sweep.begin(), cfg.sweep.end());
  if (axes.empty()) return points;
  std::vector<std::size_t> idx(axes.size(), 0);
  while (true) {
    SweepPoint pt;
    pt.config = base;
    for (std::size_t a = 0; a < axes.size(); ++a) {
      const double v = axes[a].second[idx[a]];
      pt.axes[axes[a].first] = v;
      const std::string& name = axes[a].first;
      if (name == "amplitude") pt.config.datum.amplitude = v;
      else if (name == "k") pt.config.criterion.k = v;
      else if (name == "a") pt.config.criterion.a = v;
      else if (name == "p") pt.config.nonlinearity = {{"kind", "power"}, {"p", v}};
    }
    points.push_back(std::move(pt));
    std::size_t d = axes.size();
    while (d > 0) {
      --d;
      if (++idx[d] < axes[d].second.size()) break;
      idx[d] = 0;
      if (d == 0) return points;
    }
  }
}

namespace {

bool row_less(const SummaryRow& a, const SummaryRow& b) {
  if (a.axes != b.axes) return a.axes < b.axes;
  return a.id < b.id;
}

}  // namespace

std::vector<SummaryRow> run_sweep(const RunConfig& cfg, const fs::path& out_dir, unsigned workers,
                                  const json& provenance_extra) {
  if (cfg.sweep.empty()) throw Error(ErrorCode::ConfigInvalid, "sweep mode needs at least one [sweep] axis");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + out_dir.string());
  const std::vector<SweepPoint> points = expand_sweep(cfg);
  std::vector<SummaryRow> rows(points.size());
  std::atomic<std::size_t> next{0};
  const unsigned n_workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(points.size())));
  auto work = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= points.size()) return;
      char id[32];
      std::snprintf(id, sizeof id, "point_%04zu", i);
      json extra = provenance_extra;
      extra["sweep_point"] = points[i].axes;
      PipelineResult r = run_pipeline(points[i].config, out_dir / id, Stage::Run, extra);
      r.row.id = id;
      r.row.axes = points[i].axes;
      std::ofstream(out_dir / id / "row.json") << r.row.to_json().dump(2) << '\n';
      rows[i] = std::move(r.row);
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n_workers; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  std::sort(rows.begin(), rows.end(), row_less);
  emit_report(rows, out_dir, "sweep");
  return rows;
}

void emit_report(std::vector<SummaryRow> rows, const fs::path& out_dir, const std::string& stem) {
  std::sort(rows.begin(), rows.end(), row_less);
  std::set<std::string> axis_names;
  for (const auto& r : rows) {
    for (const auto& [k, v] : r.axes) axis_names.insert(k);
  }
  std::string csv = "id";
  for (const auto& a : axis_names) csv += "," + a;
  csv += ",theorem,certificate_verdict,margin,s0,phi0,predicted_bound,run_verdict,t_star_lower,t_star_upper,exit_code\n";
  json arr = json::array();
  for (const auto& r : rows) {
    csv += csv_escape(r.id);
    for (const auto& a : axis_names) {
      const auto it = r.axes.find(a);
      csv += "," + (it == r.axes.end() ? std::string() : num(it->second));
    }
    csv += "," + csv_escape(r.theorem) + "," + csv_escape(r.certificate_verdict) + "," + num(r.margin) + "," +
           num(r.threshold) + "," + num(r.phi0) + "," + opt_num(r.predicted_bound) + "," + csv_escape(r.run_verdict) +
           "," + opt_num(r.t_star_lower) + "," + opt_num(r.t_star_upper) + "," + std::to_string(r.exit_code) + "\n";
    arr.push_back(r.to_json());
  }
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + out_dir.string());
  (void)write_artifact(stem, out_dir / (stem + ".csv"), csv);
  (void)write_artifact(stem, out_dir / (stem + ".json"), arr.dump(2) + "\n");
}

std::vector<SummaryRow> collect_rows(const fs::path& dir) {
  std::vector<SummaryRow> rows;
  if (!fs::exists(dir)) throw Error(ErrorCode::IoFailure, "no such directory " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().filename() == "row.json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    try {
      SummaryRow r = SummaryRow::from_json(json::parse(read_file(f)));
      if (r.id.empty()) r.id = fs::relative(f.parent_path(), dir).string();
      rows.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::IoFailure, "malformed " + f.string() + ": " + e.what());
    }
  }
  return rows;
}

}  // namespace kaplan::pipeline
