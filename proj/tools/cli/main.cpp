#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "kaplan/pipeline/pipeline.hpp"

namespace kp = kaplan::pipeline;

namespace {

struct Common {
  std::string config;
  std::string out;
  unsigned workers = 1;
  unsigned long long seed = 0;
};

void add_common(CLI::App* sub, Common& c, bool needs_config = true) {
  auto* opt = sub->add_option("--config", c.config, "Run config (.toml or .json)");
  if (needs_config) opt->required();
  sub->add_option("--out", c.out, "Output directory (overrides output.dir)");
  sub->add_option("--workers", c.workers, "Worker threads for sweeps")->check(CLI::PositiveNumber);
  sub->add_option("--seed", c.seed, "Seed recorded in provenance; the math is deterministic");
}

void print_report(const kp::PipelineResult& r) {
  if (!r.report) return;
  const auto& rep = *r.report;
  std::printf("theorem      %s\n", std::string(kaplan::to_string(rep.tag)).c_str());
  std::printf("verdict      %s\n", std::string(kaplan::to_string(rep.verdict)).c_str());
  std::printf("pairing      %.12g  [%.12g, %.12g]\n", rep.pairing_value.lower, rep.pairing_value.lower,
              rep.pairing_value.upper);
  std::printf("s0(lambda)   %.12g\n", rep.threshold);
  std::printf("margin       %.12g\n", rep.margin);
  std::printf("lambda       %.12g\n", rep.lambda_used);
  if (rep.predicted_time_bound) std::printf("time bound   %.12g\n", *rep.predicted_time_bound);
  for (const auto& c : rep.checklist) {
    std::printf("  [%s] %s  %s\n", c.passed ? "pass" : "FAIL", c.name.c_str(), c.detail.c_str());
  }
  for (const auto& n : rep.notes) std::printf("  note: %s\n", n.c_str());
}

void print_run(const kp::PipelineResult& r) {
  if (!r.run_summary) return;
  const auto& s = *r.run_summary;
  std::printf("run verdict  %s\n", s["verdict"].get<std::string>().c_str());
  if (!s["t_star_interval"].is_null()) {
    std::printf("t* interval  [%.12g, %.12g]\n", s["t_star_interval"][0].get<double>(),
                s["t_star_interval"][1].get<double>());
  }
  if (s.contains("residual_min")) std::printf("residual min %.6g\n", s["residual_min"].get<double>());
}

int run_stage(const Common& c, kp::Stage stage) {
  kp::RunConfig cfg = kp::load_config(c.config);
  const std::string out = c.out.empty() ? (cfg.base_dir / cfg.out_dir).string() : c.out;
  const nlohmann::json extra = {{"seed", c.seed}, {"config_path", c.config}};
  const kp::PipelineResult r = kp::run_pipeline(cfg, out, stage, extra);
  print_report(r);
  print_run(r);
  for (const auto& a : r.artifacts) std::printf("wrote %s  %s\n", a.path.string().c_str(), a.sha256.c_str());
  if (r.exit_code != 0) std::fprintf(stderr, "error: %s\n", r.error.c_str());
  return r.exit_code;
}

int run_sweep(const Common& c) {
  kp::RunConfig cfg = kp::load_config(c.config);
  const std::string out = c.out.empty() ? (cfg.base_dir / cfg.out_dir).string() : c.out;
  const nlohmann::json extra = {{"seed", c.seed}, {"config_path", c.config}};
  const auto rows = kp::run_sweep(cfg, out, c.workers, extra);
  int code = 0;
  std::printf("%-12s %-28s %-20s %-14s %s\n", "id", "axes", "certificate", "margin", "run");
  for (const auto& r : rows) {
    std::string axes;
    for (const auto& [k, v] : r.axes) axes += k + "=" + std::to_string(v) + " ";
    std::printf("%-12s %-28s %-20s %-14.6g %s\n", r.id.c_str(), axes.c_str(), r.certificate_verdict.c_str(), r.margin,
                r.run_verdict.c_str());
    if (r.exit_code != 0) {
      std::fprintf(stderr, "%s: %s\n", r.id.c_str(), r.error.c_str());
      code = std::max(code, r.exit_code);
    }
  }
  std::printf("wrote %s/sweep.csv\n", out.c_str());
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Blow-up certificates and simulations for semilinear heat equations on graphs"};
  app.require_subcommand(1);
  Common c;
  std::string in_dir;
  auto* gen = app.add_subcommand("generate", "Build the truncated graph");
  auto* bar = app.add_subcommand("barrier", "Generate, then construct and certify the barrier");
  auto* cert = app.add_subcommand("certify", "Evaluate the blow-up criterion");
  auto* run = app.add_subcommand("run", "Certify, then integrate the equation");
  auto* sweep = app.add_subcommand("sweep", "Run the pipeline over every point of the sweep axes");
  auto* report = app.add_subcommand("report", "Summarise the runs below a directory");
  for (auto* s : {gen, bar, cert, run, sweep}) add_common(s, c);
  add_common(report, c, false);
  report->add_option("--in", in_dir, "Directory holding run outputs (defaults to --out)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return run_stage(c, kp::Stage::Generate);
    if (bar->parsed()) return run_stage(c, kp::Stage::Barrier);
    if (cert->parsed()) return run_stage(c, kp::Stage::Certify);
    if (run->parsed()) return run_stage(c, kp::Stage::Run);
    if (sweep->parsed()) return run_sweep(c);
    if (report->parsed()) {
      if (c.out.empty() && in_dir.empty()) {
        std::fprintf(stderr, "error: report needs --out or --in\n");
        return 1;
      }
      const std::string src = in_dir.empty() ? c.out : in_dir;
      const std::string dst = c.out.empty() ? in_dir : c.out;
      const auto rows = kp::collect_rows(src);
      kp::emit_report(rows, dst);
      std::printf("%zu rows -> %s/summary.csv\n", rows.size(), dst.c_str());
      return 0;
    }
  } catch (const kaplan::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kp::exit_code_for(kp::stage_cause(e));
  }
  return 0;
}
