#pragma once

// generate -> barrier -> certify -> run, with content-hashed artifacts,
// parameter sweeps on a bounded worker pool and summary reports.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kaplan/error.hpp"
#include "kaplan/pipeline/config.hpp"

namespace kaplan::pipeline {

enum class Stage { Generate, Barrier, Certify, Run };

[[nodiscard]] std::string_view to_string(Stage s);

/// Exit codes: 0 success, 1 invalid config, 2 hypothesis violation, 3 numeric failure, 4 I/O.
[[nodiscard]] int exit_code_for(ErrorCode code);

/// Error(StageFailed) whose details are {stage, cause code, cause message, ...cause details}.
[[nodiscard]] Error stage_failed(Stage stage, const Error& cause);
/// Cause code carried by a StageFailed error.
[[nodiscard]] ErrorCode stage_cause(const Error& e);

/// Lowercase hex SHA-256.
[[nodiscard]] std::string sha256_hex(std::string_view data);

struct Artifact {
  std::string name;  // graph, barrier, report, run
  std::filesystem::path path;
  std::string sha256;
};

struct SummaryRow {
  std::string id;
  std::map<std::string, double> axes;
  std::string theorem;
  std::string certificate_verdict;
  double margin = 0.0;
  double threshold = 0.0;
  double phi0 = 0.0;
  std::optional<double> predicted_bound;
  std::string run_verdict;
  std::optional<double> t_star_lower;
  std::optional<double> t_star_upper;
  int exit_code = 0;
  std::string error;

  [[nodiscard]] nlohmann::json to_json() const;
  static SummaryRow from_json(const nlohmann::json& j);
};

struct PipelineResult {
  int exit_code = 0;
  std::vector<Artifact> artifacts;
  std::optional<CriterionReport> report;
  std::optional<nlohmann::json> run_summary;
  std::string error;
  SummaryRow row;
};

/// Domain of the configured family. Throws ConfigInvalid, IoFailure, generator errors.
[[nodiscard]] Domain build_domain(const RunConfig& cfg);
/// Initial datum on the domain. Throws ConfigInvalid.
[[nodiscard]] VertexFunction build_datum(const RunConfig& cfg, const Domain& dom);
[[nodiscard]] CriterionParams build_params(const RunConfig& cfg, const Domain& dom);

/// Barrier saved by the barrier stage (kind, phi, lambda, tail_bound, ...). Throws ParseError.
[[nodiscard]] Barrier barrier_from_json(const nlohmann::json& j);

/// Runs the stages up to `last` into `out_dir`. Errors are caught and mapped
/// to the exit code; a provenance sidecar records tool version, time, hashes
/// and `provenance_extra`. Data files carry no timestamps.
[[nodiscard]] PipelineResult run_pipeline(const RunConfig& cfg, const std::filesystem::path& out_dir,
                                          Stage last = Stage::Run,
                                          const nlohmann::json& provenance_extra = nlohmann::json::object());

struct SweepPoint {
  std::map<std::string, double> axes;
  RunConfig config;
};

/// Cartesian product of the sweep axes in sorted axis order.
[[nodiscard]] std::vector<SweepPoint> expand_sweep(const RunConfig& cfg);

/// One pipeline per point in out_dir/point_NNNN on at most `workers` threads.
/// Writes sweep.csv and sweep.json; rows sorted by axis values.
[[nodiscard]] std::vector<SummaryRow> run_sweep(const RunConfig& cfg, const std::filesystem::path& out_dir,
                                                unsigned workers,
                                                const nlohmann::json& provenance_extra = nlohmann::json::object());

/// Writes summary.csv and summary.json (or `stem`.csv/json). Throws IoFailure.
void emit_report(std::vector<SummaryRow> rows, const std::filesystem::path& out_dir, const std::string& stem = "summary");

/// Collects rows from every row.json below `dir`.
[[nodiscard]] std::vector<SummaryRow> collect_rows(const std::filesystem::path& dir);

}  // namespace kaplan::pipeline
