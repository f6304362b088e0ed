// SPDX-License-Identifier: Apache-2.0
//
// Manifest execution: step-size grid search, full runs, and the files written
// per run (moments.csv, slopes.json, audit.json, grid.json, provenance.json).
#pragma once

#include "ttsa/manifest.hpp"
#include "ttsa/metrics.hpp"
#include "ttsa/schedules.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace ttsa {

/// Output directory cannot be created or written.
class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GridCell {
  double alpha0 = 0;
  double beta0 = 0;
  std::uint64_t divergent_reps = 0;
  double e_x2 = 0;  // terminal, over non-divergent reps
  double e_y2 = 0;
  bool eligible() const noexcept { return divergent_reps == 0; }
};

struct GridResult {
  double alpha0 = 0;
  double beta0 = 0;
  std::vector<GridCell> cells;
};

/// Beta0 candidates after the optional "beta0 >= 1 when b = 1" filter.
std::vector<double> beta0_candidates(const GridSearchSpec& spec, double b);

/// Scores each (alpha0, beta0) cell by terminal E||y_hat||^2 over
/// spec.search_reps replications of spec.search_horizon steps. Cells with a
/// divergent replication are ineligible. Picks the minimum; ties go to smaller
/// terminal E||x_hat||^2, then larger alpha0. Throws std::runtime_error naming
/// `label` when no cell is eligible.
GridResult grid_search(const ProblemSpec& p, const RunConfig& base, const GridSearchSpec& spec, unsigned workers,
                       const std::string& label);

using SlopeOrError = std::variant<SlopeReport, std::string>;

struct RunOutcome {
  double a = 0;
  double b = 0;
  StepSchedule schedule{1, 1, 1, 1, 1};
  std::optional<GridResult> grid;
  MomentSeries moments;
  std::map<std::string, SlopeOrError> slopes;
  ScheduleAudit audit;
  RatePrediction prediction;
  std::filesystem::path directory;
};

/// The RunConfig a manifest describes for one (a, b) pair.
RunConfig make_run_config(const ExperimentManifest& m, double a, double b);

/// Problem from the catalog with the manifest's constants override applied.
ProblemSpec resolve_problem(const ExperimentManifest& m);

/// Grid search (if configured) then the full run for one rate pair; writes
/// nothing.
RunOutcome execute_run(const ExperimentManifest& m, const ProblemSpec& p, double a, double b, unsigned workers);

struct RunOptions {
  unsigned workers = 0;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
};

/// Applies option overrides to a manifest copy.
ExperimentManifest apply_options(ExperimentManifest m, const RunOptions& opt);

/// Executes every rate pair and writes its files. One pair writes into
/// output_dir; several write into output_dir/a<a>_b<b>.
std::vector<RunOutcome> run_manifest(const ExperimentManifest& m, const RunOptions& opt = {});

nlohmann::json audit_to_json(const ScheduleAudit& audit);
nlohmann::json bounds_to_json(const ScheduleBounds& b);
nlohmann::json schedule_to_json(const StepSchedule& s);
nlohmann::json slope_to_json(const SlopeReport& r);
nlohmann::json grid_to_json(const GridResult& g);

std::string rate_dir_name(double a, double b);

}  // namespace ttsa
