// SPDX-License-Identifier: Apache-2.0
//
// Declarative experiment manifests (JSON). Key schema:
//
//   name                  string, required
//   problem               catalog id, required
//   constants             optional ProblemConstants override (all 12 keys)
//   schedule              {alpha0, beta0, T0, rates: [[a, b], ...]}
//   noise                 {kind, sigma_xi, sigma_psi, bias_scale}
//   horizon, replications, seed
//   mode                  "simultaneous" | "alternating"
//   checkpoints           {count} or {list: [...]}
//   x0, y0                optional arrays (default: problem initial point)
//   grid_search           optional {alpha0_grid, beta0_grid, search_horizon,
//                         search_reps, constraint: "beta0>=1 when b=1" | null}
//   slopes                {metrics: [...], windows: {metric: [lo, hi]}}
//   output_dir            string
#pragma once

#include "ttsa/core.hpp"
#include "ttsa/engine.hpp"
#include "ttsa/metrics.hpp"
#include "ttsa/noise.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ttsa {

/// Malformed manifest; `field()` names the offending key path.
class ManifestError : public ConfigError {
 public:
  ManifestError(std::string field, const std::string& what)
      : ConfigError("manifest field '" + field + "': " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

inline constexpr const char* kBetaConstraint = "beta0>=1 when b=1";

struct GridSearchSpec {
  std::vector<double> alpha0_grid{10, 3, 1, 0.3, 0.1};
  std::vector<double> beta0_grid{10, 3, 1, 0.3, 0.1};
  std::uint64_t search_horizon = 10000;
  std::uint64_t search_reps = 50;
  bool beta0_at_least_one_when_b_is_one = false;

  friend bool operator==(const GridSearchSpec&, const GridSearchSpec&) = default;
};

struct SlopeWindow {
  double lo = 0;
  double hi = 0;
  friend bool operator==(const SlopeWindow&, const SlopeWindow&) = default;
};

struct ExperimentManifest {
  std::string name;
  std::string problem;
  std::optional<ProblemConstants> constants;
  double alpha0 = 1.0;
  double beta0 = 1.0;
  std::uint64_t T0 = 1;
  std::vector<std::pair<double, double>> rates;  // (a, b)
  NoiseModel noise;
  std::uint64_t horizon = 1000;
  std::uint64_t replications = 10;
  std::uint64_t seed = 0;
  UpdateMode mode = UpdateMode::simultaneous;
  std::uint64_t checkpoint_count = 100;
  std::vector<std::uint64_t> checkpoint_list;  // overrides checkpoint_count when non-empty
  std::optional<Vec> x0;
  std::optional<Vec> y0;
  std::optional<GridSearchSpec> grid_search;
  std::vector<std::string> slope_metrics{"e_x2", "e_y2", "cross", "e_x4", "e_y4"};
  std::map<std::string, SlopeWindow> slope_windows;
  std::string output_dir = "out";

  friend bool operator==(const ExperimentManifest&, const ExperimentManifest&) = default;

  /// Window for `metric`: the configured one, else [horizon / 10, horizon].
  SlopeWindow window_for(const std::string& metric) const;
  /// Checkpoint grid this manifest asks for.
  std::vector<std::uint64_t> checkpoints() const;
};

/// Parses and validates; throws ManifestError naming the offending field.
ExperimentManifest parse_manifest(const std::string& text);
ExperimentManifest load_manifest(const std::string& path);

/// Canonical JSON text (sorted keys, 2-space indent, trailing newline).
std::string serialize_manifest(const ExperimentManifest& m);

/// Lowercase hex SHA-256 of serialize_manifest(m).
std::string manifest_hash(const ExperimentManifest& m);

}  // namespace ttsa
