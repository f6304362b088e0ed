// SPDX-License-Identifier: Apache-2.0
//
// The coupled iteration
//   x_{t+1} = x_t - alpha_t (F(x_t, y_t) + xi_t)
//   y_{t+1} = y_t - beta_t  (G(., y_t) + psi_t)
// in simultaneous (G at x_t) and alternating (G at x_{t+1}) form, plus
// replication orchestration with checkpointed residual capture.
#pragma once

#include "ttsa/core.hpp"
#include "ttsa/noise.hpp"
#include "ttsa/schedules.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ttsa {

enum class UpdateMode { simultaneous, alternating };

std::string to_string(UpdateMode mode);
UpdateMode update_mode_from_string(const std::string& s);  // throws ConfigError

struct StepResult {
  Vec x;
  Vec y;
  /// False when any entry of x or y is NaN or infinite.
  bool finite = true;
};

StepResult step_simultaneous(const ProblemSpec& p, const Vec& x, const Vec& y, double alpha, double beta,
                             const Vec& xi, const Vec& psi);
StepResult step_alternating(const ProblemSpec& p, const Vec& x, const Vec& y, double alpha, double beta,
                            const Vec& xi, const Vec& psi);

struct RunConfig {
  std::string problem_id;
  StepSchedule schedule{1.0, 1.0, 1.0, 1.0, 1};
  NoiseModel noise;
  std::uint64_t horizon = 1;
  std::uint64_t replications = 1;
  std::uint64_t base_seed = 0;
  UpdateMode mode = UpdateMode::simultaneous;
  /// Strictly increasing, last <= horizon. Empty selects default_checkpoints.
  std::vector<std::uint64_t> checkpoints;
  std::optional<Vec> x0;
  std::optional<Vec> y0;
};

/// 100 log-spaced indices in [1, horizon] (rounded, deduplicated) plus 0 and
/// horizon.
std::vector<std::uint64_t> default_checkpoints(std::uint64_t horizon, std::size_t count = 100);

/// Checks checkpoint ordering, replication count and initial-point dims
/// against `p`. Throws ConfigError.
void validate_config(const RunConfig& cfg, const ProblemSpec& p);

struct TrajectoryCapture {
  std::uint64_t replication = 0;
  std::vector<std::uint64_t> checkpoints;
  // Raw iterates and residuals x_hat = x - H(y), y_hat = y - y*; one entry per
  // checkpoint reached before divergence.
  std::vector<Vec> x;
  std::vector<Vec> y;
  std::vector<Vec> x_hat;
  std::vector<Vec> y_hat;
  /// First iteration index whose iterate was non-finite.
  std::optional<std::uint64_t> diverged_at;

  bool diverged() const noexcept { return diverged_at.has_value(); }
};

/// Runs replication `rep` against an explicit problem (needs H and root).
TrajectoryCapture run_replication(const ProblemSpec& p, const RunConfig& cfg, std::uint64_t rep);
/// Resolves cfg.problem_id from the catalog first.
TrajectoryCapture run_replication(const RunConfig& cfg, std::uint64_t rep);

/// All replications, ordered by index. `workers` == 0 means hardware
/// concurrency. Output does not depend on the worker count.
std::vector<TrajectoryCapture> run_experiment(const ProblemSpec& p, const RunConfig& cfg, unsigned workers = 0);
std::vector<TrajectoryCapture> run_experiment(const RunConfig& cfg, unsigned workers = 0);

/// Worker count from TTSA_WORKERS, else hardware concurrency (>= 1).
unsigned default_workers();

}  // namespace ttsa
