// SPDX-License-Identifier: Apache-2.0
//
// Polynomial step-size schedules alpha_t = alpha0 / (t + T0)^a (fast) and
// beta_t = beta0 / (t + T0)^b (slow), the problem-dependent step-size bounds,
// and a finite-horizon audit of the step-size conditions.
#pragma once

#include "ttsa/core.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ttsa {

class StepSchedule {
 public:
  /// Throws std::invalid_argument unless alpha0, beta0 > 0, a, b in (0, 1],
  /// b >= a and T0 >= 1.
  StepSchedule(double alpha0, double a, double beta0, double b, std::uint64_t T0 = 1);

  double alpha0() const noexcept { return alpha0_; }
  double a() const noexcept { return a_; }
  double beta0() const noexcept { return beta0_; }
  double b() const noexcept { return b_; }
  std::uint64_t T0() const noexcept { return T0_; }

  StepSchedule with_initial(double alpha0, double beta0) const { return {alpha0, a_, beta0, b_, T0_}; }

  friend bool operator==(const StepSchedule&, const StepSchedule&) = default;

 private:
  double alpha0_;
  double a_;
  double beta0_;
  double b_;
  std::uint64_t T0_;
};

struct StepSizes {
  double alpha;
  double beta;
};

StepSizes eval_schedule(const StepSchedule& s, std::uint64_t t) noexcept;

/// Precomputed (alpha_t, beta_t) for t in [0, horizon).
std::vector<StepSizes> step_table(const StepSchedule& s, std::uint64_t horizon);

/// Upper bounds iota1 (alpha_t), iota2 (beta_t), kappa (beta_t/alpha_t) and
/// rho (beta_t^2/alpha_t). A term whose denominator vanishes is dropped from
/// its minimum and the matching `*_degenerate` flag is set; a bound with no
/// finite term left is +inf.
struct ScheduleBounds {
  double iota1 = 0;
  double iota2 = 0;
  double kappa = 0;
  double rho = 0;
  bool iota2_degenerate = false;
  bool kappa_degenerate = false;
  bool rho_degenerate = false;
};

ScheduleBounds schedule_bounds(const ProblemConstants& c, std::size_t d_x);

/// Largest admissible b/a for decoupled rates: 1 + min(delta_F / 2, delta_G).
double max_rate_ratio(const ProblemConstants& c) noexcept;

/// Constructive schedule with alpha0 = 128 / (delta mu_G kappa),
/// beta0 = 128 / (delta mu_G), T0 = ceil(T1^(1/a)) where
/// T1 = 128 / (mu_G min(kappa iota1, iota2, rho / kappa)) and
/// delta = min(delta_F, delta_G). Throws std::invalid_argument when b/a lies
/// outside [1, max_rate_ratio(c)] or T0 does not fit in 63 bits.
StepSchedule corollary_schedule(const ProblemConstants& c, std::size_t d_x, double a, double b);

struct ConditionResult {
  std::string name;
  bool pass = true;
  std::optional<std::uint64_t> first_violation;
  double worst_margin = 0;  // min over checked t of (bound - value); < 0 on violation
  bool proxy = false;
};

struct ScheduleAudit {
  std::uint64_t horizon = 0;
  std::vector<ConditionResult> conditions;

  bool all_pass() const noexcept;
  const ConditionResult* find(const std::string& name) const noexcept;
};

/// Relative slack added to every <= comparison of the audit.
inline constexpr double kAuditSlack = 1e-12;

/// Checks every step-size condition at each index 0 <= t <= horizon.
/// Condition names: alpha_bound, beta_bound, ratio_bound, beta_sq_over_alpha_bound
/// (constant bounds), alpha_growth, beta_growth (t >= 1), ratio_nonincreasing,
/// product_decay_proxy (after a burn-in of max(10, horizon / 100) indices).
/// Throws std::invalid_argument for horizon < 2.
ScheduleAudit audit_schedule(const StepSchedule& s, const ProblemConstants& c, std::size_t d_x,
                             std::uint64_t horizon);

}  // namespace ttsa
