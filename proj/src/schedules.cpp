// SPDX-License-Identifier: Apache-2.0
#include "ttsa/schedules.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ttsa {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

StepSchedule::StepSchedule(double alpha0, double a, double beta0, double b, std::uint64_t T0)
    : alpha0_(alpha0), a_(a), beta0_(beta0), b_(b), T0_(T0) {
  if (!(alpha0 > 0) || !std::isfinite(alpha0)) throw std::invalid_argument("alpha0 must be finite and > 0");
  if (!(beta0 > 0) || !std::isfinite(beta0)) throw std::invalid_argument("beta0 must be finite and > 0");
  if (!(a > 0 && a <= 1)) throw std::invalid_argument("a must be in (0, 1]");
  if (!(b > 0 && b <= 1)) throw std::invalid_argument("b must be in (0, 1]");
  if (b < a) throw std::invalid_argument(fmt::format("b = {} < a = {}: the slow step must decay at least as fast", b, a));
  if (T0 < 1) throw std::invalid_argument("T0 must be >= 1");
}

StepSizes eval_schedule(const StepSchedule& s, std::uint64_t t) noexcept {
  const double base = static_cast<double>(t) + static_cast<double>(s.T0());
  return {s.alpha0() / std::pow(base, s.a()), s.beta0() / std::pow(base, s.b())};
}

std::vector<StepSizes> step_table(const StepSchedule& s, std::uint64_t horizon) {
  std::vector<StepSizes> table;
  table.reserve(horizon);
  for (std::uint64_t t = 0; t < horizon; ++t) table.push_back(eval_schedule(s, t));
  return table;
}

ScheduleBounds schedule_bounds(const ProblemConstants& c, std::size_t d_x) {
  ScheduleBounds out;
  const double dx = static_cast<double>(d_x);

  out.iota1 = std::min(c.mu_F / (4.0 * c.L_F * c.L_F), 1.0 / (12.0 * c.mu_F));

  const double iota2_first = c.L_Gx > 0 ? c.mu_G / (c.L_Gx * c.L_Gx) : kInf;
  out.iota2_degenerate = !(c.L_Gx > 0);
  out.iota2 = std::min(iota2_first, 1.0 / (14.0 * c.mu_G));

  const double coupling = c.L_H * c.L_Gx;
  out.kappa_degenerate = !(coupling > 0);
  const double kappa_first = out.kappa_degenerate
                                 ? kInf
                                 : c.mu_F * c.mu_G / (std::max(28.0 * dx, 200.0 * c.L_Gy) * coupling);
  out.kappa = std::min(kappa_first, c.mu_F / (5.0 * c.mu_G));

  out.rho_degenerate = out.kappa_degenerate;
  out.rho = out.rho_degenerate ? kInf : c.mu_F / (std::max(16.0 * dx, 200.0) * coupling * coupling);
  return out;
}

double max_rate_ratio(const ProblemConstants& c) noexcept {
  return 1.0 + std::min(c.delta_F / 2.0, c.delta_G);
}

StepSchedule corollary_schedule(const ProblemConstants& c, std::size_t d_x, double a, double b) {
  if (!(a > 0 && a <= 1) || !(b > 0 && b <= 1)) throw std::invalid_argument("a and b must lie in (0, 1]");
  const double hi = max_rate_ratio(c);
  const double ratio = b / a;
  if (ratio < 1.0 - kAuditSlack || ratio > hi * (1.0 + kAuditSlack)) {
    throw std::invalid_argument(
        fmt::format("b/a = {:.6g} outside the feasible range [1, {:.6g}]", ratio, hi));
  }
  const ScheduleBounds bounds = schedule_bounds(c, d_x);
  const double delta = std::min(c.delta_F, c.delta_G);
  const double alpha0 = 128.0 / (delta * c.mu_G * bounds.kappa);
  const double beta0 = 128.0 / (delta * c.mu_G);
  const double denom = std::min({bounds.kappa * bounds.iota1, bounds.iota2, bounds.rho / bounds.kappa});
  const double T1 = 128.0 / (c.mu_G * denom);
  const double T0 = std::ceil(std::pow(T1, 1.0 / a));
  if (!(T0 < 0x1.0p63)) throw std::invalid_argument(fmt::format("T0 = {:.3e} does not fit in 63 bits", T0));
  return StepSchedule(alpha0, a, beta0, b, std::max<std::uint64_t>(1, static_cast<std::uint64_t>(T0)));
}

bool ScheduleAudit::all_pass() const noexcept {
  return std::all_of(conditions.begin(), conditions.end(), [](const auto& c) { return c.pass; });
}

const ConditionResult* ScheduleAudit::find(const std::string& name) const noexcept {
  for (const auto& c : conditions) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

namespace {

class Tracker {
 public:
  Tracker(std::string name, bool proxy = false) {
    result_.name = std::move(name);
    result_.proxy = proxy;
    result_.worst_margin = kInf;
  }

  // Records `value <= bound` (with relative slack) at index t.
  void le(std::uint64_t t, double value, double bound) {
    if (std::isinf(bound) && bound > 0) return;
    const bool ok = value <= bound + kAuditSlack * std::abs(bound);
    record(t, ok, bound - value);
  }

  void record(std::uint64_t t, bool ok, double margin) {
    if (!std::isnan(margin)) result_.worst_margin = std::min(result_.worst_margin, margin);
    if (!ok && result_.pass) {
      result_.pass = false;
      result_.first_violation = t;
    }
  }

  ConditionResult take() { return std::move(result_); }

 private:
  ConditionResult result_;
};

}  // namespace

ScheduleAudit audit_schedule(const StepSchedule& s, const ProblemConstants& c, std::size_t d_x,
                             std::uint64_t horizon) {
  if (horizon < 2) throw std::invalid_argument("audit horizon must be >= 2");
  const ScheduleBounds bounds = schedule_bounds(c, d_x);

  Tracker alpha_bound("alpha_bound"), beta_bound("beta_bound"), ratio_bound("ratio_bound"),
      beta_sq_bound("beta_sq_over_alpha_bound"), alpha_growth("alpha_growth"), beta_growth("beta_growth"),
      ratio_mono("ratio_nonincreasing"), product("product_decay_proxy", true);

  const std::uint64_t burn_in = std::max<std::uint64_t>(10, horizon / 100);
  StepSizes prev{};
  double log_product = 0.0;  // log of prod_{tau <= t} |1 - mu_G beta_tau / 4|
  double prev_log_ratio = 0.0;

  for (std::uint64_t t = 0; t <= horizon; ++t) {
    const StepSizes cur = eval_schedule(s, t);
    alpha_bound.le(t, cur.alpha, bounds.iota1);
    beta_bound.le(t, cur.beta, bounds.iota2);
    ratio_bound.le(t, cur.beta / cur.alpha, bounds.kappa);
    beta_sq_bound.le(t, cur.beta * cur.beta / cur.alpha, bounds.rho);

    const double factor = 1.0 - c.mu_G * cur.beta / 4.0;
    log_product += factor == 0.0 ? -kInf : std::log(std::abs(factor));
    const double log_ratio = log_product - 2.0 * std::log(cur.alpha);

    if (t >= 1) {
      const double ra = prev.alpha / cur.alpha;
      const double rb = prev.beta / cur.beta;
      const double a_upper = 1.0 + std::min({c.delta_F * c.mu_F * cur.alpha / 16.0,
                                             c.delta_F * c.mu_G * cur.beta / 16.0,
                                             c.delta_G * c.mu_G * cur.beta / 8.0});
      const double b_upper = 1.0 + c.mu_G * cur.beta / 64.0;
      const bool a_ok = ra >= 1.0 - kAuditSlack && ra <= a_upper * (1.0 + kAuditSlack);
      const bool b_ok = rb >= 1.0 - kAuditSlack && rb <= b_upper * (1.0 + kAuditSlack);
      alpha_growth.record(t, a_ok, std::min(ra - 1.0, a_upper - ra));
      beta_growth.record(t, b_ok, std::min(rb - 1.0, b_upper - rb));
      ratio_mono.le(t, cur.beta / cur.alpha, prev.beta / prev.alpha);
      if (t > burn_in) {
        // A vanished product stays at -inf, which trivially satisfies the decay.
        const bool vanished = std::isinf(log_ratio) && log_ratio < 0;
        const bool ok = vanished || log_ratio <= prev_log_ratio + kAuditSlack * std::abs(prev_log_ratio);
        product.record(t, ok, vanished ? kInf : prev_log_ratio - log_ratio);
      }
    }
    prev = cur;
    prev_log_ratio = log_ratio;
  }

  ScheduleAudit audit;
  audit.horizon = horizon;
  for (Tracker* tr : {&alpha_bound, &beta_bound, &ratio_bound, &beta_sq_bound, &alpha_growth, &beta_growth,
                      &ratio_mono, &product}) {
    audit.conditions.push_back(tr->take());
  }
  return audit;
}

}  // namespace ttsa
