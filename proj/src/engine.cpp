// SPDX-License-Identifier: Apache-2.0
#include "ttsa/engine.hpp"

#include "ttsa/problems.hpp"
#include "ttsa/rng.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

namespace ttsa {

std::string to_string(UpdateMode mode) {
  return mode == UpdateMode::simultaneous ? "simultaneous" : "alternating";
}

UpdateMode update_mode_from_string(const std::string& s) {
  if (s == "simultaneous") return UpdateMode::simultaneous;
  if (s == "alternating") return UpdateMode::alternating;
  throw ConfigError(fmt::format("mode: unknown update mode '{}'", s));
}

namespace {

// v - step * (g + noise), in place on a copy of v.
Vec descend(Vec v, double step, const Vec& g, const Vec& noise) {
  for (std::size_t i = 0; i < v.dim(); ++i) v[i] -= step * (g[i] + noise[i]);
  return v;
}

}  // namespace

StepResult step_simultaneous(const ProblemSpec& p, const Vec& x, const Vec& y, double alpha, double beta,
                             const Vec& xi, const Vec& psi) {
  StepResult r;
  r.x = descend(x, alpha, p.F(x, y), xi);
  r.y = descend(y, beta, p.G(x, y), psi);
  r.finite = r.x.all_finite() && r.y.all_finite();
  return r;
}

StepResult step_alternating(const ProblemSpec& p, const Vec& x, const Vec& y, double alpha, double beta,
                            const Vec& xi, const Vec& psi) {
  StepResult r;
  r.x = descend(x, alpha, p.F(x, y), xi);
  r.y = descend(y, beta, p.G(r.x, y), psi);
  r.finite = r.x.all_finite() && r.y.all_finite();
  return r;
}

std::vector<std::uint64_t> default_checkpoints(std::uint64_t horizon, std::size_t count) {
  std::vector<std::uint64_t> out{0};
  if (horizon == 0) return out;
  const double log_hi = std::log(static_cast<double>(horizon));
  for (std::size_t i = 0; i < count; ++i) {
    const double frac = count == 1 ? 1.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    auto t = static_cast<std::uint64_t>(std::llround(std::exp(frac * log_hi)));
    t = std::clamp<std::uint64_t>(t, 1, horizon);
    if (t > out.back()) out.push_back(t);
  }
  if (out.back() != horizon) out.push_back(horizon);
  return out;
}

void validate_config(const RunConfig& cfg, const ProblemSpec& p) {
  if (cfg.replications < 1) throw ConfigError("replications must be >= 1");
  for (std::size_t i = 1; i < cfg.checkpoints.size(); ++i) {
    if (cfg.checkpoints[i] <= cfg.checkpoints[i - 1]) throw ConfigError("checkpoints must be strictly increasing");
  }
  if (!cfg.checkpoints.empty() && cfg.checkpoints.back() > cfg.horizon) {
    throw ConfigError(fmt::format("last checkpoint {} exceeds horizon {}", cfg.checkpoints.back(), cfg.horizon));
  }
  if (cfg.x0 && cfg.x0->dim() != p.d_x) throw ConfigError("x0 dimension does not match the problem");
  if (cfg.y0 && cfg.y0->dim() != p.d_y) throw ConfigError("y0 dimension does not match the problem");
  if (!p.H || !p.root) throw ConfigError(fmt::format("problem '{}' lacks H or the root; residuals undefined", p.id));
  validate_noise(cfg.noise);
}

namespace {

struct Plan {
  const ProblemSpec& problem;
  const RunConfig& cfg;
  std::vector<std::uint64_t> checkpoints;
  std::vector<StepSizes> steps;
};

Plan make_plan(const ProblemSpec& p, const RunConfig& cfg) {
  validate_config(cfg, p);
  Plan plan{p, cfg, cfg.checkpoints.empty() ? default_checkpoints(cfg.horizon) : cfg.checkpoints,
            step_table(cfg.schedule, cfg.horizon)};
  return plan;
}

TrajectoryCapture run_planned(const Plan& plan, std::uint64_t rep) {
  const ProblemSpec& p = plan.problem;
  const RunConfig& cfg = plan.cfg;
  const Vec& y_star = p.root->y_star;

  TrajectoryCapture cap;
  cap.replication = rep;
  cap.checkpoints = plan.checkpoints;
  const std::size_t n_cp = plan.checkpoints.size();
  cap.x.reserve(n_cp);
  cap.y.reserve(n_cp);
  cap.x_hat.reserve(n_cp);
  cap.y_hat.reserve(n_cp);

  RngStream rng(cfg.base_seed, rep);
  Vec x = cfg.x0.value_or(p.x0);
  Vec y = cfg.y0.value_or(p.y0);
  std::size_t next = 0;

  // Returns false when the residuals themselves are not finite.
  auto record = [&]() {
    Vec xh = x - p.H(y);
    Vec yh = y - y_star;
    if (!xh.all_finite() || !yh.all_finite()) return false;
    cap.x.push_back(x);
    cap.y.push_back(y);
    cap.x_hat.push_back(std::move(xh));
    cap.y_hat.push_back(std::move(yh));
    ++next;
    return true;
  };

  if (next < n_cp && plan.checkpoints[next] == 0 && !record()) {
    cap.diverged_at = 0;
    return cap;
  }
  const bool alternating = cfg.mode == UpdateMode::alternating;
  for (std::uint64_t t = 0; t < cfg.horizon; ++t) {
    const StepSizes s = plan.steps[t];
    const NoiseDraw noise = sample_noise(cfg.noise, rng, x, y, t, s.beta);
    StepResult r = alternating ? step_alternating(p, x, y, s.alpha, s.beta, noise.xi, noise.psi)
                               : step_simultaneous(p, x, y, s.alpha, s.beta, noise.xi, noise.psi);
    if (!r.finite) {
      cap.diverged_at = t + 1;
      break;
    }
    x = std::move(r.x);
    y = std::move(r.y);
    if (next < n_cp && plan.checkpoints[next] == t + 1 && !record()) {
      cap.diverged_at = t + 1;
      break;
    }
  }
  return cap;
}

}  // namespace

TrajectoryCapture run_replication(const ProblemSpec& p, const RunConfig& cfg, std::uint64_t rep) {
  if (rep >= cfg.replications) {
    throw ConfigError(fmt::format("replication {} out of range [0, {})", rep, cfg.replications));
  }
  return run_planned(make_plan(p, cfg), rep);
}

TrajectoryCapture run_replication(const RunConfig& cfg, std::uint64_t rep) {
  const ProblemSpec p = find_problem(cfg.problem_id);
  return run_replication(p, cfg, rep);
}

unsigned default_workers() {
  if (const char* env = std::getenv("TTSA_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<TrajectoryCapture> run_experiment(const ProblemSpec& p, const RunConfig& cfg, unsigned workers) {
  const Plan plan = make_plan(p, cfg);
  std::vector<TrajectoryCapture> out(cfg.replications);
  if (workers == 0) workers = default_workers();
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, cfg.replications));

  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto work = [&] {
    for (std::uint64_t rep = next++; rep < cfg.replications; rep = next++) {
      try {
        out[rep] = run_planned(plan, rep);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::vector<TrajectoryCapture> run_experiment(const RunConfig& cfg, unsigned workers) {
  const ProblemSpec p = find_problem(cfg.problem_id);
  return run_experiment(p, cfg, workers);
}

}  // namespace ttsa
