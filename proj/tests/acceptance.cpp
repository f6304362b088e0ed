// SPDX-License-Identifier: Apache-2.0
//
// Desk-scale acceptance suite. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails. Set TTSA_WORKERS to pin the thread
// count; results do not depend on it.
#include "ttsa/engine.hpp"
#include "ttsa/manifest.hpp"
#include "ttsa/metrics.hpp"
#include "ttsa/problems.hpp"
#include "ttsa/runner.hpp"
#include "ttsa/schedules.hpp"

#include "oracles.hpp"

#include <fmt/core.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

using namespace ttsa;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
    if (!ok) {
      pass = false;
      detail += " [fail]";
    }
  }
};

int failures = 0;
std::vector<MomentSeries> produced;  // every series, for the invariant suite

void report(int id, const std::string& title, const Verdict& v) {
  if (!v.pass) ++failures;
  fmt::print("{} criterion {}: {} | {}\n", v.pass ? "PASS" : "FAIL", id, title, v.detail);
  std::fflush(stdout);
}

void guarded(int id, const std::string& title, const std::function<Verdict()>& body) {
  try {
    report(id, title, body());
  } catch (const std::exception& e) {
    report(id, title, Verdict{false, fmt::format("exception: {}", e.what())});
  }
}

unsigned workers() { return default_workers(); }

double slope_of(const RunOutcome& r, const std::string& metric) {
  const auto& s = r.slopes.at(metric);
  if (const auto* err = std::get_if<std::string>(&s)) throw std::runtime_error(metric + ": " + *err);
  return std::get<SlopeReport>(s).slope;
}

ExperimentManifest base(const std::string& name, const std::string& problem, std::uint64_t reps, std::uint64_t seed) {
  ExperimentManifest m;
  m.name = name;
  m.problem = problem;
  m.horizon = 100000;
  m.replications = reps;
  m.seed = seed;
  m.slope_metrics = {"e_x2", "e_y2", "cross", "e_x4", "e_y4", "e_sum"};
  return m;
}

RunOutcome run(const ExperimentManifest& m, double a, double b) {
  auto out = execute_run(m, resolve_problem(m), a, b, workers());
  produced.push_back(out.moments);
  return out;
}

std::string f3(double v) { return fmt::format("{:.3f}", v); }

bool within(double v, double centre, double tol) { return std::abs(v - centre) <= tol; }

// Criteria 1 and 7 share the sign-abs runs.
void sign_abs() {
  auto m = base("c1", "sign-abs", 500, 1);
  m.noise = {NoiseKind::gaussian, 1.0, 0.1, 0.0};
  m.grid_search = GridSearchSpec{};
  m.slope_windows["e_x2"] = {1e4, 1e5};
  m.slope_windows["e_y2"] = {1e4, 1e5};
  m.slope_windows["e_sum"] = {1e4, 1e5};
  std::vector<RunOutcome> outs;
  std::string error;
  try {
    for (auto [a, b] : {std::pair{0.6, 1.0}, std::pair{0.7, 0.9}}) outs.push_back(run(m, a, b));
  } catch (const std::exception& e) {
    error = e.what();
  }

  Verdict c1, c7;
  if (!error.empty()) {
    c1 = c7 = Verdict{false, "exception: " + error};
  } else {
    for (const auto& o : outs) {
      const double sx = slope_of(o, "e_x2"), sy = slope_of(o, "e_y2"), ss = slope_of(o, "e_sum");
      c1.require(std::abs(sy - sx) <= 0.15 && sy <= o.a + 0.15,
                 fmt::format("(a,b)=({},{}) alpha0={} beta0={} slope e_x2={} e_y2={}", o.a, o.b,
                             o.schedule.alpha0(), o.schedule.beta0(), f3(sx), f3(sy)));
      c7.require(ss >= o.a - 0.15, fmt::format("(a,b)=({},{}) slope e_x2+e_y2={} >= {}", o.a, o.b, f3(ss), f3(o.a - 0.15)));
    }
  }
  report(1, "non-decoupling on sign-abs", c1);
  report(7, "coarse rate of the summed error", c7);
}

Verdict decoupled_variant() {
  auto m = base("c2", "sign-abs-h1.5", 500, 2);
  m.noise = {NoiseKind::gaussian, 1.0, 0.1, 0.0};
  m.grid_search = GridSearchSpec{};
  m.slope_windows["e_x2"] = {3e4, 1e5};
  m.slope_windows["e_y2"] = {3e4, 1e5};
  Verdict v;
  const auto in = run(m, 0.7, 1.0);
  const double sx = slope_of(in, "e_x2"), sy = slope_of(in, "e_y2");
  v.require(within(sx, 0.7, 0.15) && within(sy, 1.0, 0.15),
            fmt::format("(0.7,1) {} slope e_x2={} e_y2={}", in.prediction.verdict(), f3(sx), f3(sy)));
  const auto out = run(m, 0.6, 1.0);
  const double ox = slope_of(out, "e_x2"), oy = slope_of(out, "e_y2");
  v.require(oy >= 0.8, fmt::format("(0.6,1) beyond guarantee ({}) slope e_x2={} e_y2={}", out.prediction.verdict(),
                                   f3(ox), f3(oy)));
  return v;
}

// Criteria 3 and 8: the biased run reuses the unbiased step sizes and seed.
void bilevel_runs() {
  auto m = base("c3", "bilevel-sin", 300, 3);
  m.noise = {NoiseKind::gaussian, 1.0, 1.0, 0.0};
  m.grid_search = GridSearchSpec{};
  std::optional<RunOutcome> plain;
  try {
    plain = run(m, 0.7, 1.0);
  } catch (const std::exception& e) {
    report(3, "bilevel decoupling", Verdict{false, fmt::format("exception: {}", e.what())});
    report(8, "biased noise keeps the rates", Verdict{false, "no unbiased reference run"});
    return;
  }
  const double sx = slope_of(*plain, "e_x2"), sy = slope_of(*plain, "e_y2");
  Verdict c3;
  c3.require(within(sx, 0.7, 0.2) && within(sy, 1.0, 0.2),
             fmt::format("alpha0={} beta0={} slope e_x2={} e_y2={}", plain->schedule.alpha0(),
                         plain->schedule.beta0(), f3(sx), f3(sy)));
  report(3, "bilevel decoupling", c3);

  guarded(8, "biased noise keeps the rates", [&] {
    auto b = m;
    b.name = "c8";
    b.grid_search.reset();
    b.alpha0 = plain->schedule.alpha0();
    b.beta0 = plain->schedule.beta0();
    b.noise.kind = NoiseKind::gaussian_biased;
    b.noise.bias_scale = 10.0;
    const auto biased = run(b, 0.7, 1.0);
    const double bx = slope_of(biased, "e_x2"), by = slope_of(biased, "e_y2");
    Verdict v;
    v.require(std::abs(bx - sx) <= 0.15, fmt::format("e_x2 biased={} unbiased={}", f3(bx), f3(sx)));
    v.require(std::abs(by - sy) <= 0.15, fmt::format("e_y2 biased={} unbiased={}", f3(by), f3(sy)));
    return v;
  });
}

Verdict sgd_pr() {
  auto m = base("c4", "sgd-pr-quadratic-sin", 500, 4);
  m.noise = {NoiseKind::gaussian, 1.0, 0.0, 0.0};
  Verdict v;
  for (double a : {0.6, 0.7}) {
    const double sy = slope_of(run(m, a, 1.0), "e_y2");
    v.require(within(sy, 1.0, 0.15), fmt::format("a={} slope e_y2={}", a, f3(sy)));
  }
  return v;
}

// Criteria 5 and 6 share one run.
void linear() {
  auto m = base("c5", "linear-coupled", 2000, 5);
  m.noise = {NoiseKind::gaussian, 1.0, 1.0, 0.0};
  std::optional<RunOutcome> o;
  try {
    o = run(m, 0.7, 1.0);
  } catch (const std::exception& e) {
    report(5, "matrix cross term rate", Verdict{false, fmt::format("exception: {}", e.what())});
    report(6, "fourth moment rate", Verdict{false, fmt::format("exception: {}", e.what())});
    return;
  }
  Verdict c5, c6;
  const double sc = slope_of(*o, "cross"), s4 = slope_of(*o, "e_x4");
  c5.require(within(sc, 1.0, 0.25), fmt::format("slope cross={}", f3(sc)));
  c6.require(within(s4, 1.4, 0.3), fmt::format("slope e_x4={}", f3(s4)));
  report(5, "matrix cross term rate", c5);
  report(6, "fourth moment rate", c6);
}

Verdict alternating() {
  auto m = base("c9", "shb-quadratic-sin", 500, 9);
  m.noise = {NoiseKind::gaussian, 1.0, 0.0, 0.0};
  const auto sim = run(m, 0.7, 1.0);
  m.mode = UpdateMode::alternating;
  const auto alt = run(m, 0.7, 1.0);
  Verdict v;
  for (const char* metric : {"e_x2", "e_y2"}) {
    const double s = slope_of(sim, metric), a = slope_of(alt, metric);
    v.require(std::abs(s - a) <= 0.1, fmt::format("{} simultaneous={} alternating={}", metric, f3(s), f3(a)));
  }
  return v;
}

Verdict schedule_machinery() {
  const auto start = std::chrono::steady_clock::now();
  const ProblemConstants c;
  Verdict v;
  const auto sched = corollary_schedule(c, 1, 1.0, 1.0);
  const auto audit = audit_schedule(sched, c, 1, 1000000);
  v.require(audit.all_pass(), fmt::format("corollary T0={} alpha0={} beta0={} audit over 1e6", sched.T0(),
                                          sched.alpha0(), sched.beta0()));
  const auto unit = audit_schedule(StepSchedule(1, 1, 1, 1, 1), c, 1, 1000);
  const auto* growth = unit.find("alpha_growth");
  v.require(growth && !growth->pass && growth->first_violation == 1u, "unit schedule fails alpha_growth at t=1");
  const auto b = schedule_bounds(c, 1);
  v.require(b.iota1 == 1.0 / 12 && b.iota2 == 1.0 / 14 && b.kappa == 1.0 / 200 && b.rho == 1.0 / 200,
            fmt::format("bounds ({}, {}, {}, {})", b.iota1, b.iota2, b.kappa, b.rho));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  v.require(secs < 5.0, fmt::format("{:.2f} s", secs));
  return v;
}

bool near_kink(double y) { return std::abs(y) < 0.01 || std::abs(std::abs(y) - 1.0) < 0.01; }

Verdict properties() {
  Verdict v;
  std::mt19937_64 gen(2024);

  bool ok = true;
  std::uniform_real_distribution<double> pt(-5, 5), dl(1, 3);
  for (int i = 0; i < 10000; ++i) {
    const double d = dl(gen), u = pt(gen), w = pt(gen);
    ok &= std::abs(h_tilde(d, u) - h_tilde(d, w)) <= std::abs(u - w) + 1e-12;
    ok &= h_tilde(d, -u) == -h_tilde(d, u);
  }
  v.require(ok, "h_tilde Lipschitz and odd on 1e4 pairs");

  ok = true;
  std::uniform_real_distribution<double> box(-3, 3);
  for (int checked = 0; checked < 100;) {
    const double x = box(gen), y = box(gen);
    if (near_kink(y)) continue;
    ++checked;
    using namespace bilevel;
    const auto close = [](double analytic, double fd) { return std::abs(analytic - fd) <= 1e-6 * std::max(1.0, std::abs(fd)); };
    ok &= close(df_dx(x, y), oracle::central([&](double z) { return inner_f(z, y); }, x));
    ok &= close(dg_dx(x, y), oracle::central([&](double z) { return outer_g(z, y); }, x));
    ok &= close(dg_dy(x, y), oracle::central([&](double z) { return outer_g(x, z); }, y));
    ok &= close(d2f_dxx(x, y), oracle::central([&](double z) { return df_dx(z, y); }, x));
    ok &= close(d2f_dydx(x, y), oracle::central([&](double z) { return df_dx(x, z); }, y));
  }
  v.require(ok, "bilevel derivatives vs finite differences at 100 points");

  ok = true;
  std::normal_distribution<double> n01(0, 1);
  for (int i = 0; i < 1000; ++i) {
    Matrix m{3, 3, std::vector<double>(9)};
    for (double& e : m.data) e = n01(gen);
    const double ref = oracle::norm_n_by_3(m);
    ok &= std::abs(spectral_norm(m) - ref) <= 1e-8 * std::max(1.0, ref);
  }
  v.require(ok, "spectral norm vs cubic oracle on 1000 3x3 matrices");

  ok = true;
  std::uniform_real_distribution<double> ex(-2.5, 2.5), amp(-3, 3);
  for (int i = 0; i < 500; ++i) {
    const double s = ex(gen), c = std::pow(10.0, amp(gen));
    std::vector<std::pair<double, double>> pts;
    for (double t = 1; t <= 1e6; t *= 1.7) pts.push_back({std::round(t), c * std::pow(std::round(t), -s)});
    ok &= std::abs(fit_slope(pts, 1, 1e6).slope - s) <= 1e-12;
  }
  v.require(ok, "fit_slope exact on 500 power laws");

  RunConfig cfg;
  cfg.problem_id = "bilevel-sin";
  cfg.schedule = StepSchedule(0.3, 0.7, 3, 1.0);
  cfg.noise = {NoiseKind::gaussian_biased, 1.0, 1.0, 10.0};
  cfg.horizon = 2000;
  cfg.replications = 37;
  cfg.base_seed = 11;
  cfg.checkpoints = default_checkpoints(cfg.horizon, 20);
  const auto ref = run_experiment(cfg, 1);
  ok = true;
  for (unsigned w : {2u, 3u, 8u}) {
    const auto other = run_experiment(cfg, w);
    for (std::size_t r = 0; r < ref.size(); ++r) ok &= other[r].x == ref[r].x && other[r].y == ref[r].y;
  }
  v.require(ok, "run_experiment identical under 1, 2, 3, 8 workers");
  produced.push_back(aggregate(ref));

  ok = true;
  std::size_t points = 0;
  for (const auto& s : produced) {
    for (const auto& p : s.points) {
      if (!p) continue;
      ++points;
      ok &= p->e_x4 >= p->e_x2 * p->e_x2 * (1 - 1e-9);
      ok &= p->e_y4 >= p->e_y2 * p->e_y2 * (1 - 1e-9);
      ok &= p->cross <= std::sqrt(p->e_x2 * p->e_y2) * (1 + 1e-9);
    }
  }
  v.require(ok, fmt::format("Jensen and Cauchy-Schwarz on {} series, {} points", produced.size(), points));
  return v;
}

}  // namespace

int main() {
  fmt::print("acceptance: {} worker(s)\n", workers());
  guarded(10, "schedule machinery", schedule_machinery);
  sign_abs();
  guarded(2, "decoupled sign-abs variant", decoupled_variant);
  bilevel_runs();
  guarded(4, "SGD with Polyak-Ruppert averaging", sgd_pr);
  linear();
  guarded(9, "alternating vs simultaneous", alternating);
  // Last, so the invariant check sees every series produced above.
  guarded(11, "property suites", properties);
  fmt::print("{} failure(s)\n", failures);
  return failures == 0 ? 0 : 1;
}
