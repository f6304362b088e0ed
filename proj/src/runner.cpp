// SPDX-License-Identifier: Apache-2.0
#include "ttsa/runner.hpp"

#include "ttsa/problems.hpp"

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

namespace ttsa {

using nlohmann::json;

namespace {

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw OutputError(fmt::format("output_dir: cannot write '{}'", path.string()));
  out << text;
  out.flush();
  if (!out) throw OutputError(fmt::format("output_dir: write to '{}' failed", path.string()));
}

std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::vector<double> beta0_candidates(const GridSearchSpec& spec, double b) {
  if (!spec.beta0_at_least_one_when_b_is_one || b != 1.0) return spec.beta0_grid;
  std::vector<double> out;
  for (double v : spec.beta0_grid) {
    if (v >= 1.0) out.push_back(v);
  }
  return out;
}

GridResult grid_search(const ProblemSpec& p, const RunConfig& base, const GridSearchSpec& spec, unsigned workers,
                       const std::string& label) {
  GridResult result;
  RunConfig cfg = base;
  cfg.horizon = spec.search_horizon;
  cfg.replications = spec.search_reps;
  cfg.checkpoints = {spec.search_horizon};

  const GridCell* best = nullptr;
  const auto betas = beta0_candidates(spec, base.schedule.b());
  result.cells.reserve(spec.alpha0_grid.size() * betas.size());
  for (double alpha0 : spec.alpha0_grid) {
    for (double beta0 : betas) {
      cfg.schedule = base.schedule.with_initial(alpha0, beta0);
      const MomentSeries s = aggregate(run_experiment(p, cfg, workers));
      GridCell cell{alpha0, beta0, s.divergent, std::numeric_limits<double>::infinity(),
                    std::numeric_limits<double>::infinity()};
      if (s.points.back()) {
        cell.e_x2 = s.points.back()->e_x2;
        cell.e_y2 = s.points.back()->e_y2;
      }
      if (!std::isfinite(cell.e_x2) || !std::isfinite(cell.e_y2)) cell.divergent_reps = std::max<std::uint64_t>(cell.divergent_reps, 1);
      result.cells.push_back(cell);
    }
  }
  for (const auto& cell : result.cells) {
    if (!cell.eligible()) continue;
    const bool better = !best || cell.e_y2 < best->e_y2 ||
                        (cell.e_y2 == best->e_y2 &&
                         (cell.e_x2 < best->e_x2 || (cell.e_x2 == best->e_x2 && cell.alpha0 > best->alpha0)));
    if (better) best = &cell;
  }
  if (!best) throw std::runtime_error(fmt::format("grid search for '{}': every cell diverged", label));
  result.alpha0 = best->alpha0;
  result.beta0 = best->beta0;
  return result;
}

RunConfig make_run_config(const ExperimentManifest& m, double a, double b) {
  RunConfig cfg;
  cfg.problem_id = m.problem;
  cfg.schedule = StepSchedule(m.alpha0, a, m.beta0, b, m.T0);
  cfg.noise = m.noise;
  cfg.horizon = m.horizon;
  cfg.replications = m.replications;
  cfg.base_seed = m.seed;
  cfg.mode = m.mode;
  cfg.checkpoints = m.checkpoints();
  cfg.x0 = m.x0;
  cfg.y0 = m.y0;
  return cfg;
}

ProblemSpec resolve_problem(const ExperimentManifest& m) {
  ProblemSpec p;
  try {
    p = find_problem(m.problem);
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("problem: {}", e.what()));
  }
  if (m.constants) p.constants = *m.constants;
  return p;
}

RunOutcome execute_run(const ExperimentManifest& m, const ProblemSpec& p, double a, double b, unsigned workers) {
  RunOutcome out;
  out.a = a;
  out.b = b;
  RunConfig cfg = make_run_config(m, a, b);
  validate_config(cfg, p);
  if (m.grid_search) {
    out.grid = grid_search(p, cfg, *m.grid_search, workers, m.name);
    cfg.schedule = cfg.schedule.with_initial(out.grid->alpha0, out.grid->beta0);
  }
  out.schedule = cfg.schedule;
  out.moments = aggregate(run_experiment(p, cfg, workers));
  for (const auto& name : m.slope_metrics) {
    const SlopeWindow w = m.window_for(name);
    try {
      out.slopes[name] = fit_slope(metric_series(out.moments, metric_from_string(name)), w.lo, w.hi, name);
    } catch (const std::invalid_argument& e) {
      out.slopes[name] = std::string(e.what());
    }
  }
  out.audit = audit_schedule(cfg.schedule, p.constants, p.d_x, std::max<std::uint64_t>(m.horizon, 2));
  out.prediction = predict_rates(p.constants, a, b);
  return out;
}

ExperimentManifest apply_options(ExperimentManifest m, const RunOptions& opt) {
  if (opt.seed) m.seed = *opt.seed;
  if (opt.out_dir) m.output_dir = *opt.out_dir;
  return m;
}

std::string rate_dir_name(double a, double b) { return fmt::format("a{:g}_b{:g}", a, b); }

json schedule_to_json(const StepSchedule& s) {
  return {{"alpha0", s.alpha0()}, {"a", s.a()}, {"beta0", s.beta0()}, {"b", s.b()}, {"T0", s.T0()}};
}

json bounds_to_json(const ScheduleBounds& b) {
  return {{"iota1", finite_or_null(b.iota1)},
          {"iota2", finite_or_null(b.iota2)},
          {"kappa", finite_or_null(b.kappa)},
          {"rho", finite_or_null(b.rho)},
          {"iota2_degenerate", b.iota2_degenerate},
          {"kappa_degenerate", b.kappa_degenerate},
          {"rho_degenerate", b.rho_degenerate}};
}

json audit_to_json(const ScheduleAudit& audit) {
  json conditions = json::object();
  for (const auto& c : audit.conditions) {
    conditions[c.name] = {{"pass", c.pass},
                          {"first_violation", c.first_violation ? json(*c.first_violation) : json(nullptr)},
                          {"worst_margin", finite_or_null(c.worst_margin)},
                          {"proxy", c.proxy}};
  }
  return {{"horizon", audit.horizon}, {"all_pass", audit.all_pass()}, {"conditions", conditions}};
}

json slope_to_json(const SlopeReport& r) {
  return {{"metric", r.metric},   {"window", {r.t_lo, r.t_hi}}, {"slope", r.slope},
          {"intercept", r.intercept}, {"r_squared", r.r_squared}, {"points", r.points},
          {"excluded_nonpositive", r.excluded_nonpositive}};
}

json grid_to_json(const GridResult& g) {
  json cells = json::array();
  for (const auto& c : g.cells) {
    cells.push_back({{"alpha0", c.alpha0},
                     {"beta0", c.beta0},
                     {"divergent_reps", c.divergent_reps},
                     {"eligible", c.eligible()},
                     {"e_x2", finite_or_null(c.e_x2)},
                     {"e_y2", finite_or_null(c.e_y2)}});
  }
  return {{"selected", {{"alpha0", g.alpha0}, {"beta0", g.beta0}}}, {"cells", cells}};
}

std::vector<RunOutcome> run_manifest(const ExperimentManifest& manifest, const RunOptions& opt) {
  const ExperimentManifest m = apply_options(manifest, opt);
  const ProblemSpec p = resolve_problem(m);
  const std::string hash = manifest_hash(m);
  const unsigned workers = opt.workers ? opt.workers : default_workers();

  const std::filesystem::path root(m.output_dir);
  std::error_code ec;
  std::filesystem::create_directories(root, ec);
  if (ec || !std::filesystem::is_directory(root)) {
    throw OutputError(fmt::format("output_dir: cannot create '{}'", root.string()));
  }

  std::vector<RunOutcome> outcomes;
  for (const auto& [a, b] : m.rates) {
    const auto started = std::chrono::steady_clock::now();
    const std::string started_at = utc_now();
    std::cerr << fmt::format("[{}] a={:g} b={:g}: running\n", m.name, a, b);

    RunOutcome out = execute_run(m, p, a, b, workers);
    out.directory = m.rates.size() == 1 ? root : root / rate_dir_name(a, b);
    std::filesystem::create_directories(out.directory, ec);
    if (ec) throw OutputError(fmt::format("output_dir: cannot create '{}'", out.directory.string()));

    std::ostringstream csv;
    write_moments_csv(csv, out.moments, {"manifest_sha256 " + hash});
    write_text(out.directory / "moments.csv", csv.str());

    json slopes = json::object();
    for (const auto& [name, s] : out.slopes) {
      if (const auto* r = std::get_if<SlopeReport>(&s)) {
        slopes[name] = slope_to_json(*r);
      } else {
        slopes[name] = {{"metric", name}, {"error", std::get<std::string>(s)}};
      }
    }
    const auto& pr = out.prediction;
    json prediction = {{"verdict", pr.verdict()},
                       {"ratio", pr.ratio},
                       {"max_ratio", pr.max_ratio},
                       {"e_x2", pr.e_x2},
                       {"cross", pr.cross ? json(*pr.cross) : json(nullptr)},
                       {"e_y2", pr.e_y2 ? json(*pr.e_y2) : json(nullptr)},
                       {"quartic", pr.quartic ? json(*pr.quartic) : json(nullptr)},
                       {"problem_locally_linear", p.locally_linear}};
    write_text(out.directory / "slopes.json",
               json{{"manifest_sha256", hash}, {"slopes", slopes}, {"prediction", prediction}}.dump(2) + "\n");

    json audit = audit_to_json(out.audit);
    audit["manifest_sha256"] = hash;
    audit["schedule"] = schedule_to_json(out.schedule);
    write_text(out.directory / "audit.json", audit.dump(2) + "\n");

    if (out.grid) {
      json grid = grid_to_json(*out.grid);
      grid["manifest_sha256"] = hash;
      write_text(out.directory / "grid.json", grid.dump(2) + "\n");
    }

    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    json prov = {{"manifest_sha256", hash},
                 {"manifest", json::parse(serialize_manifest(m))},
                 {"base_seed", m.seed},
                 {"artifact_version", TTSA_VERSION},
                 {"rates", {{"a", a}, {"b", b}}},
                 {"schedule", schedule_to_json(out.schedule)},
                 {"divergent_replications", out.moments.divergent},
                 {"workers", workers},
                 {"started_at", started_at},
                 {"wall_clock_seconds", elapsed}};
    write_text(out.directory / "provenance.json", prov.dump(2) + "\n");
    outcomes.push_back(std::move(out));
  }
  return outcomes;
}

}  // namespace ttsa
