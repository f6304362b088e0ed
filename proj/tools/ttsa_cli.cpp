// SPDX-License-Identifier: Apache-2.0
//
// ttsa: run two-time-scale SA experiments from manifests, audit step-size
// schedules, and refit log-log slopes offline.
#include "ttsa/manifest.hpp"
#include "ttsa/metrics.hpp"
#include "ttsa/problems.hpp"
#include "ttsa/runner.hpp"
#include "ttsa/schedules.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

namespace {

using nlohmann::json;

unsigned resolve_workers(int flag) {
  if (flag > 0) return static_cast<unsigned>(flag);
  return ttsa::default_workers();
}

int cmd_run(const std::string& path, int workers, std::optional<std::uint64_t> seed,
            std::optional<std::string> out) {
  const auto m = ttsa::load_manifest(path);
  ttsa::RunOptions opt{resolve_workers(workers), seed, out};
  const auto outcomes = ttsa::run_manifest(m, opt);
  for (const auto& o : outcomes) {
    std::cout << "a=" << o.a << " b=" << o.b << " -> " << o.directory.string() << "\n";
    for (const auto& [name, s] : o.slopes) {
      if (const auto* r = std::get_if<ttsa::SlopeReport>(&s)) {
        std::cout << "  " << name << " slope " << r->slope << " (R^2 " << r->r_squared << ")\n";
      } else {
        std::cout << "  " << name << " " << std::get<std::string>(s) << "\n";
      }
    }
  }
  return 0;
}

int cmd_audit(const std::string& path, std::optional<std::uint64_t> horizon, std::optional<std::string> out) {
  const auto m = ttsa::load_manifest(path);
  const auto p = ttsa::resolve_problem(m);
  const std::uint64_t h = std::max<std::uint64_t>(horizon.value_or(m.horizon), 2);
  json report = json::object();
  for (const auto& [a, b] : m.rates) {
    const ttsa::StepSchedule s(m.alpha0, a, m.beta0, b, m.T0);
    json entry = ttsa::audit_to_json(ttsa::audit_schedule(s, p.constants, p.d_x, h));
    entry["schedule"] = ttsa::schedule_to_json(s);
    report[ttsa::rate_dir_name(a, b)] = entry;
  }
  const std::string text = report.dump(2) + "\n";
  std::cout << text;
  if (out) {
    std::filesystem::create_directories(*out);
    std::ofstream f(std::filesystem::path(*out) / "audit.json");
    if (!f) throw ttsa::OutputError("--out: cannot write audit.json");
    f << text;
  }
  return 0;
}

int cmd_constants(const std::string& path) {
  const auto m = ttsa::load_manifest(path);
  const auto p = ttsa::resolve_problem(m);
  const auto b = ttsa::schedule_bounds(p.constants, p.d_x);
  json j = ttsa::bounds_to_json(b);
  j["max_rate_ratio"] = ttsa::max_rate_ratio(p.constants);
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_corollary(const std::string& path, double a, double b) {
  const auto m = ttsa::load_manifest(path);
  const auto p = ttsa::resolve_problem(m);
  const auto s = ttsa::corollary_schedule(p.constants, p.d_x, a, b);
  std::cout << ttsa::schedule_to_json(s).dump(2) << "\n";
  return 0;
}

int cmd_slope(const std::string& csv, const std::string& metric, const std::vector<double>& window) {
  std::ifstream in(csv);
  if (!in) throw std::runtime_error("cannot read '" + csv + "'");
  const auto series = ttsa::read_moments_csv(in);
  double lo = 0, hi = 0;
  if (window.size() == 2) {
    lo = window[0];
    hi = window[1];
  } else {
    if (series.t.empty()) throw std::runtime_error("empty moments file");
    hi = static_cast<double>(series.t.back());
    lo = hi / 10.0;
  }
  const auto r = ttsa::fit_slope(ttsa::metric_series(series, ttsa::metric_from_string(metric)), lo, hi, metric);
  std::cout << ttsa::slope_to_json(r).dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-time-scale stochastic approximation laboratory"};
  app.require_subcommand(1);

  int workers = 0;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  app.add_option("--workers", workers, "Worker threads (default: TTSA_WORKERS or hardware concurrency)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--seed", seed, "Override the manifest base seed");
  app.add_option("--out", out, "Override the manifest output directory");

  std::string manifest_path;
  auto* run = app.add_subcommand("run", "Grid search (if configured) and full experiment");
  run->add_option("manifest", manifest_path, "Manifest JSON")->required()->check(CLI::ExistingFile);

  std::optional<std::uint64_t> audit_horizon;
  auto* audit = app.add_subcommand("audit", "Audit the manifest step-size schedule(s)");
  audit->add_option("manifest", manifest_path, "Manifest JSON")->required()->check(CLI::ExistingFile);
  audit->add_option("--horizon", audit_horizon, "Audit horizon (default: manifest horizon)");

  auto* constants = app.add_subcommand("constants", "Print the step-size bounds for the manifest problem");
  constants->add_option("manifest", manifest_path, "Manifest JSON")->required()->check(CLI::ExistingFile);

  double a = 1.0, b = 1.0;
  auto* corollary = app.add_subcommand("corollary", "Print the constructive schedule for rates (a, b)");
  corollary->add_option("manifest", manifest_path, "Manifest JSON")->required()->check(CLI::ExistingFile);
  corollary->add_option("--a", a, "Fast-iterate exponent")->required();
  corollary->add_option("--b", b, "Slow-iterate exponent")->required();

  std::string csv_path, metric = "e_y2";
  std::vector<double> window;
  auto* slope = app.add_subcommand("slope", "Refit a log-log slope from moments.csv");
  slope->add_option("moments", csv_path, "moments.csv")->required()->check(CLI::ExistingFile);
  slope->add_option("--metric", metric, "e_x2, e_y2, cross, e_x4, e_y4 or e_sum");
  slope->add_option("--window", window, "Window as LO,HI (default: last decade)")->expected(2)->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(manifest_path, workers, seed, out);
    if (*audit) return cmd_audit(manifest_path, audit_horizon, out);
    if (*constants) return cmd_constants(manifest_path);
    if (*corollary) return cmd_corollary(manifest_path, a, b);
    if (*slope) return cmd_slope(csv_path, metric, window);
  } catch (const ttsa::ManifestError& e) {
    std::cerr << "manifest error: " << e.what() << "\n";
    return 3;
  } catch (const ttsa::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 4;
  } catch (const ttsa::OutputError& e) {
    std::cerr << "output error: " << e.what() << "\n";
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
