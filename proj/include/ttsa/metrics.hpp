// SPDX-License-Identifier: Apache-2.0
//
// Monte Carlo moment estimates over replications, the spectral norm of the
// mean residual outer product, and log-log slope fitting.
#pragma once

#include "ttsa/core.hpp"
#include "ttsa/engine.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ttsa {

/// Moments at one checkpoint over the non-divergent replications.
struct MomentPoint {
  double e_x2 = 0;   // mean ||x_hat||^2
  double se_x2 = 0;  // sample std / sqrt(n)
  double e_y2 = 0;
  double se_y2 = 0;
  double cross = 0;  // spectral norm of mean(x_hat y_hat^T)
  double e_x4 = 0;
  double e_y4 = 0;
};

struct MomentSeries {
  std::vector<std::uint64_t> t;
  std::vector<std::uint64_t> n;                 // non-divergent replications
  std::vector<std::optional<MomentPoint>> points;  // absent when n == 0
  std::uint64_t divergent = 0;

  std::size_t size() const noexcept { return t.size(); }
};

/// Throws std::invalid_argument when captures disagree on the checkpoint grid.
MomentSeries aggregate(const std::vector<TrajectoryCapture>& captures);

/// Row-major matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  double operator()(std::size_t r, std::size_t c) const noexcept { return data[r * cols + c]; }
  double& operator()(std::size_t r, std::size_t c) noexcept { return data[r * cols + c]; }
  Matrix transposed() const;
};

/// Largest singular value. Closed form when min(rows, cols) <= 2, otherwise
/// power iteration on M^T M to relative tolerance 1e-10.
double spectral_norm(const Matrix& m);

enum class Metric { e_x2, e_y2, cross, e_x4, e_y4, e_sum };

std::string to_string(Metric m);
Metric metric_from_string(const std::string& s);  // throws ConfigError
std::vector<Metric> all_metrics();

/// Metric values with their checkpoint index; absent points are skipped.
std::vector<std::pair<double, double>> metric_series(const MomentSeries& s, Metric m);

struct SlopeReport {
  std::string metric;
  double t_lo = 0;
  double t_hi = 0;
  double slope = 0;  // value ~ c t^{-slope}
  double intercept = 0;  // log10 c
  double r_squared = 0;
  std::size_t points = 0;
  std::size_t excluded_nonpositive = 0;
};

/// OLS of log10(value) on log10(t) over t in [t_lo, t_hi]. Non-positive values
/// are excluded and counted; fewer than 3 usable points throws
/// std::invalid_argument.
SlopeReport fit_slope(const std::vector<std::pair<double, double>>& series, double t_lo, double t_hi,
                      std::string metric = {});

struct RatePrediction {
  bool decoupled = false;
  double ratio = 0;      // b / a
  double max_ratio = 0;  // 1 + min(delta_F / 2, delta_G)
  // Decay exponents; the slow-iterate ones are absent outside the guarantee.
  double e_x2 = 0;
  std::optional<double> cross;
  std::optional<double> e_y2;
  std::optional<double> quartic;

  std::string verdict() const { return decoupled ? "decoupled predicted" : "outside guarantee"; }
};

/// Throws std::invalid_argument unless a, b in (0, 1] and b >= a.
RatePrediction predict_rates(const ProblemConstants& c, double a, double b);

/// CSV: header "t,n,e_x2,se_x2,e_y2,se_y2,cross,e_x4,e_y4", 17 significant
/// digits, LF endings; absent points leave the moment fields empty. Optional
/// leading '#' comment lines carry provenance.
void write_moments_csv(std::ostream& os, const MomentSeries& s, const std::vector<std::string>& comments = {});
MomentSeries read_moments_csv(std::istream& is);

}  // namespace ttsa
