// SPDX-License-Identifier: Apache-2.0
#include "ttsa/metrics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace ttsa {

MomentSeries aggregate(const std::vector<TrajectoryCapture>& captures) {
  MomentSeries s;
  if (captures.empty()) return s;
  const auto& grid = captures.front().checkpoints;
  std::vector<const TrajectoryCapture*> healthy;
  for (const auto& c : captures) {
    if (c.checkpoints != grid) throw std::invalid_argument("captures do not share a checkpoint grid");
    if (c.diverged()) {
      ++s.divergent;
    } else {
      healthy.push_back(&c);
    }
  }

  const std::size_t n = healthy.size();
  s.t = grid;
  s.n.assign(grid.size(), n);
  s.points.resize(grid.size());
  if (n == 0) return s;

  const std::size_t d_x = healthy.front()->x_hat.front().dim();
  const std::size_t d_y = healthy.front()->y_hat.front().dim();
  const double inv_n = 1.0 / static_cast<double>(n);

  for (std::size_t k = 0; k < grid.size(); ++k) {
    double sx2 = 0, sy2 = 0, sx4 = 0, sy4 = 0;
    Matrix m{d_x, d_y, std::vector<double>(d_x * d_y, 0.0)};
    for (const auto* c : healthy) {
      const Vec& xh = c->x_hat[k];
      const Vec& yh = c->y_hat[k];
      const double nx = xh.norm_sq();
      const double ny = yh.norm_sq();
      sx2 += nx;
      sy2 += ny;
      sx4 += nx * nx;
      sy4 += ny * ny;
      for (std::size_t i = 0; i < d_x; ++i) {
        for (std::size_t j = 0; j < d_y; ++j) m(i, j) += xh[i] * yh[j];
      }
    }
    MomentPoint p;
    p.e_x2 = sx2 * inv_n;
    p.e_y2 = sy2 * inv_n;
    p.e_x4 = sx4 * inv_n;
    p.e_y4 = sy4 * inv_n;
    if (n > 1) {
      double vx = 0, vy = 0;
      for (const auto* c : healthy) {
        const double dx = c->x_hat[k].norm_sq() - p.e_x2;
        const double dy = c->y_hat[k].norm_sq() - p.e_y2;
        vx += dx * dx;
        vy += dy * dy;
      }
      const double denom = static_cast<double>(n - 1);
      p.se_x2 = std::sqrt(vx / denom * inv_n);
      p.se_y2 = std::sqrt(vy / denom * inv_n);
    }
    for (double& v : m.data) v *= inv_n;
    p.cross = spectral_norm(m);
    s.points[k] = p;
  }
  return s;
}

Matrix Matrix::transposed() const {
  Matrix t{cols, rows, std::vector<double>(data.size())};
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) t(c, r) = (*this)(r, c);
  }
  return t;
}

double spectral_norm(const Matrix& m) {
  if (m.rows == 0 || m.cols == 0) return 0.0;
  if (std::min(m.rows, m.cols) == 1) {
    double s = 0;
    for (double v : m.data) s += v * v;
    return std::sqrt(s);
  }
  // Gram matrix on the smaller side.
  const bool wide = m.rows <= m.cols;
  const std::size_t k = wide ? m.rows : m.cols;
  const std::size_t inner = wide ? m.cols : m.rows;
  auto at = [&](std::size_t i, std::size_t l) { return wide ? m(i, l) : m(l, i); };
  std::vector<double> gram(k * k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i; j < k; ++j) {
      double s = 0;
      for (std::size_t l = 0; l < inner; ++l) s += at(i, l) * at(j, l);
      gram[i * k + j] = gram[j * k + i] = s;
    }
  }
  if (k == 2) {
    const double a = gram[0], b = gram[1], d = gram[3];
    const double lambda = 0.5 * (a + d + std::hypot(a - d, 2.0 * b));
    return std::sqrt(std::max(lambda, 0.0));
  }

  std::vector<double> v(k), w(k);
  for (std::size_t i = 0; i < k; ++i) v[i] = 1.0 / (static_cast<double>(i) + 1.618);
  double lambda = 0;
  for (int iter = 0; iter < 100000; ++iter) {
    double norm = 0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0) return 0.0;
    for (double& x : v) x /= norm;
    for (std::size_t i = 0; i < k; ++i) {
      double s = 0;
      for (std::size_t j = 0; j < k; ++j) s += gram[i * k + j] * v[j];
      w[i] = s;
    }
    double rayleigh = 0;
    for (std::size_t i = 0; i < k; ++i) rayleigh += v[i] * w[i];
    const bool converged = iter > 0 && std::abs(rayleigh - lambda) <= 1e-10 * std::abs(rayleigh);
    lambda = rayleigh;
    if (converged) break;
    std::swap(v, w);
  }
  return std::sqrt(std::max(lambda, 0.0));
}

std::string to_string(Metric m) {
  switch (m) {
    case Metric::e_x2: return "e_x2";
    case Metric::e_y2: return "e_y2";
    case Metric::cross: return "cross";
    case Metric::e_x4: return "e_x4";
    case Metric::e_y4: return "e_y4";
    case Metric::e_sum: return "e_sum";
  }
  return "?";
}

Metric metric_from_string(const std::string& s) {
  for (Metric m : all_metrics()) {
    if (to_string(m) == s) return m;
  }
  throw ConfigError(fmt::format("unknown metric '{}'", s));
}

std::vector<Metric> all_metrics() {
  return {Metric::e_x2, Metric::e_y2, Metric::cross, Metric::e_x4, Metric::e_y4, Metric::e_sum};
}

std::vector<std::pair<double, double>> metric_series(const MomentSeries& s, Metric m) {
  std::vector<std::pair<double, double>> out;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (!s.points[k]) continue;
    const MomentPoint& p = *s.points[k];
    double v = 0;
    switch (m) {
      case Metric::e_x2: v = p.e_x2; break;
      case Metric::e_y2: v = p.e_y2; break;
      case Metric::cross: v = p.cross; break;
      case Metric::e_x4: v = p.e_x4; break;
      case Metric::e_y4: v = p.e_y4; break;
      case Metric::e_sum: v = p.e_x2 + p.e_y2; break;
    }
    out.emplace_back(static_cast<double>(s.t[k]), v);
  }
  return out;
}

SlopeReport fit_slope(const std::vector<std::pair<double, double>>& series, double t_lo, double t_hi,
                      std::string metric) {
  SlopeReport r;
  r.metric = std::move(metric);
  r.t_lo = t_lo;
  r.t_hi = t_hi;
  std::vector<double> lx, ly;
  for (const auto& [t, v] : series) {
    if (t < t_lo || t > t_hi) continue;
    if (!(v > 0) || !std::isfinite(v) || !(t > 0)) {
      ++r.excluded_nonpositive;
      continue;
    }
    lx.push_back(std::log10(t));
    ly.push_back(std::log10(v));
  }
  r.points = lx.size();
  if (r.points < 3) {
    throw std::invalid_argument(fmt::format("slope fit for '{}' on [{}, {}]: only {} usable points (need 3)",
                                            r.metric, t_lo, t_hi, r.points));
  }
  const double n = static_cast<double>(r.points);
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0) throw std::invalid_argument("slope fit: all points share one t");
  const double beta = sxy / sxx;
  r.slope = -beta;
  r.intercept = my - beta * mx;
  double ss_res = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double e = ly[i] - (r.intercept + beta * lx[i]);
    ss_res += e * e;
  }
  // A flat series is fit exactly; syy is only rounding noise there.
  r.r_squared = syy <= 1e-24 * n * (1 + my * my) ? 1.0 : std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  return r;
}

RatePrediction predict_rates(const ProblemConstants& c, double a, double b) {
  if (!(a > 0 && a <= 1) || !(b > 0 && b <= 1) || b < a) {
    throw std::invalid_argument("predict_rates needs a, b in (0, 1] with b >= a");
  }
  RatePrediction p;
  p.ratio = b / a;
  p.max_ratio = 1.0 + std::min(c.delta_F / 2.0, c.delta_G);
  p.decoupled = p.ratio <= p.max_ratio * (1.0 + 1e-12);
  p.e_x2 = a;
  if (p.decoupled) {
    p.cross = b;
    p.e_y2 = b;
    p.quartic = 2.0 * a;
  }
  return p;
}

namespace {
constexpr const char* kCsvHeader = "t,n,e_x2,se_x2,e_y2,se_y2,cross,e_x4,e_y4";
}

void write_moments_csv(std::ostream& os, const MomentSeries& s, const std::vector<std::string>& comments) {
  for (const auto& c : comments) os << "# " << c << '\n';
  os << kCsvHeader << '\n';
  for (std::size_t k = 0; k < s.size(); ++k) {
    os << s.t[k] << ',' << s.n[k];
    if (const auto& p = s.points[k]) {
      os << fmt::format(",{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}", p->e_x2, p->se_x2, p->e_y2,
                        p->se_y2, p->cross, p->e_x4, p->e_y4);
    } else {
      os << ",,,,,,,";
    }
    os << '\n';
  }
}

MomentSeries read_moments_csv(std::istream& is) {
  MomentSeries s;
  std::string line;
  bool header_seen = false;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != kCsvHeader) throw std::runtime_error(fmt::format("moments CSV: unexpected header '{}'", line));
      header_seen = true;
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    while (f.size() < 9) f.emplace_back();
    if (f.size() != 9) throw std::runtime_error(fmt::format("moments CSV line {}: expected 9 fields", lineno));
    try {
      s.t.push_back(std::stoull(f[0]));
      s.n.push_back(std::stoull(f[1]));
      if (f[2].empty()) {
        s.points.emplace_back();
      } else {
        MomentPoint p;
        p.e_x2 = std::stod(f[2]);
        p.se_x2 = std::stod(f[3]);
        p.e_y2 = std::stod(f[4]);
        p.se_y2 = std::stod(f[5]);
        p.cross = std::stod(f[6]);
        p.e_x4 = std::stod(f[7]);
        p.e_y4 = std::stod(f[8]);
        s.points.push_back(p);
      }
    } catch (const std::logic_error&) {
      throw std::runtime_error(fmt::format("moments CSV line {}: malformed number", lineno));
    }
  }
  if (!header_seen) throw std::runtime_error("moments CSV: missing header");
  return s;
}

}  // namespace ttsa
