// SPDX-License-Identifier: Apache-2.0
#include "ttsa/problems.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ttsa {

double h_tilde(double delta, double x) {
  if (!(delta >= 1.0)) throw std::invalid_argument(fmt::format("h_tilde needs delta >= 1, got {}", delta));
  const double ax = std::abs(x);
  if (ax <= 1.0) return sign(x) * std::pow(ax, delta) / delta;
  return sign(x) * (ax - 1.0 + 1.0 / delta);
}

double h_tilde_derivative(double delta, double x) {
  if (!(delta >= 1.0)) throw std::invalid_argument(fmt::format("h_tilde needs delta >= 1, got {}", delta));
  const double ax = std::abs(x);
  if (ax <= 1.0) return delta == 1.0 ? 1.0 : std::pow(ax, delta - 1.0);
  return 1.0;
}

double bisect(const std::function<double(double)>& fn, double lo, double hi, double tol) {
  double flo = fn(lo);
  const double fhi = fn(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if (sign(flo) == sign(fhi)) {
    throw std::invalid_argument(fmt::format("bisect: no sign change on [{}, {}]", lo, hi));
  }
  for (int i = 0; i < 400 && hi - lo > tol; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = fn(mid);
    if (fm == 0.0) return mid;
    if (sign(fm) == sign(flo)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

namespace {

PairMap scalar_pair(std::function<double(double, double)> fn) {
  return [fn = std::move(fn)](const Vec& x, const Vec& y) { return Vec{fn(x[0], y[0])}; };
}

InnerMap scalar_inner(ScalarMap fn) {
  return [fn = std::move(fn)](const Vec& y) { return Vec{fn(y[0])}; };
}

std::string format_delta(double delta) { return fmt::format("{:g}", delta); }

}  // namespace

ProblemSpec problem_sign_abs(ScalarMap H, std::optional<double> delta) {
  ProblemSpec p;
  p.d_x = p.d_y = 1;
  p.x0 = Vec{2.0};
  p.y0 = Vec{2.0};
  if (delta) {
    const double d = *delta;
    h_tilde(d, 0.0);  // rejects d < 1 up front
    p.id = "sign-abs-h" + format_delta(d);
    H = [](double y) { return y; };
    p.G = scalar_pair([d](double x, double y) { return -h_tilde(d, std::abs(x - y)) * sign(y) + y; });
    p.constants.delta_F = 1.0;
    // The remainder of G is h_tilde_d(|x - y|) = O(|x - y|^d): exponent d - 1.
    if (d > 1.0) {
      p.constants.delta_G = std::min(1.0, d - 1.0);
    } else {
      p.locally_linear = false;
    }
    p.constants.S_BF = 0.0;
    p.constants.S_BG = 1.0 / d;
  } else {
    p.id = "sign-abs";
    p.G = scalar_pair([H](double x, double y) { return -std::abs(x - H(y)) * sign(y) + y; });
    // G is not locally linear here; delta_G = 1 is a placeholder.
    p.locally_linear = false;
    p.constants.S_BG = 1.0;
  }
  p.F = scalar_pair([H](double x, double y) { return x - H(y); });
  p.H = scalar_inner(H);
  p.root = RootPair{Vec{H(0.0)}, Vec{0.0}};
  p.constants.S_H = 0.0;
  require_valid(p);
  return p;
}

ScalarObjective quadratic_sin() {
  return {[](double x) { return 2.0 * x + std::cos(x); }, 1.0, 3.0, 1.0};
}

double quadratic_sin_minimizer() {
  static const double root = bisect([](double u) { return 2.0 * u + std::cos(u); }, -1.0, 0.0);
  return root;
}

ProblemSpec problem_sgd_pr(const ScalarObjective& f, double x_opt) {
  ProblemSpec p;
  p.id = "sgd-pr";
  p.F = scalar_pair([g = f.grad](double x, double) { return g(x); });
  p.G = scalar_pair([](double x, double y) { return y - x; });
  p.H = scalar_inner([x_opt](double) { return x_opt; });
  p.root = RootPair{Vec{x_opt}, Vec{x_opt}};
  p.x0 = Vec{2.0};
  p.y0 = Vec{2.0};
  auto& c = p.constants;
  c.L_H = c.S_H = c.S_BG = 0.0;
  c.L_F = f.L;
  c.mu_F = f.mu;
  c.L_Gx = c.L_Gy = c.mu_G = 1.0;
  c.S_BF = f.S;
  c.delta_F = c.delta_G = c.delta_H = 1.0;
  require_valid(p);
  return p;
}

ProblemSpec problem_shb(const ScalarObjective& f, double y_opt) {
  ProblemSpec p;
  p.id = "shb";
  p.F = scalar_pair([g = f.grad](double x, double y) { return x - g(y); });
  p.G = scalar_pair([](double x, double) { return x; });
  p.H = scalar_inner(f.grad);
  p.root = RootPair{Vec{0.0}, Vec{y_opt}};
  p.x0 = Vec{2.0};
  p.y0 = Vec{2.0};
  auto& c = p.constants;
  c.L_H = c.L_Gy = f.L;
  c.L_F = c.L_Gx = 1.0;
  c.mu_F = 1.0;
  c.mu_G = f.mu;
  c.delta_H = 1.0;
  c.S_H = f.S / 2.0;
  c.S_BF = 0.0;
  c.S_BG = f.S;
  c.delta_F = c.delta_G = 1.0;
  require_valid(p);
  return p;
}

namespace bilevel {

namespace {
double h2(double y) { return h_tilde(2.0, y); }
double h2_prime(double y) { return h_tilde_derivative(2.0, y); }
}  // namespace

double inner_f(double x, double y) {
  const double u = x + h2(y);
  return u * u + std::sin(u);
}
double outer_g(double x, double y) {
  const double u = x + h2(y);
  return u * u + y * y + std::sin(y);
}
double df_dx(double x, double y) {
  const double u = x + h2(y);
  return 2.0 * u + std::cos(u);
}
double d2f_dxx(double x, double y) { return 2.0 - std::sin(x + h2(y)); }
double d2f_dydx(double x, double y) { return (2.0 - std::sin(x + h2(y))) * h2_prime(y); }
double dg_dx(double x, double y) { return 2.0 * (x + h2(y)); }
double dg_dy(double x, double y) { return 2.0 * (x + h2(y)) * h2_prime(y) + 2.0 * y + std::cos(y); }

}  // namespace bilevel

ProblemSpec problem_bilevel() {
  using namespace bilevel;
  ProblemSpec p;
  p.id = "bilevel-sin";
  p.F = scalar_pair(df_dx);
  auto G = [](double x, double y) { return dg_dy(x, y) - d2f_dydx(x, y) / d2f_dxx(x, y) * dg_dx(x, y); };
  p.G = scalar_pair(G);
  const double u_star = quadratic_sin_minimizer();
  auto H = [u_star](double y) { return u_star - h_tilde(2.0, y); };
  p.H = scalar_inner(H);
  const double y_star = bisect([&](double y) { return G(H(y), y); }, -1.0, 0.0);
  p.root = RootPair{Vec{H(y_star)}, Vec{y_star}};
  p.x0 = Vec{2.0};
  p.y0 = Vec{2.0};
  // mu_F, L_F: 2 - sin u in [1, 3]. H' = -h2' in [-1, 0] with |h2''| <= 1.
  // G(H(y), y) = 2y + cos y, slope in [1, 3]; the x-dependence of G cancels
  // analytically, so L_Gx = 0.
  auto& c = p.constants;
  c.mu_F = 1.0;
  c.L_F = 3.0;
  c.L_H = 1.0;
  c.L_Gx = 0.0;
  c.mu_G = 1.0;
  c.L_Gy = 3.0;
  c.delta_F = c.delta_G = c.delta_H = 1.0;
  c.S_H = 1.0;
  c.S_BF = 1.0;
  c.S_BG = 1.0;
  require_valid(p);
  return p;
}

ProblemSpec problem_linear_coupled() {
  ProblemSpec p;
  p.id = "linear-coupled";
  p.F = scalar_pair([](double x, double y) { return x - y; });
  p.G = scalar_pair([](double x, double y) { return y + 0.5 * (x - y); });
  p.H = scalar_inner([](double y) { return y; });
  p.root = RootPair{Vec{0.0}, Vec{0.0}};
  p.x0 = Vec{2.0};
  p.y0 = Vec{2.0};
  auto& c = p.constants;
  c.mu_F = c.L_F = c.L_H = 1.0;
  c.L_Gx = 0.5;
  c.mu_G = c.L_Gy = 1.0;
  c.delta_F = c.delta_G = c.delta_H = 1.0;
  require_valid(p);
  return p;
}

std::vector<std::string> catalog_ids() {
  return {"sign-abs", "sign-abs-h1.5", "sgd-pr-quadratic-sin", "shb-quadratic-sin", "bilevel-sin", "linear-coupled"};
}

ProblemSpec find_problem(const std::string& id) {
  ProblemSpec p;
  if (id == "sign-abs") {
    p = problem_sign_abs([](double y) { return y; });
  } else if (id == "sign-abs-h1.5") {
    p = problem_sign_abs([](double y) { return y; }, 1.5);
  } else if (id == "sgd-pr-quadratic-sin") {
    p = problem_sgd_pr(quadratic_sin(), quadratic_sin_minimizer());
  } else if (id == "shb-quadratic-sin") {
    p = problem_shb(quadratic_sin(), quadratic_sin_minimizer());
  } else if (id == "bilevel-sin") {
    p = problem_bilevel();
  } else if (id == "linear-coupled") {
    p = problem_linear_coupled();
  } else {
    throw ConfigError(fmt::format("unknown problem id '{}'", id));
  }
  p.id = id;
  return p;
}

}  // namespace ttsa
