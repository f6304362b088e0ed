// SPDX-License-Identifier: Apache-2.0
//
// Catalog of example problems. Every constructor returns a ProblemSpec that
// has already passed validate_problem.
#pragma once

#include "ttsa/core.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace ttsa {

/// sign(x) = 1 for x > 0, -1 for x < 0, 0 at 0.
inline double sign(double x) noexcept { return static_cast<double>(x > 0) - static_cast<double>(x < 0); }

/// Power/linear splice: sign(x)|x|^delta/delta on |x| <= 1, sign(x)(|x| - 1 + 1/delta)
/// beyond. 1-Lipschitz for delta >= 1; throws std::invalid_argument otherwise.
double h_tilde(double delta, double x);

/// Continuous derivative of h_tilde: |x|^(delta-1) on |x| <= 1, 1 beyond.
double h_tilde_derivative(double delta, double x);

/// Bisection root of a continuous scalar function with a sign change on
/// [lo, hi], to absolute width `tol`.
double bisect(const std::function<double(double)>& fn, double lo, double hi, double tol = 1e-12);

using ScalarMap = std::function<double(double)>;

/// F(x, y) = x - H(y), G(x, y) = -|x - H(y)| sign(y) + y, root (H(0), 0).
/// H must be 1-Lipschitz and one-to-one (caller's responsibility). With
/// `delta` the |.| inside G becomes h_tilde_delta(|.|) and H is forced to the
/// identity.
ProblemSpec problem_sign_abs(ScalarMap H, std::optional<double> delta = std::nullopt);

/// Strongly convex objective with a known gradient and curvature range.
struct ScalarObjective {
  ScalarMap grad;
  double mu = 1.0;  // strong convexity
  double L = 1.0;   // smoothness
  double S = 0.0;   // Lipschitz constant of the Hessian
};

/// f(x) = x^2 + sin x: mu = 1, L = 3, S = 1.
ScalarObjective quadratic_sin();

/// SGD with Polyak-Ruppert averaging: F = grad f(x), G = y - x, H = x_opt.
ProblemSpec problem_sgd_pr(const ScalarObjective& f, double x_opt);

/// Normalized stochastic heavy ball: F = x - grad f(y), G = x, H = grad f.
ProblemSpec problem_shb(const ScalarObjective& f, double y_opt);

/// Scalar bilevel instance with inner f(x, y) = (x + h2(y))^2 + sin(x + h2(y))
/// and outer g(x, y) = (x + h2(y))^2 + y^2 + sin y, h2 = h_tilde with delta 2.
/// F = d_x f and G = d_y g - d_yx f (d_xx f)^-1 d_x g, all analytic.
ProblemSpec problem_bilevel();

/// Analytic pieces of the bilevel instance, exposed for derivative checks.
namespace bilevel {
double inner_f(double x, double y);
double outer_g(double x, double y);
double df_dx(double x, double y);
double d2f_dxx(double x, double y);
double d2f_dydx(double x, double y);
double dg_dx(double x, double y);
double dg_dy(double x, double y);
}  // namespace bilevel

/// Linear coupled test problem F = x - y, G = y + 0.5 (x - y); root (0, 0).
ProblemSpec problem_linear_coupled();

/// Root of 2u + cos u = 0 (bisection, cached).
double quadratic_sin_minimizer();

/// Known ids: sign-abs, sign-abs-h1.5, sgd-pr-quadratic-sin,
/// shb-quadratic-sin, bilevel-sin, linear-coupled.
std::vector<std::string> catalog_ids();

/// Throws ConfigError for an unknown id.
ProblemSpec find_problem(const std::string& id);

}  // namespace ttsa
