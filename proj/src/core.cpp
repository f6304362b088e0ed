// SPDX-License-Identifier: Apache-2.0
#include "ttsa/core.hpp"

#include <fmt/format.h>

#include <exception>

namespace ttsa {

std::vector<std::string> check_constants(const ProblemConstants& c) {
  std::vector<std::string> out;
  auto finite = [&](const char* name, double v) {
    if (!std::isfinite(v)) out.push_back(fmt::format("{} is not finite", name));
  };
  finite("mu_F", c.mu_F);
  finite("mu_G", c.mu_G);
  finite("L_F", c.L_F);
  finite("L_H", c.L_H);
  finite("L_Gx", c.L_Gx);
  finite("L_Gy", c.L_Gy);
  finite("delta_F", c.delta_F);
  finite("delta_G", c.delta_G);
  finite("delta_H", c.delta_H);
  finite("S_H", c.S_H);
  finite("S_BF", c.S_BF);
  finite("S_BG", c.S_BG);
  if (!out.empty()) return out;

  if (!(c.mu_F > 0)) out.push_back("mu_F must be > 0");
  if (!(c.mu_G > 0)) out.push_back("mu_G must be > 0");
  if (c.L_F < c.mu_F) out.push_back("L_F must be >= mu_F");
  if (c.L_Gy < c.mu_G) out.push_back("L_Gy must be >= mu_G");
  if (c.L_H < 0) out.push_back("L_H must be >= 0");
  if (c.L_Gx < 0) out.push_back("L_Gx must be >= 0");
  if (!(c.delta_F > 0 && c.delta_F <= 1)) out.push_back("delta_F must be in (0, 1]");
  if (!(c.delta_G > 0 && c.delta_G <= 1)) out.push_back("delta_G must be in (0, 1]");
  if (!(c.delta_H >= 0 && c.delta_H <= 1)) out.push_back("delta_H must be in [0, 1]");
  if (c.S_H < 0) out.push_back("S_H must be >= 0");
  if (c.S_BF < 0) out.push_back("S_BF must be >= 0");
  if (c.S_BG < 0) out.push_back("S_BG must be >= 0");
  return out;
}

namespace {

// Evaluates `fn`, converting exceptions, wrong dimensions and non-finite
// entries into a violation message.
template <typename Fn>
std::optional<Vec> checked_eval(const char* what, std::size_t expected_dim, Fn&& fn,
                                std::vector<std::string>& violations) {
  Vec out;
  try {
    out = fn();
  } catch (const std::exception& e) {
    violations.push_back(fmt::format("{} raised: {}", what, e.what()));
    return std::nullopt;
  }
  if (out.dim() != expected_dim) {
    violations.push_back(fmt::format("{} returned dim {}, expected {}", what, out.dim(), expected_dim));
    return std::nullopt;
  }
  if (!out.all_finite()) {
    violations.push_back(fmt::format("{} returned a non-finite value", what));
    return std::nullopt;
  }
  return out;
}

}  // namespace

std::vector<std::string> validate_problem(const ProblemSpec& p) {
  std::vector<std::string> v;
  if (p.d_x == 0 || p.d_y == 0) {
    v.push_back("d_x and d_y must be positive");
    return v;
  }
  if (!p.F || !p.G) {
    v.push_back("F and G evaluators are required");
    return v;
  }
  for (auto& msg : check_constants(p.constants)) v.push_back("constants: " + msg);

  if (p.x0.dim() != p.d_x) v.push_back(fmt::format("x0 has dim {}, expected {}", p.x0.dim(), p.d_x));
  if (p.y0.dim() != p.d_y) v.push_back(fmt::format("y0 has dim {}, expected {}", p.y0.dim(), p.d_y));
  if (p.x0.dim() == p.d_x && p.y0.dim() == p.d_y) {
    checked_eval("F(x0, y0)", p.d_x, [&] { return p.F(p.x0, p.y0); }, v);
    checked_eval("G(x0, y0)", p.d_y, [&] { return p.G(p.x0, p.y0); }, v);
    if (p.H) checked_eval("H(y0)", p.d_x, [&] { return p.H(p.y0); }, v);
  }

  if (!p.root) return v;
  const Vec& xs = p.root->x_star;
  const Vec& ys = p.root->y_star;
  if (xs.dim() != p.d_x || ys.dim() != p.d_y) {
    v.push_back("root dimensions do not match (d_x, d_y)");
    return v;
  }
  if (auto g = checked_eval("G(x*, y*)", p.d_y, [&] { return p.G(xs, ys); }, v)) {
    if (g->norm() > kRootTolerance) v.push_back(fmt::format("||G(x*, y*)|| = {:.3e} > 1e-9", g->norm()));
  }
  if (!p.H) return v;
  if (auto h = checked_eval("H(y*)", p.d_x, [&] { return p.H(ys); }, v)) {
    if (auto f = checked_eval("F(H(y*), y*)", p.d_x, [&] { return p.F(*h, ys); }, v)) {
      if (f->norm() > kRootTolerance) {
        v.push_back(fmt::format("||F(H(y*), y*)|| = {:.3e} > 1e-9", f->norm()));
      }
    }
    double gap = (xs - *h).norm();
    if (gap > kRootTolerance) v.push_back(fmt::format("||x* - H(y*)|| = {:.3e} > 1e-9", gap));
  }
  return v;
}

void require_valid(const ProblemSpec& p) {
  auto v = validate_problem(p);
  if (v.empty()) return;
  std::string msg = fmt::format("problem '{}' failed registration:", p.id);
  for (auto& s : v) msg += "\n  " + s;
  throw ConfigError(msg);
}

}  // namespace ttsa
