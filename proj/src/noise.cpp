// SPDX-License-Identifier: Apache-2.0
#include "ttsa/noise.hpp"

#include "ttsa/problems.hpp"

#include <fmt/format.h>

#include <cmath>

namespace ttsa {

std::string to_string(NoiseKind kind) {
  return kind == NoiseKind::gaussian ? "gaussian" : "gaussian-biased";
}

NoiseKind noise_kind_from_string(const std::string& s) {
  if (s == "gaussian") return NoiseKind::gaussian;
  if (s == "gaussian-biased") return NoiseKind::gaussian_biased;
  throw ConfigError(fmt::format("noise.kind: unknown kind '{}'", s));
}

void validate_noise(const NoiseModel& m) {
  auto check = [](const char* key, double v) {
    if (!(v >= 0) || !std::isfinite(v)) throw ConfigError(fmt::format("noise.{} must be finite and >= 0", key));
  };
  check("sigma_xi", m.sigma_xi);
  check("sigma_psi", m.sigma_psi);
  check("bias_scale", m.bias_scale);
}

NoiseDraw sample_noise(const NoiseModel& m, RngStream& rng, const Vec& x, const Vec& y, std::uint64_t,
                       double beta_t) {
  NoiseDraw d;
  d.xi = gaussian(rng, x.dim(), m.sigma_xi);
  d.psi = gaussian(rng, y.dim(), m.sigma_psi);
  d.psi_bias = Vec(y.dim());
  if (m.kind == NoiseKind::gaussian_biased) {
    const double scale = m.bias_scale * std::sqrt(beta_t);
    for (std::size_t i = 0; i < y.dim(); ++i) {
      const double u = rng.uniform01();
      d.psi_bias[i] = -scale * sign(x[i % x.dim()]) * u;
    }
    d.psi += d.psi_bias;
  }
  return d;
}

}  // namespace ttsa
