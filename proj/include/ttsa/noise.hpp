// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ttsa/core.hpp"
#include "ttsa/rng.hpp"

#include <cstdint>
#include <string>

namespace ttsa {

enum class NoiseKind { gaussian, gaussian_biased };

std::string to_string(NoiseKind kind);
NoiseKind noise_kind_from_string(const std::string& s);  // throws ConfigError

/// xi ~ N(0, sigma_xi^2 I) drives the fast iterate, psi ~ N(0, sigma_psi^2 I)
/// the slow one. The biased kind adds psi_2 = -bias_scale sign(x_t) sqrt(beta_t) u
/// with u ~ U[0, 1] per component, so ||psi_2||^2 <= bias_scale^2 d_y beta_t.
struct NoiseModel {
  NoiseKind kind = NoiseKind::gaussian;
  double sigma_xi = 1.0;
  double sigma_psi = 1.0;
  double bias_scale = 0.0;

  /// Declared bound on E||xi||^2.
  double second_moment_xi(std::size_t d_x) const noexcept { return static_cast<double>(d_x) * sigma_xi * sigma_xi; }
  /// Declared bound on E||psi_1||^2 (martingale part of psi).
  double second_moment_psi(std::size_t d_y) const noexcept {
    return static_cast<double>(d_y) * sigma_psi * sigma_psi;
  }
  /// Cross-covariance bound of (xi, psi): zero, the streams are independent.
  static constexpr double cross_covariance_bound() noexcept { return 0.0; }

  friend bool operator==(const NoiseModel&, const NoiseModel&) = default;
};

/// Throws ConfigError on negative or non-finite parameters.
void validate_noise(const NoiseModel& m);

struct NoiseDraw {
  Vec xi;
  Vec psi;
  Vec psi_bias;  // psi_2 component; zeros for the unbiased kind
};

/// Draws xi (d_x normals), then psi_1 (d_y normals), then for the biased kind
/// d_y uniforms. `x` supplies sign(x_t) componentwise; with d_x != d_y the
/// sign of x_t[i mod d_x] is used.
NoiseDraw sample_noise(const NoiseModel& m, RngStream& rng, const Vec& x, const Vec& y, std::uint64_t t,
                       double beta_t);

}  // namespace ttsa
