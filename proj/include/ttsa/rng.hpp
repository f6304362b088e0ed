// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ttsa/core.hpp"

#include <array>
#include <cstdint>
#include <limits>
#include <random>

namespace ttsa {

/// Philox4x32-10 block function (Salmon et al., SC'11). Maps a 128-bit counter
/// under a 64-bit key to 128 pseudo-random bits.
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;
PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key) noexcept;

/// Counter-based random stream keyed by (seed, stream_id). The seed is the
/// Philox key, the stream id occupies the upper 64 counter bits and the lower
/// 64 bits count blocks, so distinct replications never share a counter.
///
/// Satisfies UniformRandomBitGenerator. Normal variates come from
/// std::normal_distribution (libstdc++: Marsaglia polar method), whose cached
/// second variate is part of the stream state.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }
  result_type operator()() noexcept;

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
  double standard_normal() { return normal_(*this); }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

 private:
  void refill() noexcept;

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// `dim` independent N(0, sigma^2) draws. Always consumes `dim` normals so the
/// stream position does not depend on sigma; sigma == 0 yields exact zeros.
Vec gaussian(RngStream& rng, std::size_t dim, double sigma);

}  // namespace ttsa
