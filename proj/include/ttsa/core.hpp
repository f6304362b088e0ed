// SPDX-License-Identifier: Apache-2.0
//
// Foundational types shared by every module: dense vectors, the problem
// contract (F, G, optional H and root) and its registration checks.
#pragma once

#include <boost/container/small_vector.hpp>

#include <cmath>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ttsa {

/// Raised when a run configuration or manifest refers to something that does
/// not exist or is malformed. Always thrown before any iteration starts.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense real vector. Dimensions in this project are tiny, so storage is
/// inline for dim <= 4 and the hot loop never touches the heap.
class Vec {
 public:
  using Storage = boost::container::small_vector<double, 4>;

  Vec() = default;
  explicit Vec(std::size_t dim, double fill = 0.0) : data_(dim, fill) {}
  Vec(std::initializer_list<double> values) : data_(values.begin(), values.end()) {}
  explicit Vec(std::span<const double> values) : data_(values.begin(), values.end()) {}

  std::size_t dim() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator[](std::size_t i) noexcept { return data_[i]; }
  double operator[](std::size_t i) const noexcept { return data_[i]; }

  auto begin() noexcept { return data_.begin(); }
  auto end() noexcept { return data_.end(); }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  std::span<const double> values() const noexcept { return {data_.data(), data_.size()}; }

  bool all_finite() const noexcept {
    for (double v : data_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  double norm_sq() const noexcept {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return s;
  }
  double norm() const noexcept { return std::sqrt(norm_sq()); }

  Vec& operator+=(const Vec& other) noexcept {
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
  }
  Vec& operator-=(const Vec& other) noexcept {
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
  }
  Vec& operator*=(double s) noexcept {
    for (double& v : data_) v *= s;
    return *this;
  }

  friend Vec operator+(Vec lhs, const Vec& rhs) noexcept { return lhs += rhs; }
  friend Vec operator-(Vec lhs, const Vec& rhs) noexcept { return lhs -= rhs; }
  friend Vec operator*(double s, Vec v) noexcept { return v *= s; }

  friend bool operator==(const Vec& lhs, const Vec& rhs) noexcept { return lhs.data_ == rhs.data_; }

 private:
  Storage data_;
};

/// Problem-dependent constants: monotonicity, Lipschitz and local-linearity
/// parameters of F, G and H.
struct ProblemConstants {
  double mu_F = 1.0;
  double mu_G = 1.0;
  double L_F = 1.0;
  double L_H = 1.0;
  double L_Gx = 1.0;
  double L_Gy = 1.0;
  double delta_F = 1.0;
  double delta_G = 1.0;
  double delta_H = 1.0;
  double S_H = 0.0;
  double S_BF = 0.0;
  double S_BG = 0.0;

  friend bool operator==(const ProblemConstants&, const ProblemConstants&) = default;
};

/// Returns one description per violated range constraint; empty when valid.
std::vector<std::string> check_constants(const ProblemConstants& c);

using PairMap = std::function<Vec(const Vec& x, const Vec& y)>;
using InnerMap = std::function<Vec(const Vec& y)>;

struct RootPair {
  Vec x_star;
  Vec y_star;
};

/// A coupled root-finding problem F(x, y) = 0, G(x, y) = 0. Evaluators must be
/// pure and reentrant; replications call them concurrently.
struct ProblemSpec {
  std::string id;
  std::size_t d_x = 1;
  std::size_t d_y = 1;
  PairMap F;
  PairMap G;
  InnerMap H;                     // optional: empty when unknown
  std::optional<RootPair> root;   // optional
  ProblemConstants constants;
  Vec x0;
  Vec y0;
  // False when F, G violate local linearity; rate predictions do not apply.
  bool locally_linear = true;
};

inline constexpr double kRootTolerance = 1e-9;

/// Checks output dimensions and, when H and the root are present, the root
/// identities at kRootTolerance. Evaluator exceptions and non-finite outputs
/// become violations. Never mutates `p`.
std::vector<std::string> validate_problem(const ProblemSpec& p);

/// Throws ConfigError listing every violation when validate_problem is not
/// clean.
void require_valid(const ProblemSpec& p);

}  // namespace ttsa
