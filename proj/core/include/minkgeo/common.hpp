// Copyright (c) 2026 the minkgeo authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace minkgeo {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;

/// A linear functional on R^dim, stored by its components; the pairing with
/// vectors is the standard one, pair(L, v) = sum_i L_i v_i.
using Covector = Eigen::VectorXd;

inline double pair(const Covector& L, const Vec& v) { return L.dot(v); }

/// Invalid construction parameters (non-positive-definite forms, bad tables,
/// malformed configs). Raised at construction time, never during evaluation.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Evaluation outside an operation's domain (zero vectors, points outside a
/// chart or tube).
class DomainError : public std::runtime_error {
 public:
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

/// A solver failed to converge; the message carries the residual.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// ---------------------------------------------------------------------------
// Deterministic randomness. All randomized searches derive their streams from
// a single u64 seed so that runs are reproducible bit for bit.

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Child stream `index` of `seed`; independent streams for parallel tasks.
inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t index = 0) {
  std::uint64_t s = seed ^ (0xa0761d6478bd642fULL * (index + 1));
  std::uint64_t a = splitmix64(s);
  std::uint64_t b = splitmix64(s);
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

/// Uniform point on the Euclidean unit sphere of R^dim.
inline Vec random_direction(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec v(dim);
  do {
    for (int i = 0; i < dim; ++i) v[i] = gauss(rng);
  } while (v.norm() < 1e-12);
  return v / v.norm();
}

}  // namespace minkgeo
