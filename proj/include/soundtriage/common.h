// Copyright 2026 The soundtriage Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SOUNDTRIAGE_COMMON_H_
#define SOUNDTRIAGE_COMMON_H_

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace soundtriage {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using BinaryMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

// All randomness flows through explicitly passed engines of this type.
using Rng = std::mt19937_64;

/// Invalid user-facing configuration (counts, durations, flags, weights).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Operand dimensions that do not agree.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Unreadable, truncated or incompatible files.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require_shape(bool ok, const std::string& what) {
  if (!ok) throw ShapeError(what);
}

}  // namespace soundtriage

#endif  // SOUNDTRIAGE_COMMON_H_
