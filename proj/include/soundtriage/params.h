// Copyright 2026 The soundtriage Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SOUNDTRIAGE_PARAMS_H_
#define SOUNDTRIAGE_PARAMS_H_

#include <cstddef>
#include <span>
#include <vector>

#include "soundtriage/common.h"

namespace soundtriage {

/// Flat parameter storage. The aligned allocator keeps the buffer's address
/// modulo the SIMD width fixed, so vectorized reductions over views sum in
/// the same order on every run.
using ParamBuffer = std::vector<double, Eigen::aligned_allocator<double>>;

/// A column-major matrix stored at a fixed offset of a flat parameter buffer.
struct ParamBlock {
  std::size_t offset = 0;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;

  std::size_t size() const { return static_cast<std::size_t>(rows * cols); }
};

class ParamLayout {
 public:
  ParamBlock add(Eigen::Index rows, Eigen::Index cols) {
    ParamBlock b{size_, rows, cols};
    size_ += b.size();
    return b;
  }
  std::size_t size() const { return size_; }

 private:
  std::size_t size_ = 0;
};

inline Eigen::Map<Matrix> view(std::span<double> buffer, const ParamBlock& b) {
  return {buffer.data() + b.offset, b.rows, b.cols};
}

inline Eigen::Map<const Matrix> view(std::span<const double> buffer, const ParamBlock& b) {
  return {buffer.data() + b.offset, b.rows, b.cols};
}

inline Eigen::Map<Matrix> view(ParamBuffer& buffer, const ParamBlock& b) {
  return view(std::span<double>(buffer), b);
}

inline Eigen::Map<const Matrix> view(const ParamBuffer& buffer, const ParamBlock& b) {
  return view(std::span<const double>(buffer), b);
}

inline double leaky(double x, double slope) { return x > 0.0 ? x : slope * x; }
inline double leaky_grad(double pre, double slope) { return pre > 0.0 ? 1.0 : slope; }

}  // namespace soundtriage

#endif  // SOUNDTRIAGE_PARAMS_H_
