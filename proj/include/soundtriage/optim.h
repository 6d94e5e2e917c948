// Copyright 2026 The soundtriage Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SOUNDTRIAGE_OPTIM_H_
#define SOUNDTRIAGE_OPTIM_H_

#include <cmath>
#include <span>
#include <vector>

namespace soundtriage {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Adam {
 public:
  Adam(std::size_t size, AdamConfig config) : config_(config), m_(size, 0.0), v_(size, 0.0) {}

  void step(std::span<double> params, std::span<const double> grads) {
    ++t_;
    const double c1 = 1.0 - std::pow(config_.beta1, t_);
    const double c2 = 1.0 - std::pow(config_.beta2, t_);
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * grads[i];
      v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * grads[i] * grads[i];
      params[i] -= config_.learning_rate * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + config_.epsilon);
    }
  }

 private:
  AdamConfig config_;
  std::vector<double> m_;
  std::vector<double> v_;
  int t_ = 0;
};

}  // namespace soundtriage

#endif  // SOUNDTRIAGE_OPTIM_H_
