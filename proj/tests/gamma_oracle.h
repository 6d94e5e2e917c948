// Copyright 2026 The soundtriage Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SOUNDTRIAGE_TESTS_GAMMA_ORACLE_H_
#define SOUNDTRIAGE_TESTS_GAMMA_ORACLE_H_

#include <cmath>
#include <random>
#include <vector>

namespace oracle {

// Marsaglia and Tsang gamma variate with unit scale. Shapes below one use
// the boost Gamma(a + 1) * U^(1/a).
class GammaSampler {
 public:
  explicit GammaSampler(unsigned seed) : rng_(seed) {}

  double draw(double shape) {
    if (shape < 1.0) return draw(shape + 1.0) * std::pow(uniform(), 1.0 / shape);
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal_(rng_);
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  // Fraction of symmetric Dirichlet draws whose largest component exceeds
  // `level`, estimated from gamma ratios.
  double max_exceeds(int k, double alpha, double level, int draws) {
    int hits = 0;
    std::vector<double> g(static_cast<std::size_t>(k));
    for (int i = 0; i < draws; ++i) {
      double sum = 0.0, best = 0.0;
      for (auto& x : g) {
        x = draw(alpha);
        sum += x;
        best = std::max(best, x);
      }
      if (sum > 0.0 && best / sum > level) ++hits;
    }
    return static_cast<double>(hits) / draws;
  }

 private:
  double uniform() {
    double u;
    do u = uniform_(rng_);
    while (u <= 0.0);
    return u;
  }

  std::mt19937 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace oracle

#endif  // SOUNDTRIAGE_TESTS_GAMMA_ORACLE_H_
