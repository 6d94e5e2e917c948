// Copyright 2026 The soundtriage Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SOUNDTRIAGE_CONDITIONING_H_
#define SOUNDTRIAGE_CONDITIONING_H_

#include <span>
#include <vector>

#include "soundtriage/common.h"
#include "soundtriage/params.h"

namespace soundtriage {

/// Per-channel shift (mu) and scale (sigma) for feature-wise modulation.
struct FilmParams {
  Vector mu;
  Vector sigma;

  int channels() const { return static_cast<int>(mu.size()); }
  static FilmParams identity(int channels);
  static FilmParams zeros(int channels);
};

/// out(c, k) = in(c, k) * sigma[c] + mu[c] for a feature map stored as
/// channels x (I*J).
Matrix apply_film(const Matrix& feature_map, const FilmParams& film);
void apply_film_inplace(Matrix& feature_map, const FilmParams& film);

/// Fully connected stack with leaky-rectifier hidden layers and a linear
/// output layer. Parameters live in a caller-owned flat buffer.
class Mlp {
 public:
  Mlp(int input_dim, const std::vector<int>& hidden_dims, int output_dim, double leaky_slope,
      ParamLayout& layout);

  struct Trace {
    std::vector<Vector> inputs;  // input of each layer
    std::vector<Vector> pre;     // pre-activation of each hidden layer
  };

  Vector forward(std::span<const double> params, const Vector& x, Trace* trace) const;
  /// Accumulates parameter gradients into `grad`; returns d loss / d input.
  Vector backward(std::span<const double> params, const Trace& trace, const Vector& dout,
                  std::span<double> grad) const;
  void initialize(std::span<double> params, Rng& rng, double output_bias) const;

  int input_dim() const { return input_dim_; }

 private:
  int input_dim_;
  double slope_;
  std::vector<ParamBlock> weights_;
  std::vector<ParamBlock> biases_;
};

struct ConditionerConfig {
  int input_dim = 10;
  std::vector<int> hidden_dims{64, 256, 128};
  int output_dim = 64;
  double leaky_slope = 0.01;

  void validate() const;
};

/// Two independent perceptrons mapping scaled triage weights to FiLM mu and
/// sigma.
class Conditioner {
 public:
  explicit Conditioner(ConditionerConfig config);

  const ConditionerConfig& config() const { return config_; }

  /// Random hidden weights; the sigma network's output bias starts at 1 and
  /// the mu network's at 0, so the initial modulation is close to identity.
  void initialize(Rng& rng);

  ParamBuffer& parameters() { return params_; }
  const ParamBuffer& parameters() const { return params_; }

  struct Trace {
    Mlp::Trace mu;
    Mlp::Trace sigma;
  };

  FilmParams condition(const Vector& scaled_lambda, Trace* trace = nullptr) const;

  /// Accumulates into `grad` (same layout as parameters()); returns the
  /// gradient with respect to the conditioner input.
  Vector backward(const Trace& trace, const FilmParams& film_grad, std::span<double> grad) const;

 private:
  ConditionerConfig config_;
  ParamLayout layout_;
  Mlp mu_net_;
  Mlp sigma_net_;
  ParamBuffer params_;
};

}  // namespace soundtriage

#endif  // SOUNDTRIAGE_CONDITIONING_H_
