// Copyright 2026 The soundtriage Authors
// SPDX-License-Identifier: Apache-2.0

#include "soundtriage/conditioning.h"

#include <cmath>
#include <string>

namespace soundtriage {

FilmParams FilmParams::identity(int channels) {
  return {Vector::Zero(channels), Vector::Ones(channels)};
}

FilmParams FilmParams::zeros(int channels) {
  return {Vector::Zero(channels), Vector::Zero(channels)};
}

void apply_film_inplace(Matrix& feature_map, const FilmParams& film) {
  require_shape(film.mu.size() == film.sigma.size(), "FiLM mu and sigma lengths differ");
  require_shape(feature_map.rows() == film.mu.size(),
                "FiLM has " + std::to_string(film.mu.size()) + " channels, feature map has " +
                    std::to_string(feature_map.rows()));
  for (Eigen::Index k = 0; k < feature_map.cols(); ++k) {
    for (Eigen::Index c = 0; c < feature_map.rows(); ++c) {
      feature_map(c, k) = feature_map(c, k) * film.sigma[c] + film.mu[c];
    }
  }
}

Matrix apply_film(const Matrix& feature_map, const FilmParams& film) {
  Matrix out = feature_map;
  apply_film_inplace(out, film);
  return out;
}

Mlp::Mlp(int input_dim, const std::vector<int>& hidden_dims, int output_dim, double leaky_slope,
         ParamLayout& layout)
    : input_dim_(input_dim), slope_(leaky_slope) {
  int fan_in = input_dim;
  for (int width : hidden_dims) {
    weights_.push_back(layout.add(width, fan_in));
    biases_.push_back(layout.add(width, 1));
    fan_in = width;
  }
  weights_.push_back(layout.add(output_dim, fan_in));
  biases_.push_back(layout.add(output_dim, 1));
}

Vector Mlp::forward(std::span<const double> params, const Vector& x, Trace* trace) const {
  require_shape(x.size() == input_dim_, "conditioner input has length " +
                                            std::to_string(x.size()) + ", expected " +
                                            std::to_string(input_dim_));
  if (trace) {
    trace->inputs.clear();
    trace->pre.clear();
  }
  Vector h = x;
  const std::size_t last = weights_.size() - 1;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    if (trace) trace->inputs.push_back(h);
    Vector pre = view(params, weights_[l]) * h + view(params, biases_[l]);
    if (l == last) return pre;
    if (trace) trace->pre.push_back(pre);
    h = pre.unaryExpr([this](double v) { return leaky(v, slope_); });
  }
  return h;
}

Vector Mlp::backward(std::span<const double> params, const Trace& trace, const Vector& dout,
                     std::span<double> grad) const {
  Vector delta = dout;
  for (std::size_t l = weights_.size(); l-- > 0;) {
    view(grad, weights_[l]).noalias() += delta * trace.inputs[l].transpose();
    view(grad, biases_[l]) += delta;
    Vector dinput = view(params, weights_[l]).transpose() * delta;
    if (l == 0) return dinput;
    const Vector& pre = trace.pre[l - 1];
    for (Eigen::Index i = 0; i < dinput.size(); ++i) dinput[i] *= leaky_grad(pre[i], slope_);
    delta = std::move(dinput);
  }
  return delta;
}

void Mlp::initialize(std::span<double> params, Rng& rng, double output_bias) const {
  const std::size_t last = weights_.size() - 1;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    auto w = view(params, weights_[l]);
    const double fan_in = static_cast<double>(w.cols());
    // He-uniform for rectified layers; a damped bound for the linear output.
    const double bound = l == last ? 0.1 * std::sqrt(3.0 / fan_in) : std::sqrt(6.0 / fan_in);
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = dist(rng);
    }
    view(params, biases_[l]).setConstant(l == last ? output_bias : 0.0);
  }
}

void ConditionerConfig::validate() const {
  if (input_dim < 1) throw ConfigError("conditioner input_dim must be >= 1");
  if (output_dim < 1) throw ConfigError("conditioner output_dim must be >= 1");
  for (int w : hidden_dims) {
    if (w < 1) throw ConfigError("conditioner hidden widths must be >= 1");
  }
}

Conditioner::Conditioner(ConditionerConfig config)
    : config_((config.validate(), std::move(config))),
      layout_(),
      mu_net_(config_.input_dim, config_.hidden_dims, config_.output_dim, config_.leaky_slope,
              layout_),
      sigma_net_(config_.input_dim, config_.hidden_dims, config_.output_dim, config_.leaky_slope,
                 layout_),
      params_(layout_.size(), 0.0) {}

void Conditioner::initialize(Rng& rng) {
  mu_net_.initialize(params_, rng, 0.0);
  sigma_net_.initialize(params_, rng, 1.0);
}

FilmParams Conditioner::condition(const Vector& scaled_lambda, Trace* trace) const {
  FilmParams film;
  film.mu = mu_net_.forward(params_, scaled_lambda, trace ? &trace->mu : nullptr);
  film.sigma = sigma_net_.forward(params_, scaled_lambda, trace ? &trace->sigma : nullptr);
  return film;
}

Vector Conditioner::backward(const Trace& trace, const FilmParams& film_grad,
                             std::span<double> grad) const {
  require_shape(grad.size() == params_.size(), "conditioner gradient buffer has wrong size");
  Vector dx = mu_net_.backward(params_, trace.mu, film_grad.mu, grad);
  dx += sigma_net_.backward(params_, trace.sigma, film_grad.sigma, grad);
  return dx;
}

}  // namespace soundtriage
