// Copyright 2026 The soundtriage Authors
// SPDX-License-Identifier: Apache-2.0

#include "soundtriage/model.h"

#include <cmath>

namespace soundtriage {

FeatureNormalizer FeatureNormalizer::identity(int bands) {
  return {Vector::Zero(bands), Vector::Ones(bands)};
}

FeatureNormalizer FeatureNormalizer::fit(std::span<const FeatureGrid> grids) {
  if (grids.empty()) throw ConfigError("cannot fit feature statistics on an empty set");
  const Eigen::Index bands = grids.front().values.cols();
  Vector sum = Vector::Zero(bands);
  Vector sq = Vector::Zero(bands);
  double count = 0.0;
  for (const auto& g : grids) {
    require_shape(g.values.cols() == bands, "feature grids disagree on the number of mel bands");
    sum += g.values.colwise().sum().transpose();
    sq += g.values.array().square().colwise().sum().matrix().transpose();
    count += static_cast<double>(g.values.rows());
  }
  FeatureNormalizer n;
  n.mean = sum / count;
  n.stddev = (sq / count - n.mean.cwiseProduct(n.mean)).cwiseMax(0.0).cwiseSqrt();
  for (Eigen::Index i = 0; i < bands; ++i) {
    if (!(n.stddev[i] > 1e-8)) n.stddev[i] = 1.0;
  }
  return n;
}

Matrix FeatureNormalizer::apply(const Matrix& values) const {
  require_shape(values.cols() == mean.size(), "feature width does not match normalizer");
  Matrix out = values.rowwise() - mean.transpose();
  return out.array().rowwise() / stddev.transpose().array();
}

ConditionerConfig ModelConfig::conditioner() const {
  ConditionerConfig c;
  c.input_dim = backbone.n_classes;
  c.hidden_dims = conditioner_hidden;
  c.output_dim = backbone.film_channels();
  c.leaky_slope = backbone.leaky_slope;
  return c;
}

SetModel::SetModel(ModelConfig config)
    : backbone(config.backbone),
      conditioner(config.conditioner()),
      normalizer(FeatureNormalizer::identity(config.backbone.n_mels)),
      config_(std::move(config)) {}

void SetModel::initialize(Rng& rng) {
  backbone.initialize(rng);
  conditioner.initialize(rng);
}

FilmParams SetModel::film_for(const TriageWeights& weights) const {
  require_shape(weights.classes() == classes(),
                "triage weights have " + std::to_string(weights.classes()) +
                    " classes, model has " + std::to_string(classes()));
  if (identity_film) return FilmParams::identity(config_.backbone.film_channels());
  return conditioner.condition(scale_for_conditioning(weights));
}

PosteriorGrid SetModel::forward(const FeatureGrid& features, const TriageWeights& weights) const {
  const FilmParams film = film_for(weights);
  return PosteriorGrid::from_logits(backbone.forward_logits(normalizer.apply(features.values), &film),
                                    features.frame_hop * config_.backbone.time_reduction());
}

}  // namespace soundtriage
