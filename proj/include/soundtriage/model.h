// Copyright 2026 The soundtriage Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SOUNDTRIAGE_MODEL_H_
#define SOUNDTRIAGE_MODEL_H_

#include <span>
#include <vector>

#include "soundtriage/backbone.h"
#include "soundtriage/conditioning.h"
#include "soundtriage/dataio.h"
#include "soundtriage/triage.h"

namespace soundtriage {

/// Per-band standardization fitted on the training features.
struct FeatureNormalizer {
  Vector mean;
  Vector stddev;

  static FeatureNormalizer identity(int bands);
  static FeatureNormalizer fit(std::span<const FeatureGrid> grids);
  Matrix apply(const Matrix& values) const;
};

struct ModelConfig {
  BackboneConfig backbone;
  std::vector<int> conditioner_hidden{64, 256, 128};

  /// Conditioner input is one weight per class, output one value per channel.
  ConditionerConfig conditioner() const;
};

/// Detector plus the triage-weight conditioner.
class SetModel {
 public:
  explicit SetModel(ModelConfig config);

  const ModelConfig& config() const { return config_; }
  int classes() const { return config_.backbone.n_classes; }

  void initialize(Rng& rng);

  /// Modulation for the given weights, or the identity when the model runs
  /// as an unconditioned baseline.
  FilmParams film_for(const TriageWeights& weights) const;

  /// Logits and probabilities at the model's output rate. Features are raw
  /// log-mel values; normalization is applied here.
  PosteriorGrid forward(const FeatureGrid& features, const TriageWeights& weights) const;

  Backbone backbone;
  Conditioner conditioner;
  FeatureNormalizer normalizer;
  bool identity_film = false;

 private:
  ModelConfig config_;
};

}  // namespace soundtriage

#endif  // SOUNDTRIAGE_MODEL_H_
