// Copyright 2026 The soundtriage Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SOUNDTRIAGE_TRAINING_H_
#define SOUNDTRIAGE_TRAINING_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "soundtriage/dataio.h"
#include "soundtriage/losses.h"
#include "soundtriage/model.h"
#include "soundtriage/triage.h"

namespace soundtriage {

struct TrainConfig {
  int batch_size = 64;
  int epochs = 100;
  double learning_rate = 1e-3;
  LossKind loss_kind = LossKind::kSetA;
  double dirichlet_alpha = 0.1;
  std::uint64_t seed = 0;
  // Baseline mode: modulation fixed to the identity, conditioner unused.
  bool identity_film = false;

  void validate() const;
};

/// A clip ready for training or evaluation: raw log-mel features, the
/// reference roll on the feature grid, and the annotation it came from.
struct LabeledClip {
  std::string clip_id;
  FeatureGrid features;
  EventRoll reference;
  ClipAnnotation annotation;
};

std::vector<LabeledClip> prepare_clips(const Dataset& dataset, const FeatureConfig& features);

struct Checkpoint {
  static constexpr std::uint32_t kFormatVersion = 1;

  SetModel model;
  TrainConfig train_config;
  FeatureConfig feature_config;
  std::vector<std::string> class_names;
  int epoch = 0;
  double validation_score = 0.0;
};

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
/// Throws FormatError on truncated, corrupt or version-mismatched files.
Checkpoint load_checkpoint(const std::filesystem::path& path);

class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_frame_f = 0.0;
};

/// "<epoch>\t<mean train loss>\t<validation frame F>" with fixed precision.
std::string format_epoch_line(const EpochRecord& record);

struct BatchEvent {
  int epoch = 0;
  int batch = 0;
  Vector conditioner_input;     // N * lambda as fed to the conditioner
  TriageWeights loss_weights;   // lambda used by the loss
};

struct TrainHooks {
  /// Replaces the Dirichlet draw; called exactly once per batch.
  std::function<TriageWeights(const DirichletConfig&, Rng&)> sampler;
  std::function<void(const BatchEvent&)> on_batch;
  std::function<void(const EpochRecord&)> on_epoch;
};

struct TrainResult {
  Checkpoint best;
  std::vector<EpochRecord> history;
};

/// Class-weighted training. Each batch draws one lambda, conditions the
/// backbone on N * lambda, and scores the batch with the configured loss at
/// the same lambda (per-clip sums averaged over the batch). After each
/// epoch the model is scored on `val_set` at uniform lambda (threshold 0.5,
/// macro frame F); the best epoch is returned, latest on ties.
TrainResult train(const std::vector<LabeledClip>& train_set,
                  const std::vector<LabeledClip>& val_set, const TrainConfig& config,
                  const ModelConfig& model_config, const FeatureConfig& feature_config,
                  const std::vector<std::string>& class_names, const TrainHooks& hooks = {});

/// Macro frame F at uniform lambda, threshold 0.5, no smoothing.
double validation_frame_f(const SetModel& model, const std::vector<LabeledClip>& clips);

}  // namespace soundtriage

#endif  // SOUNDTRIAGE_TRAINING_H_
