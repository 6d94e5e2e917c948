// Copyright 2026 The soundtriage Authors
// SPDX-License-Identifier: Apache-2.0

#include "soundtriage/training.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "soundtriage/inference.h"
#include "soundtriage/metrics.h"
#include "soundtriage/optim.h"

namespace soundtriage {
namespace {

struct PreparedClip {
  Matrix features;  // normalized
  EventRoll target;  // pooled to the model output rate
};

}  // namespace

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (!(dirichlet_alpha > 0.0)) throw ConfigError("Dirichlet alpha must be > 0");
}

std::vector<LabeledClip> prepare_clips(const Dataset& dataset, const FeatureConfig& features) {
  features.validate();
  if (dataset.sample_rate != 0 && dataset.sample_rate != features.sample_rate) {
    throw ConfigError("dataset sample rate " + std::to_string(dataset.sample_rate) +
                      " Hz differs from the feature sample rate " +
                      std::to_string(features.sample_rate) + " Hz (no resampling)");
  }
  std::vector<LabeledClip> out;
  out.reserve(dataset.clips.size());
  for (const auto& clip : dataset.clips) {
    clip.annotation.validate(dataset.n_classes());
    LabeledClip lc;
    lc.clip_id = clip.annotation.clip_id;
    lc.features = extract_logmel(clip.waveform, features);
    lc.reference =
        rasterize(clip.annotation, lc.features.frames(), features.hop, dataset.n_classes());
    lc.annotation = clip.annotation;
    out.push_back(std::move(lc));
  }
  return out;
}

std::string format_epoch_line(const EpochRecord& record) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%d\t%.9f\t%.9f", record.epoch, record.train_loss,
                record.val_frame_f);
  return buf;
}

double validation_frame_f(const SetModel& model, const std::vector<LabeledClip>& clips) {
  const TriageWeights uniform = TriageWeights::uniform(model.classes());
  const auto thresholds = std::vector<double>(static_cast<std::size_t>(model.classes()), 0.5);
  std::vector<EventRoll> pred, ref;
  for (const auto& clip : clips) {
    pred.push_back(binarize(predict(model, clip.features, uniform), thresholds,
                            clip.features.frame_hop));
    ref.push_back(clip.reference);
  }
  return frame_f1(pred, ref).macro;
}

TrainResult train(const std::vector<LabeledClip>& train_set,
                  const std::vector<LabeledClip>& val_set, const TrainConfig& config,
                  const ModelConfig& model_config, const FeatureConfig& feature_config,
                  const std::vector<std::string>& class_names, const TrainHooks& hooks) {
  config.validate();
  if (train_set.empty() || val_set.empty()) {
    throw ConfigError("training and validation sets must be non-empty");
  }
  const int n_classes = model_config.backbone.n_classes;
  if (static_cast<int>(class_names.size()) != n_classes) {
    throw ConfigError("class map has " + std::to_string(class_names.size()) +
                      " names, model expects " + std::to_string(n_classes));
  }
  for (const auto* set : {&train_set, &val_set}) {
    for (const auto& clip : *set) {
      if (clip.reference.classes() != n_classes) {
        throw ConfigError("clip " + clip.clip_id + " has " +
                          std::to_string(clip.reference.classes()) + " classes, expected " +
                          std::to_string(n_classes));
      }
    }
  }

  Rng rng(config.seed);
  SetModel model(model_config);
  model.initialize(rng);
  model.identity_film = config.identity_film;
  {
    std::vector<FeatureGrid> grids;
    for (const auto& clip : train_set) grids.push_back(clip.features);
    model.normalizer = FeatureNormalizer::fit(grids);
  }

  const int reduction = model_config.backbone.time_reduction();
  std::vector<PreparedClip> prepared;
  for (const auto& clip : train_set) {
    prepared.push_back({model.normalizer.apply(clip.features.values),
                        pool_labels(clip.reference, reduction)});
  }

  const AdamConfig adam_config{config.learning_rate};
  Adam backbone_opt(model.backbone.parameters().size(), adam_config);
  Adam conditioner_opt(model.conditioner.parameters().size(), adam_config);
  ParamBuffer backbone_grad(model.backbone.parameters().size());
  ParamBuffer conditioner_grad(model.conditioner.parameters().size());

  const DirichletConfig dirichlet = DirichletConfig::symmetric(n_classes, config.dirichlet_alpha);
  const int channels = model_config.backbone.film_channels();

  std::vector<std::size_t> order(prepared.size());
  std::iota(order.begin(), order.end(), 0);

  TrainResult result{Checkpoint{model, config, feature_config, class_names, 0, -1.0}, {}};
  Backbone::Trace trace;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    int batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch_index) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      const double batch_scale = 1.0 / static_cast<double>(stop - start);

      const TriageWeights lambda =
          hooks.sampler ? hooks.sampler(dirichlet, rng) : sample_triage(dirichlet, rng);
      if (lambda.classes() != n_classes) throw ConfigError("sampler returned wrong class count");
      const Vector scaled = scale_for_conditioning(lambda);
      Conditioner::Trace ctrace;
      const FilmParams film = config.identity_film
                                  ? FilmParams::identity(channels)
                                  : model.conditioner.condition(scaled, &ctrace);
      if (hooks.on_batch) hooks.on_batch({epoch, batch_index, scaled, lambda});

      std::fill(backbone_grad.begin(), backbone_grad.end(), 0.0);
      std::fill(conditioner_grad.begin(), conditioner_grad.end(), 0.0);
      FilmParams film_grad = FilmParams::zeros(channels);
      FilmParams clip_film_grad;

      for (std::size_t i = start; i < stop; ++i) {
        const PreparedClip& clip = prepared[order[i]];
        const Matrix logits = model.backbone.forward_logits(clip.features, &film, &trace);
        const LossValue loss = compute_loss(config.loss_kind, logits, clip.target, lambda);
        if (!std::isfinite(loss.total)) {
          throw DivergenceError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                                std::to_string(batch_index));
        }
        epoch_loss += loss.total;
        const Matrix dlogits =
            loss_gradient(config.loss_kind, logits, clip.target, lambda) * batch_scale;
        model.backbone.backward(trace, dlogits, backbone_grad, &clip_film_grad);
        film_grad.mu += clip_film_grad.mu;
        film_grad.sigma += clip_film_grad.sigma;
      }
      if (!config.identity_film) model.conditioner.backward(ctrace, film_grad, conditioner_grad);

      backbone_opt.step(model.backbone.parameters(), backbone_grad);
      if (!config.identity_film) {
        conditioner_opt.step(model.conditioner.parameters(), conditioner_grad);
      }
    }

    EpochRecord record{epoch, epoch_loss / static_cast<double>(prepared.size()),
                       validation_frame_f(model, val_set)};
    result.history.push_back(record);
    if (hooks.on_epoch) hooks.on_epoch(record);
    if (record.val_frame_f >= result.best.validation_score) {
      result.best.model = model;
      result.best.epoch = epoch;
      result.best.validation_score = record.val_frame_f;
    }
  }
  return result;
}

}  // namespace soundtriage
