// Copyright 2026 The soundtriage Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SOUNDTRIAGE_TESTS_TOY_H_
#define SOUNDTRIAGE_TESTS_TOY_H_

#include <vector>

#include "soundtriage/training.h"

namespace toy {

inline soundtriage::FeatureConfig features(int n_mels = 16) {
  soundtriage::FeatureConfig f;
  f.sample_rate = 16000;
  f.n_mels = n_mels;
  return f;
}

inline soundtriage::ModelConfig model(int n_classes, int n_mels = 16, int channels = 4) {
  soundtriage::ModelConfig m;
  m.backbone.n_mels = n_mels;
  m.backbone.n_classes = n_classes;
  m.backbone.channels = {channels, channels, channels};
  m.backbone.gru_units = 8;
  m.backbone.fc_units = 8;
  m.conditioner_hidden = {8, 16, 8};
  return m;
}

inline std::vector<soundtriage::LabeledClip> clips(int n, int n_classes, std::uint64_t seed,
                                                    double duration = 3.0, int n_mels = 16) {
  soundtriage::SynthConfig s;
  s.n_clips = n;
  s.n_classes = n_classes;
  s.duration = duration;
  s.seed = seed;
  s.sample_rate = 16000;
  soundtriage::Dataset d{soundtriage::default_class_names(n_classes),
                         soundtriage::synthesize_dataset(s), 16000};
  return soundtriage::prepare_clips(d, features(n_mels));
}

}  // namespace toy

#endif  // SOUNDTRIAGE_TESTS_TOY_H_
