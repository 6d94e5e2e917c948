// Copyright 2026 The soundtriage Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SOUNDTRIAGE_SERIALIZATION_H_
#define SOUNDTRIAGE_SERIALIZATION_H_

#include "json.hpp"
#include "soundtriage/backbone.h"
#include "soundtriage/dataio.h"
#include "soundtriage/model.h"
#include "soundtriage/training.h"

namespace soundtriage {

nlohmann::json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const FeatureConfig& c);
FeatureConfig feature_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ModelConfig& c);
ModelConfig model_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SynthConfig& c);
SynthConfig synth_config_from_json(const nlohmann::json& j);

}  // namespace soundtriage

#endif  // SOUNDTRIAGE_SERIALIZATION_H_
