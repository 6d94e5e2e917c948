// Copyright 2026 The soundtriage Authors
// SPDX-License-Identifier: Apache-2.0

#include "soundtriage/serialization.h"

#include <string>

namespace soundtriage {

using nlohmann::json;

json to_json(const TrainConfig& c) {
  return {{"batch_size", c.batch_size},
          {"epochs", c.epochs},
          {"learning_rate", c.learning_rate},
          {"loss", std::string(loss_kind_name(c.loss_kind))},
          {"dirichlet_alpha", c.dirichlet_alpha},
          {"seed", c.seed},
          {"identity_film", c.identity_film}};
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig c;
  c.batch_size = j.at("batch_size").get<int>();
  c.epochs = j.at("epochs").get<int>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.loss_kind = parse_loss_kind(j.at("loss").get<std::string>());
  c.dirichlet_alpha = j.at("dirichlet_alpha").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.identity_film = j.at("identity_film").get<bool>();
  return c;
}

json to_json(const FeatureConfig& c) {
  return {{"sample_rate", c.sample_rate}, {"window", c.window}, {"hop", c.hop},
          {"n_mels", c.n_mels},           {"log_floor", c.log_floor}, {"fmin", c.fmin},
          {"fmax", c.fmax}};
}

FeatureConfig feature_config_from_json(const json& j) {
  FeatureConfig c;
  c.sample_rate = j.at("sample_rate").get<int>();
  c.window = j.at("window").get<double>();
  c.hop = j.at("hop").get<double>();
  c.n_mels = j.at("n_mels").get<int>();
  c.log_floor = j.at("log_floor").get<double>();
  c.fmin = j.at("fmin").get<double>();
  c.fmax = j.at("fmax").get<double>();
  return c;
}

json to_json(const ModelConfig& c) {
  const auto& b = c.backbone;
  return {{"n_mels", b.n_mels},
          {"n_classes", b.n_classes},
          {"channels", b.channels},
          {"time_pool", b.time_pool},
          {"gru_units", b.gru_units},
          {"fc_units", b.fc_units},
          {"leaky_slope", b.leaky_slope},
          {"conditioner_hidden", c.conditioner_hidden}};
}

ModelConfig model_config_from_json(const json& j) {
  ModelConfig c;
  auto& b = c.backbone;
  b.n_mels = j.at("n_mels").get<int>();
  b.n_classes = j.at("n_classes").get<int>();
  b.channels = j.at("channels").get<std::vector<int>>();
  b.time_pool = j.at("time_pool").get<std::vector<int>>();
  b.gru_units = j.at("gru_units").get<int>();
  b.fc_units = j.at("fc_units").get<int>();
  b.leaky_slope = j.at("leaky_slope").get<double>();
  c.conditioner_hidden = j.at("conditioner_hidden").get<std::vector<int>>();
  return c;
}

json to_json(const SynthConfig& c) {
  return {{"n_clips", c.n_clips},
          {"n_classes", c.n_classes},
          {"duration", c.duration},
          {"seed", c.seed},
          {"sample_rate", c.sample_rate},
          {"min_events", c.min_events},
          {"max_events", c.max_events},
          {"min_event_length", c.min_event_length},
          {"max_event_length", c.max_event_length},
          {"noise_level", c.noise_level},
          {"class_gains", c.class_gains},
          {"class_rates", c.class_rates}};
}

SynthConfig synth_config_from_json(const json& j) {
  SynthConfig c;
  c.n_clips = j.at("n_clips").get<int>();
  c.n_classes = j.at("n_classes").get<int>();
  c.duration = j.at("duration").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.sample_rate = j.at("sample_rate").get<int>();
  c.min_events = j.at("min_events").get<int>();
  c.max_events = j.at("max_events").get<int>();
  c.min_event_length = j.at("min_event_length").get<double>();
  c.max_event_length = j.at("max_event_length").get<double>();
  c.noise_level = j.at("noise_level").get<double>();
  c.class_gains = j.at("class_gains").get<std::vector<double>>();
  c.class_rates = j.at("class_rates").get<std::vector<double>>();
  return c;
}

}  // namespace soundtriage
