// Copyright 2026 The soundtriage Authors
// SPDX-License-Identifier: Apache-2.0

#include "soundtriage/triage.h"

#include <cmath>
#include <sstream>

namespace soundtriage {

TriageWeights TriageWeights::from_raw(const Vector& raw) {
  if (raw.size() < 1) throw ConfigError("triage weights need at least one class");
  for (Eigen::Index i = 0; i < raw.size(); ++i) {
    if (!std::isfinite(raw[i]) || raw[i] < 0.0) {
      throw ConfigError("triage weight " + std::to_string(i) + " must be finite and >= 0");
    }
  }
  const double total = raw.sum();
  if (!(total > 0.0)) throw ConfigError("triage weights need at least one positive entry");
  TriageWeights w;
  w.raw_ = raw;
  w.normalized_ = raw / total;
  return w;
}

TriageWeights TriageWeights::from_raw(const std::vector<double>& raw) {
  return from_raw(Eigen::Map<const Vector>(raw.data(), static_cast<Eigen::Index>(raw.size())));
}

TriageWeights TriageWeights::uniform(int n_classes) {
  if (n_classes < 1) throw ConfigError("n_classes must be >= 1");
  return from_raw(Vector::Ones(n_classes));
}

DirichletConfig DirichletConfig::symmetric(int k, double alpha) {
  if (k < 1) throw ConfigError("Dirichlet dimension must be >= 1");
  return {Vector::Constant(k, alpha)};
}

void DirichletConfig::validate() const {
  if (alpha.size() < 1) throw ConfigError("Dirichlet dimension must be >= 1");
  for (Eigen::Index i = 0; i < alpha.size(); ++i) {
    if (!(alpha[i] > 0.0) || !std::isfinite(alpha[i])) {
      throw ConfigError("Dirichlet alpha must be positive, got " + std::to_string(alpha[i]));
    }
  }
}

TriageWeights sample_triage(const DirichletConfig& config, Rng& rng) {
  config.validate();
  const int k = config.dimension();
  Vector draw(k);
  // With small alpha every gamma variate can underflow to zero; redraw then.
  do {
    for (int i = 0; i < k; ++i) {
      std::gamma_distribution<double> gamma(config.alpha[i], 1.0);
      draw[i] = gamma(rng);
    }
  } while (!(draw.sum() > 0.0));
  draw /= draw.sum();
  return TriageWeights::from_raw(draw);
}

TriageWeights make_inference_weights(int target, double target_weight, int n_classes) {
  if (n_classes < 1) throw ConfigError("n_classes must be >= 1");
  if (target < 0 || target >= n_classes) {
    throw ConfigError("target class " + std::to_string(target) + " outside [0, " +
                      std::to_string(n_classes) + ")");
  }
  if (!(target_weight > 0.0) || !std::isfinite(target_weight)) {
    throw ConfigError("target weight must be positive");
  }
  Vector raw = Vector::Ones(n_classes);
  raw[target] = target_weight;
  return TriageWeights::from_raw(raw);
}

Vector scale_for_conditioning(const TriageWeights& weights) {
  return static_cast<double>(weights.classes()) * weights.normalized();
}

TriageWeights parse_lambda(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("cannot parse triage weight '" + item + "'");
    }
  }
  return TriageWeights::from_raw(values);
}

}  // namespace soundtriage
