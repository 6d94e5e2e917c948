// Copyright 2026 The soundtriage Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SOUNDTRIAGE_TRIAGE_H_
#define SOUNDTRIAGE_TRIAGE_H_

#include <string>
#include <vector>

#include "soundtriage/common.h"

namespace soundtriage {

/// Per-class priority vector. `raw` is what the user supplied; `normalized`
/// is raw / sum(raw) and lives on the probability simplex.
class TriageWeights {
 public:
  /// Throws ConfigError on negative or non-finite entries, or an all-zero vector.
  static TriageWeights from_raw(const Vector& raw);
  static TriageWeights from_raw(const std::vector<double>& raw);
  static TriageWeights uniform(int n_classes);

  const Vector& raw() const { return raw_; }
  const Vector& normalized() const { return normalized_; }
  int classes() const { return static_cast<int>(raw_.size()); }

  std::vector<double> raw_values() const { return {raw_.data(), raw_.data() + raw_.size()}; }

 private:
  Vector raw_;
  Vector normalized_;
};

struct DirichletConfig {
  Vector alpha;

  static DirichletConfig symmetric(int k, double alpha);
  int dimension() const { return static_cast<int>(alpha.size()); }
  void validate() const;
};

/// One draw from Dirichlet(alpha) as normalized gamma variates. The draw is
/// already on the simplex, so raw == normalized.
TriageWeights sample_triage(const DirichletConfig& config, Rng& rng);

/// raw = (1, ..., 1) with raw[target] = target_weight.
TriageWeights make_inference_weights(int target, double target_weight, int n_classes);

/// N * normalized; the conditioner input. Uniform weights map to all ones.
Vector scale_for_conditioning(const TriageWeights& weights);

/// Parses "w1,w2,...,wN" into raw weights.
TriageWeights parse_lambda(const std::string& text);

}  // namespace soundtriage

#endif  // SOUNDTRIAGE_TRIAGE_H_
