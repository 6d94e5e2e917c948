// Copyright 2026 The soundtriage Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SOUNDTRIAGE_LOSSES_H_
#define SOUNDTRIAGE_LOSSES_H_

#include <string>
#include <string_view>

#include "soundtriage/common.h"
#include "soundtriage/dataio.h"
#include "soundtriage/triage.h"

namespace soundtriage {

enum class LossKind { kSed, kSetAi, kSetA };

LossKind parse_loss_kind(std::string_view name);  // "sed" | "set_ai" | "set_a"
std::string_view loss_kind_name(LossKind kind);

struct LossValue {
  double total = 0.0;
  Vector per_class;  // total == per_class.sum()
};

/// Plain binary cross-entropy summed over frames, per class.
LossValue loss_sed(const Matrix& logits, const EventRoll& roll);

/// Every frame of class n weighted by N * lambda_n.
LossValue loss_set_ai(const Matrix& logits, const EventRoll& roll, const TriageWeights& weights);

/// Only active frames of class n weighted by N * lambda_n.
LossValue loss_set_a(const Matrix& logits, const EventRoll& roll, const TriageWeights& weights);

/// Dispatch on kind; `weights` is ignored for kSed.
LossValue compute_loss(LossKind kind, const Matrix& logits, const EventRoll& roll,
                       const TriageWeights& weights);

/// d total / d logits for the given loss.
Matrix loss_gradient(LossKind kind, const Matrix& logits, const EventRoll& roll,
                     const TriageWeights& weights);

/// log(1 + exp(x)) without overflow.
double softplus(double x);

}  // namespace soundtriage

#endif  // SOUNDTRIAGE_LOSSES_H_
