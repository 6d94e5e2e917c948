// Copyright 2026 The soundtriage Authors
// SPDX-License-Identifier: Apache-2.0

#include "soundtriage/losses.h"

#include <cmath>

#include "soundtriage/backbone.h"

namespace soundtriage {
namespace {

void check_shapes(const Matrix& logits, const EventRoll& roll) {
  require_shape(logits.rows() == roll.active.rows() && logits.cols() == roll.active.cols(),
                "logits are " + std::to_string(logits.rows()) + "x" +
                    std::to_string(logits.cols()) + " but the roll is " +
                    std::to_string(roll.active.rows()) + "x" + std::to_string(roll.active.cols()));
}

void check_weights(const Matrix& logits, const TriageWeights& weights) {
  require_shape(weights.classes() == logits.rows(),
                "triage weights have " + std::to_string(weights.classes()) +
                    " classes, logits have " + std::to_string(logits.rows()));
}

// Per class: active_scale[n] * sum_active softplus(-y) + inactive_scale[n] * sum_inactive softplus(y).
// -log s(y) = softplus(-y) and -log(1 - s(y)) = softplus(y).
LossValue weighted_bce(const Matrix& logits, const EventRoll& roll, const Vector& active_scale,
                       const Vector& inactive_scale) {
  LossValue out;
  out.per_class = Vector::Zero(logits.rows());
  for (Eigen::Index n = 0; n < logits.rows(); ++n) {
    double active = 0.0;
    double inactive = 0.0;
    for (Eigen::Index t = 0; t < logits.cols(); ++t) {
      if (roll.active(n, t)) {
        active += softplus(-logits(n, t));
      } else {
        inactive += softplus(logits(n, t));
      }
    }
    out.per_class[n] = active_scale[n] * active + inactive_scale[n] * inactive;
  }
  out.total = out.per_class.sum();
  return out;
}

Matrix weighted_bce_gradient(const Matrix& logits, const EventRoll& roll,
                             const Vector& active_scale, const Vector& inactive_scale) {
  Matrix g(logits.rows(), logits.cols());
  for (Eigen::Index t = 0; t < logits.cols(); ++t) {
    for (Eigen::Index n = 0; n < logits.rows(); ++n) {
      const double y = logits(n, t);
      g(n, t) = roll.active(n, t) ? -active_scale[n] * sigmoid(-y) : inactive_scale[n] * sigmoid(y);
    }
  }
  return g;
}

struct Scales {
  Vector active;
  Vector inactive;
};

Scales scales_for(LossKind kind, const Matrix& logits, const TriageWeights& weights) {
  const Eigen::Index n = logits.rows();
  if (kind == LossKind::kSed) return {Vector::Ones(n), Vector::Ones(n)};
  check_weights(logits, weights);
  const Vector scaled = static_cast<double>(n) * weights.normalized();
  if (kind == LossKind::kSetAi) return {scaled, scaled};
  return {scaled, Vector::Ones(n)};
}

}  // namespace

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

LossKind parse_loss_kind(std::string_view name) {
  if (name == "sed") return LossKind::kSed;
  if (name == "set_ai") return LossKind::kSetAi;
  if (name == "set_a") return LossKind::kSetA;
  throw ConfigError("unknown loss '" + std::string(name) + "' (expected sed, set_ai or set_a)");
}

std::string_view loss_kind_name(LossKind kind) {
  switch (kind) {
    case LossKind::kSed:
      return "sed";
    case LossKind::kSetAi:
      return "set_ai";
    case LossKind::kSetA:
      return "set_a";
  }
  return "sed";
}

LossValue loss_sed(const Matrix& logits, const EventRoll& roll) {
  check_shapes(logits, roll);
  const Vector ones = Vector::Ones(logits.rows());
  return weighted_bce(logits, roll, ones, ones);
}

LossValue loss_set_ai(const Matrix& logits, const EventRoll& roll, const TriageWeights& weights) {
  return compute_loss(LossKind::kSetAi, logits, roll, weights);
}

LossValue loss_set_a(const Matrix& logits, const EventRoll& roll, const TriageWeights& weights) {
  return compute_loss(LossKind::kSetA, logits, roll, weights);
}

LossValue compute_loss(LossKind kind, const Matrix& logits, const EventRoll& roll,
                       const TriageWeights& weights) {
  check_shapes(logits, roll);
  const Scales s = scales_for(kind, logits, weights);
  return weighted_bce(logits, roll, s.active, s.inactive);
}

Matrix loss_gradient(LossKind kind, const Matrix& logits, const EventRoll& roll,
                     const TriageWeights& weights) {
  check_shapes(logits, roll);
  const Scales s = scales_for(kind, logits, weights);
  return weighted_bce_gradient(logits, roll, s.active, s.inactive);
}

}  // namespace soundtriage
