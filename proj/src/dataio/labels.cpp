// Copyright 2026 The soundtriage Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <string>

#include "soundtriage/dataio.h"

namespace soundtriage {
namespace {

// Frame-unit position with values within 1e-9 of an integer snapped to it,
// so boundaries that are multiples of the hop land exactly on frame edges.
double frame_position(double seconds, double hop) {
  const double q = seconds / hop;
  const double r = std::round(q);
  return std::abs(q - r) < 1e-9 ? r : q;
}

}  // namespace

void ClipAnnotation::validate(int n_classes) const {
  for (const auto& ev : events) {
    if (ev.class_index < 0 || ev.class_index >= n_classes) {
      throw ConfigError("clip " + clip_id + ": class index " + std::to_string(ev.class_index) +
                        " outside [0, " + std::to_string(n_classes) + ")");
    }
    if (!(ev.onset >= 0.0 && ev.onset < ev.offset && ev.offset <= duration)) {
      throw ConfigError("clip " + clip_id + ": event must satisfy 0 <= onset < offset <= duration");
    }
  }
}

EventRoll rasterize(const ClipAnnotation& annotation, int n_frames, double frame_hop,
                    int n_classes) {
  if (n_frames < 1) throw ConfigError("rasterize needs at least one frame");
  if (!(frame_hop > 0.0)) throw ConfigError("frame_hop must be positive");
  EventRoll roll;
  roll.frame_hop = frame_hop;
  roll.active = BinaryMatrix::Zero(n_classes, n_frames);
  for (const auto& ev : annotation.events) {
    if (ev.class_index < 0 || ev.class_index >= n_classes) {
      throw ConfigError("event class " + std::to_string(ev.class_index) + " >= N_classes " +
                        std::to_string(n_classes));
    }
    if (!(ev.offset > ev.onset)) continue;
    const double first = std::floor(frame_position(ev.onset, frame_hop));
    const double end = std::ceil(frame_position(ev.offset, frame_hop));
    const auto lo = static_cast<long>(std::max(first, 0.0));
    const auto hi = static_cast<long>(std::min(end, static_cast<double>(n_frames)));
    for (long t = lo; t < hi; ++t) roll.active(ev.class_index, t) = 1;
  }
  return roll;
}

EventRoll pool_labels(const EventRoll& roll, int factor) {
  if (factor < 1) throw ConfigError("pool factor must be >= 1, got " + std::to_string(factor));
  const int frames = roll.frames();
  const int out_frames = (frames + factor - 1) / factor;
  EventRoll out;
  out.frame_hop = roll.frame_hop * factor;
  out.active = BinaryMatrix::Zero(roll.classes(), out_frames);
  for (int n = 0; n < roll.classes(); ++n) {
    for (int t = 0; t < frames; ++t) {
      if (roll.active(n, t)) out.active(n, t / factor) = 1;
    }
  }
  return out;
}

}  // namespace soundtriage
