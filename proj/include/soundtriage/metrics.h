// Copyright 2026 The soundtriage Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SOUNDTRIAGE_METRICS_H_
#define SOUNDTRIAGE_METRICS_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "soundtriage/dataio.h"

namespace soundtriage {

struct FrameCounts {
  long long tp = 0;
  long long fp = 0;
  long long fn = 0;
  long long tn = 0;

  FrameCounts& operator+=(const FrameCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
  }
};

/// 2TP / (2TP + FP + FN), or 0 when the denominator vanishes.
double f_score(long long tp, long long fp, long long fn);

/// Per-class counts for one clip. Shapes must match.
std::vector<FrameCounts> frame_counts(const EventRoll& pred, const EventRoll& ref);

struct ClassScores {
  std::vector<double> per_class;
  double macro = 0.0;  // unweighted class mean
};

/// Frame-level F per class, pooled over all clips.
ClassScores frame_f1(std::span<const EventRoll> pred, std::span<const EventRoll> ref);
ClassScores frame_f1(const EventRoll& pred, const EventRoll& ref);

/// Insertion and deletion rates per class. Per frame, I = max(0, FP - FN)
/// and D = max(0, FN - FP); rates divide by the count of reference-active
/// frames. Classes with no active reference frame report nullopt and are
/// left out of the means.
struct ErrorRates {
  std::vector<std::optional<double>> insertion;
  std::vector<std::optional<double>> deletion;
  std::optional<double> mean_insertion;
  std::optional<double> mean_deletion;
};

ErrorRates insertion_deletion(std::span<const EventRoll> pred, std::span<const EventRoll> ref);
ErrorRates insertion_deletion(const EventRoll& pred, const EventRoll& ref);

struct IntersectionConfig {
  double dtc = 0.5;
  double gtc = 0.5;

  void validate() const;
};

struct IntersectionCounts {
  long long tp = 0;
  long long fp = 0;
  long long fn = 0;
};

/// Counts for one clip and one class. A prediction is valid when at least
/// `dtc` of its duration overlaps references of its class; a reference is a
/// true positive when at least `gtc` of its duration overlaps valid
/// predictions. Invalid predictions are false positives and missed
/// references false negatives.
IntersectionCounts intersection_counts(const std::vector<EventInstance>& pred,
                                       const std::vector<EventInstance>& ref, int class_index,
                                       const IntersectionConfig& config);

ClassScores intersection_f1(std::span<const std::vector<EventInstance>> pred_per_clip,
                            std::span<const std::vector<EventInstance>> ref_per_clip,
                            int n_classes, const IntersectionConfig& config = {});

struct MetricsReport {
  std::vector<std::string> class_names;
  ClassScores frame_f;
  ClassScores intersection_f;
  ErrorRates rates;

  std::string to_json() const;
  /// Header plus one tab-separated row per class and a final macro row.
  std::string summary_tsv() const;
};

MetricsReport build_report(std::span<const EventRoll> pred_rolls,
                           std::span<const EventRoll> ref_rolls,
                           std::span<const std::vector<EventInstance>> pred_events,
                           std::span<const std::vector<EventInstance>> ref_events,
                           const std::vector<std::string>& class_names,
                           const IntersectionConfig& config = {});

}  // namespace soundtriage

#endif  // SOUNDTRIAGE_METRICS_H_
