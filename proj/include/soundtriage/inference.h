// Copyright 2026 The soundtriage Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SOUNDTRIAGE_INFERENCE_H_
#define SOUNDTRIAGE_INFERENCE_H_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "soundtriage/dataio.h"
#include "soundtriage/metrics.h"
#include "soundtriage/model.h"
#include "soundtriage/training.h"
#include "soundtriage/triage.h"

namespace soundtriage {

/// Repeats each column `factor` times and keeps the first `frames` columns.
Matrix upsample_repeat(const Matrix& values, int factor, int frames);

/// Class probabilities on the feature grid (classes x feature frames).
Matrix predict(const SetModel& model, const FeatureGrid& features, const TriageWeights& weights);
Matrix predict(const Checkpoint& checkpoint, const FeatureGrid& features,
               const TriageWeights& weights);

struct PostprocessConfig {
  std::vector<double> thresholds;  // per class, in (0, 1)
  std::vector<int> median_sizes;   // per class, odd, >= 1

  static PostprocessConfig uniform(int n_classes, double threshold = 0.5, int median_size = 1);
  int classes() const { return static_cast<int>(thresholds.size()); }
  void validate() const;

  std::string to_json() const;
  static PostprocessConfig from_json(const std::string& text);
};

/// Active iff probability > threshold of its class.
EventRoll binarize(const Matrix& probabilities, std::span<const double> thresholds,
                   double frame_hop);

/// Per-class sliding majority (binary median) with edge replication.
EventRoll median_smooth(const EventRoll& roll, std::span<const int> sizes);

/// Maximal runs of active frames; onset = start * hop, offset = (end + 1) * hop.
std::vector<EventInstance> extract_events(const EventRoll& roll);

/// binarize, then median_smooth.
EventRoll postprocess(const Matrix& probabilities, const PostprocessConfig& config,
                      double frame_hop);

enum class MetricKind { kFrameF, kIntersectionF };

MetricKind parse_metric_kind(const std::string& name);  // "frame" | "intersection"

struct TuningGrid {
  std::vector<double> thresholds;
  std::vector<int> median_sizes;
  std::vector<double> weights;  // raw target weight

  /// Thresholds 0.05..0.95 step 0.05, odd medians 1..31, weights {1,5,10,15,20,25}.
  static TuningGrid defaults();
  void validate() const;
};

struct ClassTuning {
  double threshold = 0.5;
  int median_size = 1;
  double weight = 1.0;
  double score = 0.0;
};

struct TuningResult {
  PostprocessConfig postprocess;
  std::vector<ClassTuning> per_class;

  std::string to_json() const;
};

/// One class's metric for a fixed threshold and median size, pooled over
/// clips. `probabilities[i]` is the class-row of clip i.
double score_class(MetricKind kind, int class_index, const std::vector<Vector>& probabilities,
                   const std::vector<LabeledClip>& clips, double threshold, int median_size,
                   const IntersectionConfig& intersection = {});

/// Exhaustive per-class search over thresholds x median sizes x target
/// weights. Ties go to the smallest threshold, then smallest median size,
/// then smallest weight. Classes not listed in `classes` (all when empty)
/// keep threshold 0.5, median 1, weight 1.
TuningResult tune_postprocessing(const SetModel& model, const std::vector<LabeledClip>& val_set,
                                 const TuningGrid& grid, MetricKind metric,
                                 const std::vector<int>& classes = {},
                                 const IntersectionConfig& intersection = {});

/// Full metrics for a model at fixed weights and post-processing.
MetricsReport evaluate(const SetModel& model, const std::vector<LabeledClip>& clips,
                       const TriageWeights& weights, const PostprocessConfig& postprocess,
                       const std::vector<std::string>& class_names,
                       const IntersectionConfig& intersection = {});

/// Single-target evaluation: class k is scored on the posteriors obtained
/// with make_inference_weights(k, target_weights[k], N).
MetricsReport evaluate_targeted(const SetModel& model, const std::vector<LabeledClip>& clips,
                                const std::vector<double>& target_weights,
                                const PostprocessConfig& postprocess,
                                const std::vector<std::string>& class_names,
                                const IntersectionConfig& intersection = {});

}  // namespace soundtriage

#endif  // SOUNDTRIAGE_INFERENCE_H_
