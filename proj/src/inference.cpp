// Copyright 2026 The soundtriage Authors
// SPDX-License-Identifier: Apache-2.0

#include "soundtriage/inference.h"

#include <algorithm>
#include <tuple>

#include "json.hpp"

namespace soundtriage {
namespace {

using nlohmann::json;

// Binary median of one row with edge replication.
void smooth_row(const BinaryMatrix& in, Eigen::Index row, int size, BinaryMatrix& out) {
  const Eigen::Index frames = in.cols();
  const int half = size / 2;
  for (Eigen::Index t = 0; t < frames; ++t) {
    int ones = 0;
    for (int k = -half; k <= half; ++k) {
      const Eigen::Index s = std::clamp<Eigen::Index>(t + k, 0, frames - 1);
      ones += in(row, s) != 0;
    }
    out(row, t) = ones > half ? 1 : 0;
  }
}

void check_median(int size) {
  if (size < 1 || size % 2 == 0) {
    throw ConfigError("median filter size must be odd and >= 1, got " + std::to_string(size));
  }
}

EventRoll single_row_roll(const Vector& probs, double threshold, int median_size, double hop) {
  EventRoll raw;
  raw.frame_hop = hop;
  raw.active.resize(1, probs.size());
  for (Eigen::Index t = 0; t < probs.size(); ++t) raw.active(0, t) = probs[t] > threshold;
  if (median_size == 1) return raw;
  EventRoll out = raw;
  smooth_row(raw.active, 0, median_size, out.active);
  return out;
}

}  // namespace

Matrix upsample_repeat(const Matrix& values, int factor, int frames) {
  if (factor < 1) throw ConfigError("upsampling factor must be >= 1");
  require_shape(static_cast<long>(values.cols()) * factor >= frames,
                "not enough frames to upsample to " + std::to_string(frames));
  Matrix out(values.rows(), frames);
  for (int t = 0; t < frames; ++t) out.col(t) = values.col(t / factor);
  return out;
}

Matrix predict(const SetModel& model, const FeatureGrid& features, const TriageWeights& weights) {
  require_shape(weights.classes() == model.classes(),
                "triage weights have " + std::to_string(weights.classes()) +
                    " classes, checkpoint has " + std::to_string(model.classes()));
  const PosteriorGrid grid = model.forward(features, weights);
  return upsample_repeat(grid.probabilities, model.config().backbone.time_reduction(),
                         features.frames());
}

Matrix predict(const Checkpoint& checkpoint, const FeatureGrid& features,
               const TriageWeights& weights) {
  return predict(checkpoint.model, features, weights);
}

PostprocessConfig PostprocessConfig::uniform(int n_classes, double threshold, int median_size) {
  PostprocessConfig c;
  c.thresholds.assign(static_cast<std::size_t>(n_classes), threshold);
  c.median_sizes.assign(static_cast<std::size_t>(n_classes), median_size);
  c.validate();
  return c;
}

void PostprocessConfig::validate() const {
  if (thresholds.size() != median_sizes.size()) {
    throw ConfigError("post-processing needs one threshold and one median size per class");
  }
  for (double t : thresholds) {
    if (!(t > 0.0 && t < 1.0)) throw ConfigError("thresholds must lie in (0, 1)");
  }
  for (int m : median_sizes) check_median(m);
}

std::string PostprocessConfig::to_json() const {
  return json({{"thresholds", thresholds}, {"median_sizes", median_sizes}}).dump(2) + "\n";
}

PostprocessConfig PostprocessConfig::from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    PostprocessConfig c;
    c.thresholds = j.at("thresholds").get<std::vector<double>>();
    c.median_sizes = j.at("median_sizes").get<std::vector<int>>();
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed post-processing file: ") + e.what());
  }
}

EventRoll binarize(const Matrix& probabilities, std::span<const double> thresholds,
                   double frame_hop) {
  require_shape(static_cast<Eigen::Index>(thresholds.size()) == probabilities.rows(),
                "need one threshold per class");
  EventRoll roll;
  roll.frame_hop = frame_hop;
  roll.active.resize(probabilities.rows(), probabilities.cols());
  for (Eigen::Index t = 0; t < probabilities.cols(); ++t) {
    for (Eigen::Index n = 0; n < probabilities.rows(); ++n) {
      roll.active(n, t) = probabilities(n, t) > thresholds[static_cast<std::size_t>(n)] ? 1 : 0;
    }
  }
  return roll;
}

EventRoll median_smooth(const EventRoll& roll, std::span<const int> sizes) {
  require_shape(static_cast<int>(sizes.size()) == roll.classes(), "need one median size per class");
  for (int s : sizes) check_median(s);
  EventRoll out = roll;
  for (Eigen::Index n = 0; n < roll.active.rows(); ++n) {
    const int size = sizes[static_cast<std::size_t>(n)];
    if (size > 1 && roll.frames() > 0) smooth_row(roll.active, n, size, out.active);
  }
  return out;
}

std::vector<EventInstance> extract_events(const EventRoll& roll) {
  std::vector<EventInstance> events;
  for (Eigen::Index n = 0; n < roll.active.rows(); ++n) {
    Eigen::Index t = 0;
    while (t < roll.active.cols()) {
      if (!roll.active(n, t)) {
        ++t;
        continue;
      }
      const Eigen::Index start = t;
      while (t < roll.active.cols() && roll.active(n, t)) ++t;
      events.push_back({static_cast<int>(n), static_cast<double>(start) * roll.frame_hop,
                        static_cast<double>(t) * roll.frame_hop});
    }
  }
  return events;
}

EventRoll postprocess(const Matrix& probabilities, const PostprocessConfig& config,
                      double frame_hop) {
  config.validate();
  return median_smooth(binarize(probabilities, config.thresholds, frame_hop), config.median_sizes);
}

MetricKind parse_metric_kind(const std::string& name) {
  if (name == "frame") return MetricKind::kFrameF;
  if (name == "intersection") return MetricKind::kIntersectionF;
  throw ConfigError("unknown metric '" + name + "' (expected frame or intersection)");
}

TuningGrid TuningGrid::defaults() {
  TuningGrid g;
  for (int i = 1; i <= 19; ++i) g.thresholds.push_back(0.05 * i);
  for (int m = 1; m <= 31; m += 2) g.median_sizes.push_back(m);
  g.weights = {1.0, 5.0, 10.0, 15.0, 20.0, 25.0};
  return g;
}

void TuningGrid::validate() const {
  if (thresholds.empty() || median_sizes.empty() || weights.empty()) {
    throw ConfigError("tuning grids must be non-empty");
  }
  for (double t : thresholds) {
    if (!(t > 0.0 && t < 1.0)) throw ConfigError("grid thresholds must lie in (0, 1)");
  }
  for (int m : median_sizes) check_median(m);
  for (double w : weights) {
    if (!(w > 0.0)) throw ConfigError("grid weights must be positive");
  }
}

double score_class(MetricKind kind, int class_index, const std::vector<Vector>& probabilities,
                   const std::vector<LabeledClip>& clips, double threshold, int median_size,
                   const IntersectionConfig& intersection) {
  require_shape(probabilities.size() == clips.size(), "one probability row per clip required");
  long long tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    const LabeledClip& clip = clips[i];
    require_shape(probabilities[i].size() == clip.reference.frames(),
                  "probability row length differs from the reference roll");
    const EventRoll roll =
        single_row_roll(probabilities[i], threshold, median_size, clip.features.frame_hop);
    if (kind == MetricKind::kFrameF) {
      for (Eigen::Index t = 0; t < roll.active.cols(); ++t) {
        const bool p = roll.active(0, t) != 0;
        const bool r = clip.reference.active(class_index, t) != 0;
        tp += p && r;
        fp += p && !r;
        fn += !p && r;
      }
    } else {
      std::vector<EventInstance> pred = extract_events(roll);
      for (auto& e : pred) e.class_index = class_index;
      const auto c = intersection_counts(pred, clip.annotation.events, class_index, intersection);
      tp += c.tp;
      fp += c.fp;
      fn += c.fn;
    }
  }
  return f_score(tp, fp, fn);
}

TuningResult tune_postprocessing(const SetModel& model, const std::vector<LabeledClip>& val_set,
                                 const TuningGrid& grid, MetricKind metric,
                                 const std::vector<int>& classes,
                                 const IntersectionConfig& intersection) {
  grid.validate();
  if (val_set.empty()) throw ConfigError("tuning needs a non-empty validation set");
  const int n_classes = model.classes();
  std::vector<int> targets = classes;
  if (targets.empty()) {
    for (int k = 0; k < n_classes; ++k) targets.push_back(k);
  }

  TuningResult result;
  result.postprocess = PostprocessConfig::uniform(n_classes);
  result.per_class.assign(static_cast<std::size_t>(n_classes), ClassTuning{});

  for (int k : targets) {
    if (k < 0 || k >= n_classes) throw ConfigError("tuning class out of range");
    bool have = false;
    ClassTuning best;
    for (double w : grid.weights) {
      const TriageWeights lambda = make_inference_weights(k, w, n_classes);
      std::vector<Vector> rows;
      rows.reserve(val_set.size());
      for (const auto& clip : val_set) rows.push_back(predict(model, clip.features, lambda).row(k));
      for (double thr : grid.thresholds) {
        for (int med : grid.median_sizes) {
          const double s = score_class(metric, k, rows, val_set, thr, med, intersection);
          const bool better =
              !have || s > best.score ||
              (s == best.score && std::tie(thr, med, w) <
                                      std::tie(best.threshold, best.median_size, best.weight));
          if (better) {
            best = {thr, med, w, s};
            have = true;
          }
        }
      }
    }
    result.per_class[static_cast<std::size_t>(k)] = best;
    result.postprocess.thresholds[static_cast<std::size_t>(k)] = best.threshold;
    result.postprocess.median_sizes[static_cast<std::size_t>(k)] = best.median_size;
  }
  return result;
}

std::string TuningResult::to_json() const {
  json classes = json::array();
  for (const auto& c : per_class) {
    classes.push_back({{"threshold", c.threshold},
                       {"median_size", c.median_size},
                       {"weight", c.weight},
                       {"score", c.score}});
  }
  json j = {{"thresholds", postprocess.thresholds},
            {"median_sizes", postprocess.median_sizes},
            {"classes", classes}};
  return j.dump(2) + "\n";
}

MetricsReport evaluate(const SetModel& model, const std::vector<LabeledClip>& clips,
                       const TriageWeights& weights, const PostprocessConfig& postprocess_config,
                       const std::vector<std::string>& class_names,
                       const IntersectionConfig& intersection) {
  std::vector<EventRoll> pred_rolls, ref_rolls;
  std::vector<std::vector<EventInstance>> pred_events, ref_events;
  for (const auto& clip : clips) {
    const Matrix probs = predict(model, clip.features, weights);
    pred_rolls.push_back(postprocess(probs, postprocess_config, clip.features.frame_hop));
    pred_events.push_back(extract_events(pred_rolls.back()));
    ref_rolls.push_back(clip.reference);
    ref_events.push_back(clip.annotation.events);
  }
  return build_report(pred_rolls, ref_rolls, pred_events, ref_events, class_names, intersection);
}

MetricsReport evaluate_targeted(const SetModel& model, const std::vector<LabeledClip>& clips,
                                const std::vector<double>& target_weights,
                                const PostprocessConfig& postprocess_config,
                                const std::vector<std::string>& class_names,
                                const IntersectionConfig& intersection) {
  const int n = model.classes();
  require_shape(static_cast<int>(target_weights.size()) == n, "need one target weight per class");
  std::vector<EventRoll> pred_rolls, ref_rolls;
  std::vector<std::vector<EventInstance>> pred_events, ref_events;
  for (const auto& clip : clips) {
    Matrix probs(n, clip.features.frames());
    for (int k = 0; k < n; ++k) {
      const auto lambda = make_inference_weights(k, target_weights[static_cast<std::size_t>(k)], n);
      probs.row(k) = predict(model, clip.features, lambda).row(k);
    }
    pred_rolls.push_back(postprocess(probs, postprocess_config, clip.features.frame_hop));
    pred_events.push_back(extract_events(pred_rolls.back()));
    ref_rolls.push_back(clip.reference);
    ref_events.push_back(clip.annotation.events);
  }
  return build_report(pred_rolls, ref_rolls, pred_events, ref_events, class_names, intersection);
}

}  // namespace soundtriage
