// Copyright 2026 The soundtriage Authors
// SPDX-License-Identifier: Apache-2.0

#include "soundtriage/metrics.h"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <utility>

#include "json.hpp"

namespace soundtriage {
namespace {

void check_pair(const EventRoll& pred, const EventRoll& ref) {
  require_shape(pred.active.rows() == ref.active.rows() && pred.active.cols() == ref.active.cols(),
                "prediction roll is " + std::to_string(pred.classes()) + "x" +
                    std::to_string(pred.frames()) + ", reference is " +
                    std::to_string(ref.classes()) + "x" + std::to_string(ref.frames()));
}

void check_clip_lists(std::size_t a, std::size_t b) {
  require_shape(a == b, "prediction and reference clip counts differ (" + std::to_string(a) +
                            " vs " + std::to_string(b) + ")");
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

using Interval = std::pair<double, double>;

std::vector<Interval> merged(std::vector<Interval> v) {
  std::sort(v.begin(), v.end());
  std::vector<Interval> out;
  for (const auto& iv : v) {
    if (!out.empty() && iv.first <= out.back().second) {
      out.back().second = std::max(out.back().second, iv.second);
    } else {
      out.push_back(iv);
    }
  }
  return out;
}

// Length of [a, b) covered by a disjoint, sorted interval set.
double covered(double a, double b, const std::vector<Interval>& set) {
  double total = 0.0;
  for (const auto& [lo, hi] : set) {
    const double l = std::max(a, lo);
    const double h = std::min(b, hi);
    if (h > l) total += h - l;
  }
  return total;
}

void check_instances(const std::vector<EventInstance>& events) {
  for (const auto& e : events) {
    if (e.class_index < 0 || !(e.onset < e.offset)) {
      throw ConfigError("malformed event instance (class " + std::to_string(e.class_index) +
                        ", onset " + std::to_string(e.onset) + ", offset " +
                        std::to_string(e.offset) + ")");
    }
  }
}

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : "nan"; }

}  // namespace

double f_score(long long tp, long long fp, long long fn) {
  const long long denom = 2 * tp + fp + fn;
  return denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

std::vector<FrameCounts> frame_counts(const EventRoll& pred, const EventRoll& ref) {
  check_pair(pred, ref);
  std::vector<FrameCounts> counts(static_cast<std::size_t>(ref.classes()));
  for (Eigen::Index n = 0; n < ref.active.rows(); ++n) {
    FrameCounts& c = counts[static_cast<std::size_t>(n)];
    for (Eigen::Index t = 0; t < ref.active.cols(); ++t) {
      const bool p = pred.active(n, t) != 0;
      const bool r = ref.active(n, t) != 0;
      if (p && r) ++c.tp;
      else if (p) ++c.fp;
      else if (r) ++c.fn;
      else ++c.tn;
    }
  }
  return counts;
}

ClassScores frame_f1(std::span<const EventRoll> pred, std::span<const EventRoll> ref) {
  check_clip_lists(pred.size(), ref.size());
  std::vector<FrameCounts> totals;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const auto counts = frame_counts(pred[i], ref[i]);
    if (totals.empty()) totals.resize(counts.size());
    require_shape(counts.size() == totals.size(), "clips disagree on the number of classes");
    for (std::size_t n = 0; n < counts.size(); ++n) totals[n] += counts[n];
  }
  ClassScores s;
  for (const auto& c : totals) s.per_class.push_back(f_score(c.tp, c.fp, c.fn));
  s.macro = mean(s.per_class);
  return s;
}

ClassScores frame_f1(const EventRoll& pred, const EventRoll& ref) {
  return frame_f1(std::span<const EventRoll>(&pred, 1), std::span<const EventRoll>(&ref, 1));
}

ErrorRates insertion_deletion(std::span<const EventRoll> pred, std::span<const EventRoll> ref) {
  check_clip_lists(pred.size(), ref.size());
  std::vector<long long> ins, del, act;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    check_pair(pred[i], ref[i]);
    const auto classes = static_cast<std::size_t>(ref[i].classes());
    if (act.empty()) {
      ins.assign(classes, 0);
      del.assign(classes, 0);
      act.assign(classes, 0);
    }
    require_shape(classes == act.size(), "clips disagree on the number of classes");
    for (Eigen::Index n = 0; n < ref[i].active.rows(); ++n) {
      for (Eigen::Index t = 0; t < ref[i].active.cols(); ++t) {
        const int p = pred[i].active(n, t) != 0;
        const int r = ref[i].active(n, t) != 0;
        const int fp = p && !r;
        const int fn = r && !p;
        ins[n] += std::max(0, fp - fn);
        del[n] += std::max(0, fn - fp);
        act[n] += r;
      }
    }
  }
  ErrorRates rates;
  std::vector<double> defined_i, defined_d;
  for (std::size_t n = 0; n < act.size(); ++n) {
    if (act[n] == 0) {
      rates.insertion.emplace_back(std::nullopt);
      rates.deletion.emplace_back(std::nullopt);
      continue;
    }
    const double ir = static_cast<double>(ins[n]) / static_cast<double>(act[n]);
    const double dr = static_cast<double>(del[n]) / static_cast<double>(act[n]);
    rates.insertion.emplace_back(ir);
    rates.deletion.emplace_back(dr);
    defined_i.push_back(ir);
    defined_d.push_back(dr);
  }
  if (!defined_i.empty()) {
    rates.mean_insertion = mean(defined_i);
    rates.mean_deletion = mean(defined_d);
  }
  return rates;
}

ErrorRates insertion_deletion(const EventRoll& pred, const EventRoll& ref) {
  return insertion_deletion(std::span<const EventRoll>(&pred, 1),
                            std::span<const EventRoll>(&ref, 1));
}

void IntersectionConfig::validate() const {
  if (!(dtc > 0.0 && dtc <= 1.0) || !(gtc > 0.0 && gtc <= 1.0)) {
    throw ConfigError("DTC and GTC must lie in (0, 1]");
  }
}

IntersectionCounts intersection_counts(const std::vector<EventInstance>& pred,
                                       const std::vector<EventInstance>& ref, int class_index,
                                       const IntersectionConfig& config) {
  check_instances(pred);
  check_instances(ref);
  std::vector<Interval> ref_set, pred_list;
  for (const auto& e : ref) {
    if (e.class_index == class_index) ref_set.emplace_back(e.onset, e.offset);
  }
  for (const auto& e : pred) {
    if (e.class_index == class_index) pred_list.emplace_back(e.onset, e.offset);
  }
  const auto ref_union = merged(ref_set);

  IntersectionCounts c;
  std::vector<Interval> valid;
  for (const auto& [a, b] : pred_list) {
    if (covered(a, b, ref_union) / (b - a) >= config.dtc) {
      valid.emplace_back(a, b);
    } else {
      ++c.fp;
    }
  }
  const auto valid_union = merged(valid);
  for (const auto& [a, b] : ref_set) {
    if (covered(a, b, valid_union) / (b - a) >= config.gtc) {
      ++c.tp;
    } else {
      ++c.fn;
    }
  }
  return c;
}

ClassScores intersection_f1(std::span<const std::vector<EventInstance>> pred_per_clip,
                            std::span<const std::vector<EventInstance>> ref_per_clip,
                            int n_classes, const IntersectionConfig& config) {
  config.validate();
  check_clip_lists(pred_per_clip.size(), ref_per_clip.size());
  ClassScores s;
  for (int n = 0; n < n_classes; ++n) {
    IntersectionCounts total;
    for (std::size_t i = 0; i < pred_per_clip.size(); ++i) {
      const auto c = intersection_counts(pred_per_clip[i], ref_per_clip[i], n, config);
      total.tp += c.tp;
      total.fp += c.fp;
      total.fn += c.fn;
    }
    s.per_class.push_back(f_score(total.tp, total.fp, total.fn));
  }
  s.macro = mean(s.per_class);
  return s;
}

MetricsReport build_report(std::span<const EventRoll> pred_rolls,
                           std::span<const EventRoll> ref_rolls,
                           std::span<const std::vector<EventInstance>> pred_events,
                           std::span<const std::vector<EventInstance>> ref_events,
                           const std::vector<std::string>& class_names,
                           const IntersectionConfig& config) {
  MetricsReport r;
  r.class_names = class_names;
  r.frame_f = frame_f1(pred_rolls, ref_rolls);
  r.rates = insertion_deletion(pred_rolls, ref_rolls);
  r.intersection_f =
      intersection_f1(pred_events, ref_events, static_cast<int>(class_names.size()), config);
  return r;
}

std::string MetricsReport::to_json() const {
  nlohmann::json classes = nlohmann::json::array();
  for (std::size_t n = 0; n < class_names.size(); ++n) {
    classes.push_back({{"class", class_names[n]},
                       {"index", n},
                       {"frame_f", n < frame_f.per_class.size() ? frame_f.per_class[n] : 0.0},
                       {"intersection_f",
                        n < intersection_f.per_class.size() ? intersection_f.per_class[n] : 0.0},
                       {"insertion_rate",
                        n < rates.insertion.size() ? optional_json(rates.insertion[n]) : nullptr},
                       {"deletion_rate",
                        n < rates.deletion.size() ? optional_json(rates.deletion[n]) : nullptr}});
  }
  nlohmann::json j = {{"classes", classes},
                      {"macro",
                       {{"frame_f", frame_f.macro},
                        {"intersection_f", intersection_f.macro},
                        {"insertion_rate", optional_json(rates.mean_insertion)},
                        {"deletion_rate", optional_json(rates.mean_deletion)}}}};
  return j.dump(2) + "\n";
}

std::string MetricsReport::summary_tsv() const {
  std::ostringstream os;
  os << "class\tframe_f\tintersection_f\tinsertion_rate\tdeletion_rate\n";
  for (std::size_t n = 0; n < class_names.size(); ++n) {
    os << class_names[n] << '\t' << fmt(frame_f.per_class.at(n)) << '\t'
       << fmt(intersection_f.per_class.at(n)) << '\t' << fmt(rates.insertion.at(n)) << '\t'
       << fmt(rates.deletion.at(n)) << '\n';
  }
  os << "macro\t" << fmt(frame_f.macro) << '\t' << fmt(intersection_f.macro) << '\t'
     << fmt(rates.mean_insertion) << '\t' << fmt(rates.mean_deletion) << '\n';
  return os.str();
}

}  // namespace soundtriage
