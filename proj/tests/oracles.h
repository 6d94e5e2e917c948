// Copyright 2026 The soundtriage Authors
// SPDX-License-Identifier: Apache-2.0

// Naive reference implementations used by the unit and acceptance tests.
// Written with plain loops and no library code beyond the container types.

#ifndef SOUNDTRIAGE_TESTS_ORACLES_H_
#define SOUNDTRIAGE_TESTS_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "soundtriage/dataio.h"

namespace oracle {

using soundtriage::EventInstance;
using soundtriage::EventRoll;
using soundtriage::Matrix;

inline double log_sigmoid(double y) {
  return y >= 0 ? -std::log1p(std::exp(-y)) : y - std::log1p(std::exp(y));
}

// -[z log s(y) + (1 - z) log(1 - s(y))] summed over frames, times the
// active and inactive coefficients of each class.
inline std::vector<double> weighted_bce(const Matrix& logits, const EventRoll& roll,
                                        const std::vector<double>& active_coef,
                                        const std::vector<double>& inactive_coef) {
  std::vector<double> out(static_cast<std::size_t>(logits.rows()), 0.0);
  for (int n = 0; n < logits.rows(); ++n) {
    for (int t = 0; t < logits.cols(); ++t) {
      const double y = logits(n, t);
      const double z = roll.active(n, t) ? 1.0 : 0.0;
      out[n] -= active_coef[n] * z * log_sigmoid(y) + inactive_coef[n] * (1 - z) * log_sigmoid(-y);
    }
  }
  return out;
}

inline double sum(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s;
}

inline double sed(const Matrix& logits, const EventRoll& roll) {
  std::vector<double> ones(static_cast<std::size_t>(logits.rows()), 1.0);
  return sum(weighted_bce(logits, roll, ones, ones));
}

inline std::vector<double> scaled(const std::vector<double>& raw) {
  const double s = sum(raw);
  std::vector<double> out;
  for (double r : raw) out.push_back(static_cast<double>(raw.size()) * r / s);
  return out;
}

inline double set_ai(const Matrix& logits, const EventRoll& roll, const std::vector<double>& raw) {
  const auto w = scaled(raw);
  return sum(weighted_bce(logits, roll, w, w));
}

inline double set_a(const Matrix& logits, const EventRoll& roll, const std::vector<double>& raw) {
  const auto w = scaled(raw);
  std::vector<double> ones(w.size(), 1.0);
  return sum(weighted_bce(logits, roll, w, ones));
}

struct Counts {
  long long tp = 0, fp = 0, fn = 0;
};

inline std::vector<Counts> frame_counts(const std::vector<EventRoll>& pred,
                                        const std::vector<EventRoll>& ref) {
  std::vector<Counts> c(static_cast<std::size_t>(ref.at(0).classes()));
  for (std::size_t i = 0; i < ref.size(); ++i) {
    for (int n = 0; n < ref[i].classes(); ++n) {
      for (int t = 0; t < ref[i].frames(); ++t) {
        const int p = pred[i].active(n, t), r = ref[i].active(n, t);
        c[n].tp += p * r;
        c[n].fp += p * (1 - r);
        c[n].fn += (1 - p) * r;
      }
    }
  }
  return c;
}

inline double f(const Counts& c) {
  if (2 * c.tp + c.fp + c.fn == 0) return 0.0;
  return 2.0 * c.tp / (2.0 * c.tp + c.fp + c.fn);
}

struct Rates {
  std::vector<long long> ins, del, act;
};

inline Rates insertion_deletion(const std::vector<EventRoll>& pred,
                                const std::vector<EventRoll>& ref) {
  const auto classes = static_cast<std::size_t>(ref.at(0).classes());
  Rates r{std::vector<long long>(classes), std::vector<long long>(classes),
          std::vector<long long>(classes)};
  for (std::size_t i = 0; i < ref.size(); ++i) {
    for (int n = 0; n < ref[i].classes(); ++n) {
      for (int t = 0; t < ref[i].frames(); ++t) {
        const int a = ref[i].active(n, t), p = pred[i].active(n, t);
        const int fp = (p == 1 && a == 0) ? 1 : 0;
        const int fn = (p == 0 && a == 1) ? 1 : 0;
        r.ins[n] += fp > fn ? fp - fn : 0;
        r.del[n] += fn > fp ? fn - fp : 0;
        r.act[n] += a;
      }
    }
  }
  return r;
}

// Intersection counts on a time grid of 1/ticks_per_second. Event times must
// be multiples of the tick so cell counting is exact.
inline Counts intersection(const std::vector<EventInstance>& pred,
                           const std::vector<EventInstance>& ref, int class_index, double dtc,
                           double gtc, int ticks_per_second, int total_ticks) {
  auto cells = [&](const EventInstance& e) {
    return std::pair<int, int>{static_cast<int>(std::lround(e.onset * ticks_per_second)),
                               static_cast<int>(std::lround(e.offset * ticks_per_second))};
  };
  std::vector<int> ref_cover(static_cast<std::size_t>(total_ticks), 0);
  for (const auto& e : ref) {
    if (e.class_index != class_index) continue;
    auto [a, b] = cells(e);
    for (int i = a; i < b; ++i) ref_cover[i] = 1;
  }
  Counts c;
  std::vector<int> valid_cover(static_cast<std::size_t>(total_ticks), 0);
  for (const auto& e : pred) {
    if (e.class_index != class_index) continue;
    auto [a, b] = cells(e);
    int hit = 0;
    for (int i = a; i < b; ++i) hit += ref_cover[i];
    if (hit >= dtc * (b - a)) {
      for (int i = a; i < b; ++i) valid_cover[i] = 1;
    } else {
      ++c.fp;
    }
  }
  for (const auto& e : ref) {
    if (e.class_index != class_index) continue;
    auto [a, b] = cells(e);
    int hit = 0;
    for (int i = a; i < b; ++i) hit += valid_cover[i];
    if (hit >= gtc * (b - a)) {
      ++c.tp;
    } else {
      ++c.fn;
    }
  }
  return c;
}

inline std::vector<int> median_filter(const std::vector<int>& x, int size) {
  const int half = size / 2;
  const int len = static_cast<int>(x.size());
  std::vector<int> out(x.size());
  for (int t = 0; t < len; ++t) {
    std::vector<int> window;
    for (int k = t - half; k <= t + half; ++k) window.push_back(x[std::clamp(k, 0, len - 1)]);
    std::sort(window.begin(), window.end());
    out[t] = window[half];
  }
  return out;
}

}  // namespace oracle

#endif  // SOUNDTRIAGE_TESTS_ORACLES_H_
