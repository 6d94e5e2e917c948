// Copyright 2026 The soundtriage Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "soundtriage/dataio.h"

namespace soundtriage {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kRamp = 0.01;
constexpr double kPcmScale = 32767.0;

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

struct Band {
  double low;
  double high;
  double center() const { return std::sqrt(low * high); }
};

// Inner half of the c-th of n equal mel segments between 150 Hz and 0.9 Nyquist.
Band class_band(int c, int n, int sample_rate) {
  const double lo = hz_to_mel(150.0);
  const double hi = hz_to_mel(0.45 * sample_rate);
  const double step = (hi - lo) / n;
  const double a = lo + step * (c + 0.25);
  const double b = lo + step * (c + 0.75);
  return {mel_to_hz(a), mel_to_hz(b)};
}

void render_event(std::vector<double>& out, const EventInstance& ev, const SynthConfig& config,
                  Rng& rng) {
  const int sample_rate = config.sample_rate;
  const Band band = class_band(ev.class_index, config.n_classes, sample_rate);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double gain = synth_class_gain(config, ev.class_index) * (0.5 + 0.5 * unit(rng));

  const auto begin = static_cast<std::size_t>(std::llround(ev.onset * sample_rate));
  const auto end = std::min(out.size(), static_cast<std::size_t>(std::llround(ev.offset * sample_rate)));
  const double length = static_cast<double>(end - begin) / sample_rate;

  // Band noise is a fixed bank of random-phase partials inside the band.
  std::vector<double> freqs;
  std::vector<double> phases;
  const int kind = ev.class_index % 4;
  const int partials = kind == 1 ? 12 : 2;
  for (int k = 0; k < partials; ++k) {
    freqs.push_back(band.low + (band.high - band.low) * unit(rng));
    phases.push_back(kTwoPi * unit(rng));
  }
  const double phase0 = kTwoPi * unit(rng);

  double chirp_phase = phase0;
  for (std::size_t i = begin; i < end; ++i) {
    const double t = static_cast<double>(i - begin) / sample_rate;
    double v = 0.0;
    switch (kind) {
      case 0:  // steady pair of tones
        v = 0.7 * std::sin(kTwoPi * band.center() * t + phase0) +
            0.3 * std::sin(kTwoPi * band.high * 0.95 * t + phases[0]);
        break;
      case 1:  // band-limited noise
        for (std::size_t k = 0; k < freqs.size(); ++k) {
          v += std::sin(kTwoPi * freqs[k] * t + phases[k]);
        }
        v /= std::sqrt(static_cast<double>(freqs.size()));
        break;
      case 2: {  // tone gated at 5 Hz
        const double gate = 0.5 - 0.5 * std::cos(kTwoPi * 5.0 * t);
        v = gate * std::sin(kTwoPi * band.center() * t + phase0);
        break;
      }
      default: {  // sawtooth chirp across the band, 4 sweeps per second
        const double frac = std::fmod(4.0 * t, 1.0);
        const double f = band.low + (band.high - band.low) * frac;
        chirp_phase += kTwoPi * f / sample_rate;
        v = std::sin(chirp_phase);
        break;
      }
    }
    const double edge = std::min(t, length - t);
    const double env = edge >= kRamp ? 1.0 : 0.5 - 0.5 * std::cos(std::numbers::pi * edge / kRamp);
    out[i] += gain * env * v;
  }
}

double round_ms(double seconds) { return std::round(seconds * 1000.0) / 1000.0; }

}  // namespace

void SynthConfig::validate() const {
  if (n_clips < 0) throw ConfigError("n_clips must be >= 0, got " + std::to_string(n_clips));
  if (n_classes < 1) throw ConfigError("n_classes must be >= 1, got " + std::to_string(n_classes));
  if (!(duration > 0.0)) throw ConfigError("duration must be > 0 seconds");
  if (sample_rate < 1000) throw ConfigError("sample_rate must be >= 1000 Hz");
  if (min_events < 1 || max_events < min_events)
    throw ConfigError("event count range must satisfy 1 <= min_events <= max_events");
  if (!(min_event_length > 0.0) || max_event_length < min_event_length)
    throw ConfigError("event length range must satisfy 0 < min <= max");
  if (noise_level < 0.0) throw ConfigError("noise_level must be >= 0");
  if (!class_rates.empty()) {
    if (static_cast<int>(class_rates.size()) != n_classes)
      throw ConfigError("class_rates needs one entry per class");
    double total = 0.0;
    for (double r : class_rates) {
      if (!(r >= 0.0) || !std::isfinite(r)) throw ConfigError("class rates must be finite and >= 0");
      total += r;
    }
    if (!(total > 0.0)) throw ConfigError("class rates must not all be zero");
  }
  if (!class_gains.empty()) {
    if (static_cast<int>(class_gains.size()) != n_classes)
      throw ConfigError("class_gains needs one entry per class");
    for (double g : class_gains) {
      if (!(g >= 0.0) || !std::isfinite(g)) throw ConfigError("class gains must be finite and >= 0");
    }
  }
}

double synth_class_gain(int class_index, int n_classes) {
  if (n_classes < 2) return 0.25;
  return 0.25 * (1.0 - 0.6 * class_index / (n_classes - 1.0));
}

double synth_class_gain(const SynthConfig& config, int class_index) {
  if (config.class_gains.empty()) return synth_class_gain(class_index, config.n_classes);
  return config.class_gains.at(static_cast<std::size_t>(class_index));
}

std::vector<Clip> synthesize_dataset(const SynthConfig& config) {
  config.validate();
  Rng rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> count_dist(config.min_events, config.max_events);
  std::uniform_int_distribution<int> class_dist(0, config.n_classes - 1);
  std::discrete_distribution<int> rate_dist(config.class_rates.begin(), config.class_rates.end());

  const auto n_samples = static_cast<std::size_t>(std::llround(config.duration * config.sample_rate));
  std::vector<Clip> clips;
  clips.reserve(config.n_clips);
  for (int i = 0; i < config.n_clips; ++i) {
    Clip clip;
    char id[32];
    std::snprintf(id, sizeof(id), "clip_%05d", i);
    clip.annotation.clip_id = id;
    clip.annotation.duration = config.duration;

    const int n_events = count_dist(rng);
    for (int e = 0; e < n_events; ++e) {
      EventInstance ev;
      if (!config.class_rates.empty()) {
        ev.class_index = rate_dist(rng);
      } else {
        ev.class_index = e == 0 ? i % config.n_classes : class_dist(rng);
      }
      const double max_len = std::min(config.max_event_length, config.duration);
      const double min_len = std::min(config.min_event_length, max_len);
      const double len = min_len + (max_len - min_len) * unit(rng);
      ev.onset = round_ms((config.duration - len) * unit(rng));
      ev.offset = std::min(config.duration, round_ms(ev.onset + len));
      if (ev.offset <= ev.onset) ev.offset = std::min(config.duration, ev.onset + 0.001);
      clip.annotation.events.push_back(ev);
    }
    std::sort(clip.annotation.events.begin(), clip.annotation.events.end(),
              [](const EventInstance& a, const EventInstance& b) {
                return a.onset != b.onset ? a.onset < b.onset : a.class_index < b.class_index;
              });

    clip.waveform.assign(n_samples, 0.0);
    for (const auto& ev : clip.annotation.events) {
      render_event(clip.waveform, ev, config, rng);
    }
    for (double& s : clip.waveform) {
      s += config.noise_level * (2.0 * unit(rng) - 1.0);
      s = std::clamp(s, -1.0, 1.0);
      s = std::round(s * kPcmScale) / kPcmScale;
    }
    clips.push_back(std::move(clip));
  }
  return clips;
}

std::vector<std::string> default_class_names(int n_classes) {
  std::vector<std::string> names;
  for (int c = 0; c < n_classes; ++c) names.push_back("class_" + std::to_string(c));
  return names;
}

}  // namespace soundtriage
