// Copyright 2026 The soundtriage Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SOUNDTRIAGE_DATAIO_H_
#define SOUNDTRIAGE_DATAIO_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "soundtriage/common.h"

namespace soundtriage {

/// One labelled or detected occurrence of an event class, in seconds.
struct EventInstance {
  int class_index = 0;
  double onset = 0.0;
  double offset = 0.0;

  bool operator==(const EventInstance&) const = default;
};

struct ClipAnnotation {
  std::string clip_id;
  double duration = 0.0;
  std::vector<EventInstance> events;

  /// Throws ConfigError unless 0 <= onset < offset <= duration and
  /// class_index < n_classes for every event.
  void validate(int n_classes) const;

  bool operator==(const ClipAnnotation&) const = default;
};

struct Clip {
  std::vector<double> waveform;
  ClipAnnotation annotation;
};

struct SynthConfig {
  int n_clips = 0;
  int n_classes = 5;
  double duration = 10.0;
  std::uint64_t seed = 0;
  int sample_rate = 16000;
  // Events per clip are drawn uniformly from [min_events, max_events].
  int min_events = 1;
  int max_events = 4;
  double min_event_length = 0.5;
  double max_event_length = 2.5;
  // Background white-noise amplitude.
  double noise_level = 0.01;
  // Peak gain per class; empty selects synth_class_gain.
  std::vector<double> class_gains;
  // Relative event frequency per class. Empty draws classes uniformly and
  // guarantees clip i contains class i % n_classes.
  std::vector<double> class_rates;

  void validate() const;
};

/// Per-class gain applied by the synthesizer. Later classes are quieter so
/// the toy set has an easy and a hard end.
double synth_class_gain(int class_index, int n_classes);
double synth_class_gain(const SynthConfig& config, int class_index);

/// Deterministic synthetic soundscapes. Each class owns a disjoint frequency
/// band and a distinct temporal pattern. With default class rates clip i
/// always contains class i % n_classes, so every class occurs once
/// n_clips >= n_classes. Samples
/// are quantized to the 16-bit PCM grid so a wav round trip is lossless.
std::vector<Clip> synthesize_dataset(const SynthConfig& config);

std::vector<std::string> default_class_names(int n_classes);

struct FeatureConfig {
  int sample_rate = 44100;
  double window = 0.04;
  double hop = 0.02;
  int n_mels = 64;
  double log_floor = 1e-10;
  double fmin = 0.0;
  double fmax = 0.0;  // 0 selects the Nyquist frequency

  void validate() const;
  int window_samples() const;
  int hop_samples() const;
  int fft_size() const;
  /// floor((n_samples - window) / hop) + 1, or 0 when too short.
  int frame_count(std::size_t n_samples) const;
};

struct FeatureGrid {
  Matrix values;  // frames x mel bands
  double frame_hop = 0.0;

  int frames() const { return static_cast<int>(values.rows()); }
  int bands() const { return static_cast<int>(values.cols()); }
};

/// Log mel energies, log(mel + log_floor), from a Hann-windowed power
/// spectrum with an HTK-scale triangular filterbank.
FeatureGrid extract_logmel(std::span<const double> waveform, const FeatureConfig& config);

/// Triangular mel weights, n_mels x (fft_size / 2 + 1).
Matrix mel_filterbank(const FeatureConfig& config);

struct EventRoll {
  BinaryMatrix active;  // classes x frames, entries 0/1
  double frame_hop = 0.0;

  int classes() const { return static_cast<int>(active.rows()); }
  int frames() const { return static_cast<int>(active.cols()); }
};

/// Frame t of class n is active iff [t*hop, (t+1)*hop) overlaps an event of
/// class n.
EventRoll rasterize(const ClipAnnotation& annotation, int n_frames, double frame_hop,
                    int n_classes);

/// Max over consecutive windows of `factor` frames; the last window may be
/// partial. The output hop is frame_hop * factor.
EventRoll pool_labels(const EventRoll& roll, int factor);

// ---------------------------------------------------------------------------
// Dataset directory layout:
//   clips/<clip_id>.wav   PCM 16-bit mono
//   annotations.jsonl     one ClipAnnotation object per line
//   classes.json          array of class names, index = class_index

void write_wav(const std::filesystem::path& path, std::span<const double> samples,
               int sample_rate);
std::vector<double> read_wav(const std::filesystem::path& path, int* sample_rate = nullptr);

std::string annotation_to_jsonl(const ClipAnnotation& annotation);
ClipAnnotation annotation_from_jsonl(const std::string& line);
void write_annotations(const std::filesystem::path& path,
                       const std::vector<ClipAnnotation>& annotations);
std::vector<ClipAnnotation> read_annotations(const std::filesystem::path& path);

void write_class_names(const std::filesystem::path& path, const std::vector<std::string>& names);
std::vector<std::string> read_class_names(const std::filesystem::path& path);

struct Dataset {
  std::vector<std::string> class_names;
  std::vector<Clip> clips;
  int sample_rate = 0;

  int n_classes() const { return static_cast<int>(class_names.size()); }
};

void save_dataset(const std::filesystem::path& dir, const Dataset& dataset);
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace soundtriage

#endif  // SOUNDTRIAGE_DATAIO_H_
