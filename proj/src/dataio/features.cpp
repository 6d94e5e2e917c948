// Copyright 2026 The soundtriage Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

#include <fftw3.h>

#include "soundtriage/dataio.h"

namespace soundtriage {
namespace {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// Real-to-complex transform of a fixed size. FFTW_ESTIMATE keeps plan
// selection deterministic.
class RealFft {
 public:
  explicit RealFft(int n) : n_(n) {
    in_ = static_cast<double*>(fftw_malloc(sizeof(double) * n));
    out_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)));
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan_ = fftw_plan_dft_r2c_1d(n, in_, out_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan_);
    fftw_free(in_);
    fftw_free(out_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  double* input() { return in_; }
  void power_spectrum(Eigen::Ref<Vector> power) {
    fftw_execute(plan_);
    for (int k = 0; k <= n_ / 2; ++k) {
      power[k] = out_[k][0] * out_[k][0] + out_[k][1] * out_[k][1];
    }
  }

 private:
  static std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
  }

  int n_;
  double* in_;
  fftw_complex* out_;
  fftw_plan plan_;
};

}  // namespace

void FeatureConfig::validate() const {
  if (sample_rate <= 0) throw ConfigError("sample_rate must be positive");
  if (!(window > 0.0) || !(hop > 0.0)) throw ConfigError("window and hop must be positive");
  if (hop > window) throw ConfigError("hop must not exceed window");
  if (n_mels < 1) throw ConfigError("n_mels must be >= 1");
  if (!(log_floor > 0.0)) throw ConfigError("log_floor must be > 0");
  if (hop_samples() < 1) throw ConfigError("hop is shorter than one sample");
  const double top = fmax > 0.0 ? fmax : sample_rate / 2.0;
  if (fmin < 0.0 || top <= fmin || top > sample_rate / 2.0)
    throw ConfigError("mel range must satisfy 0 <= fmin < fmax <= sample_rate/2");
}

int FeatureConfig::window_samples() const {
  return static_cast<int>(std::lround(window * sample_rate));
}

int FeatureConfig::hop_samples() const { return static_cast<int>(std::lround(hop * sample_rate)); }

int FeatureConfig::fft_size() const {
  int n = 1;
  while (n < window_samples()) n <<= 1;
  return n;
}

int FeatureConfig::frame_count(std::size_t n_samples) const {
  const auto win = static_cast<std::size_t>(window_samples());
  if (n_samples < win) return 0;
  return static_cast<int>((n_samples - win) / hop_samples()) + 1;
}

Matrix mel_filterbank(const FeatureConfig& config) {
  config.validate();
  const int n_fft = config.fft_size();
  const int n_bins = n_fft / 2 + 1;
  const double top = config.fmax > 0.0 ? config.fmax : config.sample_rate / 2.0;
  const double mel_lo = hz_to_mel(config.fmin);
  const double mel_hi = hz_to_mel(top);

  std::vector<double> edges(config.n_mels + 2);
  for (int i = 0; i < config.n_mels + 2; ++i) {
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (config.n_mels + 1));
  }
  Matrix fb = Matrix::Zero(config.n_mels, n_bins);
  for (int m = 0; m < config.n_mels; ++m) {
    const double left = edges[m];
    const double center = edges[m + 1];
    const double right = edges[m + 2];
    for (int k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * config.sample_rate / n_fft;
      if (f > left && f < right) {
        fb(m, k) = f <= center ? (f - left) / (center - left) : (right - f) / (right - center);
      }
    }
  }
  return fb;
}

FeatureGrid extract_logmel(std::span<const double> waveform, const FeatureConfig& config) {
  config.validate();
  const int win = config.window_samples();
  const int hop = config.hop_samples();
  if (waveform.size() < static_cast<std::size_t>(win)) {
    throw ConfigError("waveform has " + std::to_string(waveform.size()) +
                      " samples; at least " + std::to_string(win) +
                      " (one analysis window) are required");
  }
  const int n_frames = config.frame_count(waveform.size());
  const int n_fft = config.fft_size();
  const Matrix fb = mel_filterbank(config);

  Vector hann(win);
  for (int i = 0; i < win; ++i) {
    hann[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / win);
  }

  RealFft fft(n_fft);
  Matrix power(n_fft / 2 + 1, n_frames);
  for (int t = 0; t < n_frames; ++t) {
    double* in = fft.input();
    const std::size_t start = static_cast<std::size_t>(t) * hop;
    for (int i = 0; i < win; ++i) in[i] = waveform[start + i] * hann[i];
    std::fill(in + win, in + n_fft, 0.0);
    fft.power_spectrum(power.col(t));
  }

  FeatureGrid grid;
  grid.frame_hop = config.hop;
  grid.values = (fb * power).transpose();
  grid.values = (grid.values.array() + config.log_floor).log().matrix();
  return grid;
}

}  // namespace soundtriage
