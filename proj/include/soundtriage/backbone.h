// Copyright 2026 The soundtriage Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SOUNDTRIAGE_BACKBONE_H_
#define SOUNDTRIAGE_BACKBONE_H_

#include <array>
#include <span>
#include <vector>

#include "soundtriage/common.h"
#include "soundtriage/conditioning.h"
#include "soundtriage/dataio.h"
#include "soundtriage/params.h"

namespace soundtriage {

/// CRNN layout. Defaults are the published detector: three 64-channel 3x3
/// convolution blocks pooling time by 8, 2, 2 (frequency untouched), a
/// bidirectional GRU with 64 units per direction, a 32-unit dense layer and
/// one logit per class.
struct BackboneConfig {
  int n_mels = 64;
  int n_classes = 10;
  std::vector<int> channels{64, 64, 64};
  std::vector<int> time_pool{8, 2, 2};
  int gru_units = 64;
  int fc_units = 32;
  double leaky_slope = 0.01;

  void validate() const;
  /// Product of the time pooling factors.
  int time_reduction() const;
  /// Output frames for `frames` input frames (ceil division per block).
  int output_frames(int frames) const;
  /// Channel count shared by every block, which is the FiLM width.
  int film_channels() const { return channels.front(); }
};

struct PosteriorGrid {
  Matrix logits;         // classes x output frames
  Matrix probabilities;  // sigmoid(logits), clamped strictly inside (0, 1)
  double frame_hop_out = 0.0;

  static PosteriorGrid from_logits(Matrix logits, double frame_hop_out);
};

double sigmoid(double x);

class Backbone {
 public:
  explicit Backbone(BackboneConfig config);

  const BackboneConfig& config() const { return config_; }
  void initialize(Rng& rng);

  ParamBuffer& parameters() { return params_; }
  const ParamBuffer& parameters() const { return params_; }

  struct Trace;

  /// Logits (classes x output frames) for a frames x n_mels feature matrix.
  /// `film` may be null, which skips modulation entirely. When `trace` is
  /// given, intermediates are recorded for backward().
  Matrix forward_logits(const Matrix& features, const FilmParams* film, Trace* trace = nullptr) const;

  PosteriorGrid forward(const FeatureGrid& features, const FilmParams* film) const;

  /// Accumulates parameter gradients into `grad` and, when `film_grad` is
  /// non-null and a FiLM was applied, the gradient w.r.t. mu and sigma.
  void backward(const Trace& trace, const Matrix& dlogits, std::span<double> grad,
                FilmParams* film_grad) const;

  struct BlockTrace {
    int frames_in = 0;
    int frames_out = 0;
    Matrix cols;        // im2col of the block input
    Matrix pre;         // convolution output
    Matrix act;         // leaky rectifier output, before FiLM
    std::vector<Eigen::Index> argmax;  // pooled element -> source column
  };

  struct GruTrace {
    Matrix h_prev;  // H x T, state fed into each step
    Matrix r, z, n, hn;
    Matrix h;       // H x T outputs
  };

  struct Trace {
    std::vector<BlockTrace> blocks;
    Matrix seq;  // (C*F) x T_out, recurrent input
    std::array<GruTrace, 2> gru;
    Matrix hcat;
    Matrix fc_pre;
    Matrix fc_out;
    FilmParams film;
    bool has_film = false;
  };

 private:
  struct ConvBlock {
    ParamBlock weight;  // C_out x (C_in * 9)
    ParamBlock bias;
  };
  struct GruParams {
    ParamBlock wx;  // 3H x D, rows ordered reset, update, candidate
    ParamBlock bx;
    ParamBlock wh;  // 3H x H
    ParamBlock bh;
  };

  void run_gru(const GruParams& p, const Matrix& seq, bool reverse, GruTrace& out) const;
  void backprop_gru(const GruParams& p, const Matrix& seq, bool reverse, const GruTrace& tr,
                    const Matrix& dh_out, std::span<double> grad, Matrix& dseq) const;

  BackboneConfig config_;
  ParamLayout layout_;
  std::vector<ConvBlock> conv_;
  std::array<GruParams, 2> gru_;
  ParamBlock fc_w_, fc_b_, out_w_, out_b_;
  ParamBuffer params_;
};

}  // namespace soundtriage

#endif  // SOUNDTRIAGE_BACKBONE_H_
