// Copyright 2026 The soundtriage Authors
// SPDX-License-Identifier: Apache-2.0

#include "soundtriage/backbone.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace soundtriage {
namespace {

constexpr int kKernel = 3;
constexpr int kTaps = kKernel * kKernel;

// (C_in * 9) x (T * F) patch matrix for a 3x3 same-padded convolution.
Matrix im2col(const Matrix& in, int frames, int bands) {
  const Eigen::Index channels = in.rows();
  Matrix cols = Matrix::Zero(channels * kTaps, static_cast<Eigen::Index>(frames) * bands);
  for (Eigen::Index c = 0; c < channels; ++c) {
    for (int kt = 0; kt < kKernel; ++kt) {
      for (int kf = 0; kf < kKernel; ++kf) {
        const Eigen::Index row = c * kTaps + kt * kKernel + kf;
        for (int t = 0; t < frames; ++t) {
          const int st = t + kt - 1;
          if (st < 0 || st >= frames) continue;
          for (int f = 0; f < bands; ++f) {
            const int sf = f + kf - 1;
            if (sf < 0 || sf >= bands) continue;
            cols(row, static_cast<Eigen::Index>(t) * bands + f) =
                in(c, static_cast<Eigen::Index>(st) * bands + sf);
          }
        }
      }
    }
  }
  return cols;
}

Matrix col2im(const Matrix& cols, Eigen::Index channels, int frames, int bands) {
  Matrix out = Matrix::Zero(channels, static_cast<Eigen::Index>(frames) * bands);
  for (Eigen::Index c = 0; c < channels; ++c) {
    for (int kt = 0; kt < kKernel; ++kt) {
      for (int kf = 0; kf < kKernel; ++kf) {
        const Eigen::Index row = c * kTaps + kt * kKernel + kf;
        for (int t = 0; t < frames; ++t) {
          const int st = t + kt - 1;
          if (st < 0 || st >= frames) continue;
          for (int f = 0; f < bands; ++f) {
            const int sf = f + kf - 1;
            if (sf < 0 || sf >= bands) continue;
            out(c, static_cast<Eigen::Index>(st) * bands + sf) +=
                cols(row, static_cast<Eigen::Index>(t) * bands + f);
          }
        }
      }
    }
  }
  return out;
}

void fill_uniform(Eigen::Map<Matrix> m, double bound, Rng& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = dist(rng);
  }
}

}  // namespace

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

PosteriorGrid PosteriorGrid::from_logits(Matrix logits, double frame_hop_out) {
  constexpr double kLow = std::numeric_limits<double>::denorm_min();
  const double high = std::nextafter(1.0, 0.0);
  PosteriorGrid g;
  g.probabilities = logits.unaryExpr([&](double v) { return std::clamp(sigmoid(v), kLow, high); });
  g.logits = std::move(logits);
  g.frame_hop_out = frame_hop_out;
  return g;
}

void BackboneConfig::validate() const {
  if (n_mels < 1) throw ConfigError("backbone n_mels must be >= 1");
  if (n_classes < 1) throw ConfigError("backbone n_classes must be >= 1");
  if (channels.empty() || channels.size() != time_pool.size()) {
    throw ConfigError("backbone needs one pooling factor per convolution block");
  }
  for (int c : channels) {
    if (c != channels.front()) {
      throw ConfigError("all convolution blocks must share one channel count (shared FiLM)");
    }
  }
  if (channels.front() < 1) throw ConfigError("channel count must be >= 1");
  for (int p : time_pool) {
    if (p < 1) throw ConfigError("pooling factors must be >= 1");
  }
  if (gru_units < 1 || fc_units < 1) throw ConfigError("GRU and FC widths must be >= 1");
}

int BackboneConfig::time_reduction() const {
  int r = 1;
  for (int p : time_pool) r *= p;
  return r;
}

int BackboneConfig::output_frames(int frames) const {
  for (int p : time_pool) frames = (frames + p - 1) / p;
  return frames;
}

Backbone::Backbone(BackboneConfig config) : config_(std::move(config)) {
  config_.validate();
  int c_in = 1;
  for (int c_out : config_.channels) {
    conv_.push_back({layout_.add(c_out, static_cast<Eigen::Index>(c_in) * kTaps), layout_.add(c_out, 1)});
    c_in = c_out;
  }
  const Eigen::Index seq_dim = static_cast<Eigen::Index>(c_in) * config_.n_mels;
  const Eigen::Index h = config_.gru_units;
  for (auto& g : gru_) {
    g.wx = layout_.add(3 * h, seq_dim);
    g.bx = layout_.add(3 * h, 1);
    g.wh = layout_.add(3 * h, h);
    g.bh = layout_.add(3 * h, 1);
  }
  fc_w_ = layout_.add(config_.fc_units, 2 * h);
  fc_b_ = layout_.add(config_.fc_units, 1);
  out_w_ = layout_.add(config_.n_classes, config_.fc_units);
  out_b_ = layout_.add(config_.n_classes, 1);
  params_.assign(layout_.size(), 0.0);
}

void Backbone::initialize(Rng& rng) {
  std::fill(params_.begin(), params_.end(), 0.0);
  for (const auto& b : conv_) {
    fill_uniform(view(params_, b.weight), std::sqrt(6.0 / static_cast<double>(b.weight.cols)), rng);
  }
  const double hb = 1.0 / std::sqrt(static_cast<double>(config_.gru_units));
  for (const auto& g : gru_) {
    fill_uniform(view(params_, g.wx), std::sqrt(3.0 / static_cast<double>(g.wx.cols)), rng);
    fill_uniform(view(params_, g.wh), hb, rng);
  }
  fill_uniform(view(params_, fc_w_), std::sqrt(6.0 / static_cast<double>(fc_w_.cols)), rng);
  fill_uniform(view(params_, out_w_), std::sqrt(3.0 / static_cast<double>(out_w_.cols)), rng);
}

void Backbone::run_gru(const GruParams& p, const Matrix& seq, bool reverse, GruTrace& out) const {
  const std::span<const double> params(params_);
  const Eigen::Index h = config_.gru_units;
  const Eigen::Index steps = seq.cols();
  Matrix gx = view(params, p.wx) * seq;
  gx.colwise() += view(params, p.bx).col(0);
  const auto wh = view(params, p.wh);
  const auto bh = view(params, p.bh).col(0);

  out.h_prev.resize(h, steps);
  out.r.resize(h, steps);
  out.z.resize(h, steps);
  out.n.resize(h, steps);
  out.hn.resize(h, steps);
  out.h.resize(h, steps);

  Vector state = Vector::Zero(h);
  for (Eigen::Index s = 0; s < steps; ++s) {
    const Eigen::Index t = reverse ? steps - 1 - s : s;
    const Vector gh = wh * state + bh;
    out.h_prev.col(t) = state;
    for (Eigen::Index i = 0; i < h; ++i) {
      const double r = sigmoid(gx(i, t) + gh[i]);
      const double z = sigmoid(gx(h + i, t) + gh[h + i]);
      const double hn = gh[2 * h + i];
      const double n = std::tanh(gx(2 * h + i, t) + r * hn);
      out.r(i, t) = r;
      out.z(i, t) = z;
      out.hn(i, t) = hn;
      out.n(i, t) = n;
      state[i] = (1.0 - z) * n + z * state[i];
    }
    out.h.col(t) = state;
  }
}

void Backbone::backprop_gru(const GruParams& p, const Matrix& seq, bool reverse,
                            const GruTrace& tr, const Matrix& dh_out, std::span<double> grad,
                            Matrix& dseq) const {
  const std::span<const double> params(params_);
  const Eigen::Index h = config_.gru_units;
  const Eigen::Index steps = seq.cols();
  const auto wh = view(params, p.wh);
  Matrix dgx(3 * h, steps);
  Matrix dgh(3 * h, steps);
  Vector dnext = Vector::Zero(h);
  for (Eigen::Index s = steps; s-- > 0;) {
    const Eigen::Index t = reverse ? steps - 1 - s : s;
    for (Eigen::Index i = 0; i < h; ++i) {
      const double dh = dh_out(i, t) + dnext[i];
      const double r = tr.r(i, t), z = tr.z(i, t), n = tr.n(i, t), hn = tr.hn(i, t);
      const double hp = tr.h_prev(i, t);
      const double dn = dh * (1.0 - z);
      const double dz = dh * (hp - n);
      const double dan = dn * (1.0 - n * n);
      const double dar = dan * hn * r * (1.0 - r);
      const double daz = dz * z * (1.0 - z);
      dgx(i, t) = dar;
      dgx(h + i, t) = daz;
      dgx(2 * h + i, t) = dan;
      dgh(i, t) = dar;
      dgh(h + i, t) = daz;
      dgh(2 * h + i, t) = dan * r;
      dnext[i] = dh * z;
    }
    dnext.noalias() += wh.transpose() * dgh.col(t);
  }
  view(grad, p.wh).noalias() += dgh * tr.h_prev.transpose();
  view(grad, p.bh).col(0) += dgh.rowwise().sum();
  view(grad, p.wx).noalias() += dgx * seq.transpose();
  view(grad, p.bx).col(0) += dgx.rowwise().sum();
  dseq.noalias() += view(params, p.wx).transpose() * dgx;
}

Matrix Backbone::forward_logits(const Matrix& features, const FilmParams* film,
                                Trace* trace) const {
  const std::span<const double> params(params_);
  const int bands = config_.n_mels;
  require_shape(features.cols() == bands, "features have " + std::to_string(features.cols()) +
                                              " mel bands, backbone expects " +
                                              std::to_string(bands));
  require_shape(features.rows() >= 1, "features have no frames");
  if (film) {
    require_shape(film->channels() == config_.film_channels() &&
                      film->sigma.size() == film->mu.size(),
                  "FiLM width " + std::to_string(film->channels()) + " != backbone channels " +
                      std::to_string(config_.film_channels()));
  }

  Trace local;
  Trace& tr = trace ? *trace : local;
  tr.blocks.assign(conv_.size(), {});
  tr.has_film = film != nullptr;
  if (film) tr.film = *film;

  int frames = static_cast<int>(features.rows());
  // Single input channel, time-major: column t * F + f.
  Matrix map = features.transpose();
  map.resize(1, features.size());

  for (std::size_t l = 0; l < conv_.size(); ++l) {
    BlockTrace& bt = tr.blocks[l];
    bt.frames_in = frames;
    bt.cols = im2col(map, frames, bands);
    bt.pre = view(params, conv_[l].weight) * bt.cols;
    bt.pre.colwise() += view(params, conv_[l].bias).col(0);
    bt.act = bt.pre.unaryExpr([this](double v) { return leaky(v, config_.leaky_slope); });
    const Matrix* pooled_src = &bt.act;
    Matrix filmed;
    if (film) {
      filmed = apply_film(bt.act, *film);
      pooled_src = &filmed;
    }

    const int pool = config_.time_pool[l];
    const int out_frames = (frames + pool - 1) / pool;
    const Eigen::Index channels = bt.act.rows();
    Matrix pooled(channels, static_cast<Eigen::Index>(out_frames) * bands);
    bt.argmax.assign(static_cast<std::size_t>(pooled.size()), 0);
    for (int to = 0; to < out_frames; ++to) {
      const int t0 = to * pool;
      const int t1 = std::min(frames, t0 + pool);
      for (int f = 0; f < bands; ++f) {
        const Eigen::Index dst = static_cast<Eigen::Index>(to) * bands + f;
        for (Eigen::Index c = 0; c < channels; ++c) {
          Eigen::Index best = static_cast<Eigen::Index>(t0) * bands + f;
          for (int t = t0 + 1; t < t1; ++t) {
            const Eigen::Index src = static_cast<Eigen::Index>(t) * bands + f;
            if ((*pooled_src)(c, src) > (*pooled_src)(c, best)) best = src;
          }
          pooled(c, dst) = (*pooled_src)(c, best);
          bt.argmax[static_cast<std::size_t>(dst * channels + c)] = best;
        }
      }
    }
    bt.frames_out = out_frames;
    frames = out_frames;
    map = std::move(pooled);
  }

  // Flatten channels x bands per time step.
  const Eigen::Index channels = map.rows();
  tr.seq.resize(channels * bands, frames);
  for (int t = 0; t < frames; ++t) {
    for (Eigen::Index c = 0; c < channels; ++c) {
      for (int f = 0; f < bands; ++f) {
        tr.seq(c * bands + f, t) = map(c, static_cast<Eigen::Index>(t) * bands + f);
      }
    }
  }

  run_gru(gru_[0], tr.seq, false, tr.gru[0]);
  run_gru(gru_[1], tr.seq, true, tr.gru[1]);
  const Eigen::Index h = config_.gru_units;
  tr.hcat.resize(2 * h, frames);
  tr.hcat.topRows(h) = tr.gru[0].h;
  tr.hcat.bottomRows(h) = tr.gru[1].h;

  tr.fc_pre = view(params, fc_w_) * tr.hcat;
  tr.fc_pre.colwise() += view(params, fc_b_).col(0);
  tr.fc_out = tr.fc_pre.unaryExpr([this](double v) { return leaky(v, config_.leaky_slope); });
  Matrix logits = view(params, out_w_) * tr.fc_out;
  logits.colwise() += view(params, out_b_).col(0);
  return logits;
}

PosteriorGrid Backbone::forward(const FeatureGrid& features, const FilmParams* film) const {
  return PosteriorGrid::from_logits(forward_logits(features.values, film),
                                    features.frame_hop * config_.time_reduction());
}

void Backbone::backward(const Trace& tr, const Matrix& dlogits, std::span<double> grad,
                        FilmParams* film_grad) const {
  const std::span<const double> params(params_);
  require_shape(grad.size() == params_.size(), "backbone gradient buffer has wrong size");
  require_shape(dlogits.rows() == config_.n_classes && dlogits.cols() == tr.fc_out.cols(),
                "logit gradient shape does not match the traced forward pass");
  const double slope = config_.leaky_slope;
  const int bands = config_.n_mels;

  view(grad, out_w_).noalias() += dlogits * tr.fc_out.transpose();
  view(grad, out_b_).col(0) += dlogits.rowwise().sum();
  Matrix dfc = view(params, out_w_).transpose() * dlogits;
  for (Eigen::Index j = 0; j < dfc.cols(); ++j) {
    for (Eigen::Index i = 0; i < dfc.rows(); ++i) dfc(i, j) *= leaky_grad(tr.fc_pre(i, j), slope);
  }
  view(grad, fc_w_).noalias() += dfc * tr.hcat.transpose();
  view(grad, fc_b_).col(0) += dfc.rowwise().sum();
  const Matrix dhcat = view(params, fc_w_).transpose() * dfc;

  const Eigen::Index h = config_.gru_units;
  Matrix dseq = Matrix::Zero(tr.seq.rows(), tr.seq.cols());
  backprop_gru(gru_[0], tr.seq, false, tr.gru[0], dhcat.topRows(h), grad, dseq);
  backprop_gru(gru_[1], tr.seq, true, tr.gru[1], dhcat.bottomRows(h), grad, dseq);

  const int frames = static_cast<int>(tr.seq.cols());
  const Eigen::Index channels = config_.film_channels();
  Matrix dmap(channels, static_cast<Eigen::Index>(frames) * bands);
  for (int t = 0; t < frames; ++t) {
    for (Eigen::Index c = 0; c < channels; ++c) {
      for (int f = 0; f < bands; ++f) {
        dmap(c, static_cast<Eigen::Index>(t) * bands + f) = dseq(c * bands + f, t);
      }
    }
  }

  if (film_grad && tr.has_film) {
    film_grad->mu = Vector::Zero(channels);
    film_grad->sigma = Vector::Zero(channels);
  }

  for (std::size_t l = conv_.size(); l-- > 0;) {
    const BlockTrace& bt = tr.blocks[l];
    Matrix dact = Matrix::Zero(bt.act.rows(), bt.act.cols());
    for (Eigen::Index k = 0; k < dmap.cols(); ++k) {
      for (Eigen::Index c = 0; c < dmap.rows(); ++c) {
        dact(c, bt.argmax[static_cast<std::size_t>(k * dmap.rows() + c)]) += dmap(c, k);
      }
    }
    if (tr.has_film) {
      if (film_grad) {
        film_grad->mu += dact.rowwise().sum();
        film_grad->sigma += dact.cwiseProduct(bt.act).rowwise().sum();
      }
      for (Eigen::Index c = 0; c < dact.rows(); ++c) dact.row(c) *= tr.film.sigma[c];
    }
    for (Eigen::Index j = 0; j < dact.cols(); ++j) {
      for (Eigen::Index i = 0; i < dact.rows(); ++i) dact(i, j) *= leaky_grad(bt.pre(i, j), slope);
    }
    view(grad, conv_[l].weight).noalias() += dact * bt.cols.transpose();
    view(grad, conv_[l].bias).col(0) += dact.rowwise().sum();
    if (l == 0) break;
    const Matrix dcols = view(params, conv_[l].weight).transpose() * dact;
    dmap = col2im(dcols, dcols.rows() / kTaps, bt.frames_in, bands);
  }
}

}  // namespace soundtriage
