// Copyright 2026 The spr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SPR_MODEL_HPP
#define SPR_MODEL_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "encoder.hpp"
#include "error.hpp"
#include "loss.hpp"
#include "rng.hpp"

namespace spr {

// A deliberately small stride-1 convolutional trunk standing in for a full
// encoder-decoder backbone: the representation and the two-head structure
// are what is under test here, not backbone capacity. Templated on the
// scalar so training runs in float while gradient checks run in double.

template <typename S>
struct ConvLayer {
  int in_ch = 0;
  int out_ch = 0;
  int ksize = 1;  // 1 or 3; stride 1, zero padding ksize/2 keeps dims
  std::vector<S> w;  // [out_ch][in_ch][ksize][ksize]
  std::vector<S> b;  // [out_ch]
};

template <typename S>
struct ToyStage {
  ConvLayer<S> conv1, conv2, conv3;  // 3x3 trunk, rectified
  ConvLayer<S> head_conf;            // 1x1 -> 1 channel, sigmoid
  ConvLayer<S> head_disp;            // 1x1 -> dim*k channels, linear
};

template <typename S>
struct ToyRegressor {
  int t = 2;            // stage count; stage inputs chain through the trunk
  int in_channels = 3;  // image channels
  int k = 0;
  int dim = 2;
  std::vector<ToyStage<S>> stages;
};

inline constexpr int kTrunkWidth1 = 16;
inline constexpr int kTrunkWidth2 = 32;
inline constexpr int kTrunkWidth3 = 32;

namespace detail {

template <typename S>
ConvLayer<S> make_layer(int in_ch, int out_ch, int ksize, SplitMix64& rng) {
  ConvLayer<S> layer;
  layer.in_ch = in_ch;
  layer.out_ch = out_ch;
  layer.ksize = ksize;
  layer.w.resize(size_t(out_ch) * in_ch * ksize * ksize);
  layer.b.assign(out_ch, S(0));
  const double fan_in = double(in_ch) * ksize * ksize;
  const double fan_out = double(out_ch) * ksize * ksize;
  const double a = std::sqrt(6.0 / (fan_in + fan_out));
  for (S& v : layer.w) v = static_cast<S>(rng.uniform(-a, a));
  return layer;
}

template <typename S>
ConvLayer<S> zero_like(const ConvLayer<S>& layer) {
  ConvLayer<S> g;
  g.in_ch = layer.in_ch;
  g.out_ch = layer.out_ch;
  g.ksize = layer.ksize;
  g.w.assign(layer.w.size(), S(0));
  g.b.assign(layer.b.size(), S(0));
  return g;
}

// out[o][y][x] = b[o] + sum over (ci,ky,kx) of w * in[ci][y+ky-pad][x+kx-pad]
template <typename S>
void conv_forward(const std::vector<S>& in, int h, int w,
                  const ConvLayer<S>& layer, std::vector<S>& out) {
  const int ks = layer.ksize;
  const int pad = ks / 2;
  out.assign(size_t(layer.out_ch) * h * w, S(0));
  for (int o = 0; o < layer.out_ch; ++o) {
    S* out_plane = out.data() + size_t(o) * h * w;
    const S bias = layer.b[o];
    for (int i = 0; i < h * w; ++i) out_plane[i] = bias;
    for (int ci = 0; ci < layer.in_ch; ++ci) {
      const S* in_plane = in.data() + size_t(ci) * h * w;
      for (int ky = 0; ky < ks; ++ky) {
        for (int kx = 0; kx < ks; ++kx) {
          const S wv =
              layer.w[((size_t(o) * layer.in_ch + ci) * ks + ky) * ks + kx];
          const int y0 = std::max(0, pad - ky);
          const int y1 = std::min(h, h + pad - ky);
          const int x0 = std::max(0, pad - kx);
          const int x1 = std::min(w, w + pad - kx);
          for (int y = y0; y < y1; ++y) {
            const S* in_row = in_plane + size_t(y + ky - pad) * w + (kx - pad);
            S* out_row = out_plane + size_t(y) * w;
            for (int x = x0; x < x1; ++x) out_row[x] += wv * in_row[x];
          }
        }
      }
    }
  }
}

// Accumulates weight/bias gradients into `grad` and, when d_in is non-null,
// input gradients into *d_in (which must be pre-sized and may carry a prior
// accumulation).
template <typename S>
void conv_backward(const std::vector<S>& in, int h, int w,
                   const ConvLayer<S>& layer, const std::vector<S>& d_out,
                   ConvLayer<S>& grad, std::vector<S>* d_in) {
  const int ks = layer.ksize;
  const int pad = ks / 2;
  for (int o = 0; o < layer.out_ch; ++o) {
    const S* dout_plane = d_out.data() + size_t(o) * h * w;
    S db = S(0);
    for (int i = 0; i < h * w; ++i) db += dout_plane[i];
    grad.b[o] += db;
    for (int ci = 0; ci < layer.in_ch; ++ci) {
      const S* in_plane = in.data() + size_t(ci) * h * w;
      S* din_plane = d_in ? d_in->data() + size_t(ci) * h * w : nullptr;
      for (int ky = 0; ky < ks; ++ky) {
        for (int kx = 0; kx < ks; ++kx) {
          const size_t widx =
              ((size_t(o) * layer.in_ch + ci) * ks + ky) * ks + kx;
          const S wv = layer.w[widx];
          const int y0 = std::max(0, pad - ky);
          const int y1 = std::min(h, h + pad - ky);
          const int x0 = std::max(0, pad - kx);
          const int x1 = std::min(w, w + pad - kx);
          S dw = S(0);
          for (int y = y0; y < y1; ++y) {
            const S* in_row = in_plane + size_t(y + ky - pad) * w + (kx - pad);
            const S* dout_row = dout_plane + size_t(y) * w;
            for (int x = x0; x < x1; ++x) dw += dout_row[x] * in_row[x];
          }
          grad.w[widx] += dw;
          if (din_plane) {
            for (int y = y0; y < y1; ++y) {
              S* din_row = din_plane + size_t(y + ky - pad) * w + (kx - pad);
              const S* dout_row = dout_plane + size_t(y) * w;
              for (int x = x0; x < x1; ++x) din_row[x] += wv * dout_row[x];
            }
          }
        }
      }
    }
  }
}

template <typename S>
void relu_inplace(std::vector<S>& v) {
  for (S& x : v)
    if (x < S(0)) x = S(0);
}

// Gate d by the rectifier: post-activation zero means the unit was clamped.
template <typename S>
void relu_gate(const std::vector<S>& post, std::vector<S>& d) {
  for (size_t i = 0; i < d.size(); ++i)
    if (!(post[i] > S(0))) d[i] = S(0);
}

}  // namespace detail

template <typename S>
ToyRegressor<S> make_toy_regressor(int t, int k, int dim, int in_channels,
                                   uint64_t seed) {
  if (t < 1) throw Error::data("toy regressor: need at least one stage");
  if (k < 1 || (dim != 2 && dim != 3)) {
    throw Error::data("toy regressor: bad k or dim");
  }
  ToyRegressor<S> m;
  m.t = t;
  m.in_channels = in_channels;
  m.k = k;
  m.dim = dim;
  SplitMix64 rng(seed);
  for (int s = 0; s < t; ++s) {
    const int cin = (s == 0) ? in_channels : kTrunkWidth3;
    ToyStage<S> stage;
    stage.conv1 = detail::make_layer<S>(cin, kTrunkWidth1, 3, rng);
    stage.conv2 = detail::make_layer<S>(kTrunkWidth1, kTrunkWidth2, 3, rng);
    stage.conv3 = detail::make_layer<S>(kTrunkWidth2, kTrunkWidth3, 3, rng);
    stage.head_conf = detail::make_layer<S>(kTrunkWidth3, 1, 1, rng);
    // Confidence targets are sparse (a few Gaussian bumps on a zero field),
    // so the head bias starts at the logit of that prior. A zero bias makes
    // early training collapse the sigmoid toward zero everywhere and stall
    // in its flat tail before structure can emerge.
    stage.head_conf.b[0] = S(-3.5);
    stage.head_disp = detail::make_layer<S>(kTrunkWidth3, dim * k, 1, rng);
    m.stages.push_back(std::move(stage));
  }
  return m;
}

template <typename S>
ToyRegressor<S> zero_grads(const ToyRegressor<S>& m) {
  ToyRegressor<S> g;
  g.t = m.t;
  g.in_channels = m.in_channels;
  g.k = m.k;
  g.dim = m.dim;
  for (const ToyStage<S>& s : m.stages) {
    ToyStage<S> gs;
    gs.conv1 = detail::zero_like(s.conv1);
    gs.conv2 = detail::zero_like(s.conv2);
    gs.conv3 = detail::zero_like(s.conv3);
    gs.head_conf = detail::zero_like(s.head_conf);
    gs.head_disp = detail::zero_like(s.head_disp);
    g.stages.push_back(std::move(gs));
  }
  return g;
}

// Deterministic parameter enumeration, shared by the optimizer, the
// checkpoint writer, and the gradient checker.
template <typename S, typename Fn>
void for_each_tensor(ToyRegressor<S>& m, Fn&& fn) {
  for (int s = 0; s < m.t; ++s) {
    const std::string p = "stage" + std::to_string(s) + ".";
    ToyStage<S>& st = m.stages[s];
    fn(p + "conv1.w", st.conv1.w);
    fn(p + "conv1.b", st.conv1.b);
    fn(p + "conv2.w", st.conv2.w);
    fn(p + "conv2.b", st.conv2.b);
    fn(p + "conv3.w", st.conv3.w);
    fn(p + "conv3.b", st.conv3.b);
    fn(p + "head_conf.w", st.head_conf.w);
    fn(p + "head_conf.b", st.head_conf.b);
    fn(p + "head_disp.w", st.head_disp.w);
    fn(p + "head_disp.b", st.head_disp.b);
  }
}

template <typename S>
size_t parameter_count(const ToyRegressor<S>& m) {
  size_t n = 0;
  for_each_tensor(const_cast<ToyRegressor<S>&>(m),
                  [&n](const std::string&, std::vector<S>& v) { n += v.size(); });
  return n;
}

template <typename S>
struct StageActivations {
  std::vector<S> a1, a2, a3;  // post-rectifier trunk activations
  std::vector<S> conf;        // sigmoid output, 1 plane
  std::vector<S> disp;        // linear output, dim*k planes
};

template <typename S>
struct ForwardResult {
  int height = 0;
  int width = 0;
  std::vector<S> input;  // [in_channels][h][w], kept for backward
  std::vector<StageActivations<S>> stages;
};

template <typename S>
ForwardResult<S> forward(const ToyRegressor<S>& m, const std::vector<S>& image,
                         int height, int width) {
  if (image.size() != size_t(m.in_channels) * height * width) {
    throw Error::data("forward: image size does not match model channels");
  }
  ForwardResult<S> fr;
  fr.height = height;
  fr.width = width;
  fr.input = image;
  const std::vector<S>* cur = &fr.input;
  for (int s = 0; s < m.t; ++s) {
    const ToyStage<S>& st = m.stages[s];
    StageActivations<S> acts;
    detail::conv_forward(*cur, height, width, st.conv1, acts.a1);
    detail::relu_inplace(acts.a1);
    detail::conv_forward(acts.a1, height, width, st.conv2, acts.a2);
    detail::relu_inplace(acts.a2);
    detail::conv_forward(acts.a2, height, width, st.conv3, acts.a3);
    detail::relu_inplace(acts.a3);
    detail::conv_forward(acts.a3, height, width, st.head_conf, acts.conf);
    for (S& v : acts.conf) v = S(1) / (S(1) + std::exp(-v));
    detail::conv_forward(acts.a3, height, width, st.head_disp, acts.disp);
    fr.stages.push_back(std::move(acts));
    cur = &fr.stages.back().a3;
  }
  return fr;
}

// Loss gradients arrive in double (they come out of the loss module); the
// returned structure has the exact parameter shapes of the model.
template <typename S>
ToyRegressor<S> backward(const ToyRegressor<S>& m, const ForwardResult<S>& fr,
                         const std::vector<StageGrad>& loss_grads) {
  if (static_cast<int>(loss_grads.size()) != m.t) {
    throw Error::data("backward: stage gradient count mismatch");
  }
  const int h = fr.height;
  const int w = fr.width;
  ToyRegressor<S> g = zero_grads(m);
  std::vector<S> carry;  // d(next stage input) = d(this stage a3)
  for (int s = m.t - 1; s >= 0; --s) {
    const ToyStage<S>& st = m.stages[s];
    const StageActivations<S>& acts = fr.stages[s];
    ToyStage<S>& gs = g.stages[s];
    const std::vector<S>& stage_in = (s == 0) ? fr.input : fr.stages[s - 1].a3;

    std::vector<S> d_conf(acts.conf.size());
    for (size_t i = 0; i < d_conf.size(); ++i) {
      const S sg = acts.conf[i];
      d_conf[i] = static_cast<S>(loss_grads[s].d_confidence[i]) * sg * (S(1) - sg);
    }
    std::vector<S> d_disp(acts.disp.size());
    for (size_t i = 0; i < d_disp.size(); ++i) {
      d_disp[i] = static_cast<S>(loss_grads[s].d_displacements[i]);
    }

    std::vector<S> d_a3(acts.a3.size(), S(0));
    detail::conv_backward(acts.a3, h, w, st.head_conf, d_conf, gs.head_conf,
                          &d_a3);
    detail::conv_backward(acts.a3, h, w, st.head_disp, d_disp, gs.head_disp,
                          &d_a3);
    if (!carry.empty()) {
      for (size_t i = 0; i < d_a3.size(); ++i) d_a3[i] += carry[i];
    }

    detail::relu_gate(acts.a3, d_a3);
    std::vector<S> d_a2(acts.a2.size(), S(0));
    detail::conv_backward(acts.a2, h, w, st.conv3, d_a3, gs.conv3, &d_a2);
    detail::relu_gate(acts.a2, d_a2);
    std::vector<S> d_a1(acts.a1.size(), S(0));
    detail::conv_backward(acts.a1, h, w, st.conv2, d_a2, gs.conv2, &d_a1);
    detail::relu_gate(acts.a1, d_a1);
    if (s > 0) {
      carry.assign(stage_in.size(), S(0));
      detail::conv_backward(stage_in, h, w, st.conv1, d_a1, gs.conv1, &carry);
    } else {
      detail::conv_backward(stage_in, h, w, st.conv1, d_a1, gs.conv1,
                            static_cast<std::vector<S>*>(nullptr));
    }
  }
  return g;
}

// Prediction maps for one stage, shaped like the target stack so they can
// feed the loss and the decoder. Every cell of a predicted stack counts as
// defined.
template <typename S>
StagePrediction stage_prediction(const ForwardResult<S>& fr, int stage,
                                 const DisplacementMapStack& geometry) {
  const StageActivations<S>& acts = fr.stages[stage];
  StagePrediction sp;
  sp.confidence.height = fr.height;
  sp.confidence.width = fr.width;
  sp.confidence.values.assign(acts.conf.begin(), acts.conf.end());
  sp.displacements = geometry;
  sp.displacements.values.assign(acts.disp.begin(), acts.disp.end());
  sp.displacements.contributors.assign(
      size_t(geometry.k) * fr.height * fr.width, 1);
  if (sp.displacements.has_root_depth) {
    // The toy model does not predict depth; drop the channel.
    sp.displacements.has_root_depth = false;
    sp.displacements.root_depth.clear();
    sp.displacements.depth_contrib.clear();
  }
  return sp;
}

template <typename S>
std::vector<StagePrediction> stage_predictions(
    const ForwardResult<S>& fr, const DisplacementMapStack& geometry) {
  std::vector<StagePrediction> out;
  for (int s = 0; s < static_cast<int>(fr.stages.size()); ++s) {
    out.push_back(stage_prediction(fr, s, geometry));
  }
  return out;
}

struct TrainConfig {
  double learning_rate = 0.003;
  double lr_decay = 1.0;  // multiplied in every decay_every epochs
  int decay_every = 0;    // 0 disables the schedule
  int epochs = 100;
  uint64_t seed = 1;
  double rms_decay = 0.99;  // squared-gradient moving-average coefficient
  double epsilon = 1e-8;
  LossConfig loss;
};

void validate_config(const TrainConfig& cfg);  // throws Error(data)

template <typename S>
struct TrainSample {
  std::vector<S> image;  // [in_channels][h][w]
  int height = 0;
  int width = 0;
  ConfidenceMap target_conf;
  DisplacementMapStack target_disp;
};

struct TrainResult {
  std::vector<double> loss_history;  // one mean-loss row per epoch run
  int epochs_run = 0;
  bool stopped_early = false;
};

// Called after each epoch; returning true stops training. The model
// reference is the live, just-updated model.
template <typename S>
using EpochHook = std::function<bool(int epoch, double mean_loss,
                                     const ToyRegressor<S>& model)>;

// Deterministic per-sample gradient descent with an RMS-style update:
// v = c v + (1-c) g^2; p -= lr g / (sqrt(v) + eps). Samples are visited in
// order; a non-finite loss aborts with the offending epoch index.
template <typename S>
TrainResult train_toy(ToyRegressor<S>& model,
                      const std::vector<TrainSample<S>>& data,
                      const TrainConfig& cfg,
                      const EpochHook<S>& hook = nullptr) {
  validate_config(cfg);
  if (data.empty()) throw Error::data("train_toy: empty dataset");

  std::vector<std::vector<S>*> params;
  for_each_tensor(model, [&params](const std::string&, std::vector<S>& v) {
    params.push_back(&v);
  });
  std::vector<std::vector<S>> rms(params.size());
  for (size_t i = 0; i < params.size(); ++i) rms[i].assign(params[i]->size(), S(0));

  TrainResult result;
  double lr = cfg.learning_rate;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.decay_every > 0 && epoch > 0 && epoch % cfg.decay_every == 0) {
      lr *= cfg.lr_decay;
    }
    double loss_sum = 0.0;
    for (const TrainSample<S>& sample : data) {
      ForwardResult<S> fr =
          forward(model, sample.image, sample.height, sample.width);
      const std::vector<StagePrediction> preds =
          stage_predictions(fr, sample.target_disp);
      TotalLoss tl =
          total_loss(preds, sample.target_conf, sample.target_disp, cfg.loss);
      if (!std::isfinite(tl.value)) {
        throw Error::data("train_toy: loss diverged at epoch " +
                          std::to_string(epoch));
      }
      loss_sum += tl.value;
      ToyRegressor<S> grads = backward(model, fr, tl.stage_grads);

      std::vector<std::vector<S>*> gtensors;
      for_each_tensor(grads, [&gtensors](const std::string&, std::vector<S>& v) {
        gtensors.push_back(&v);
      });
      const S c = static_cast<S>(cfg.rms_decay);
      const S eps = static_cast<S>(cfg.epsilon);
      const S step = static_cast<S>(lr);
      for (size_t ti = 0; ti < params.size(); ++ti) {
        std::vector<S>& p = *params[ti];
        const std::vector<S>& gv = *gtensors[ti];
        std::vector<S>& v = rms[ti];
        for (size_t i = 0; i < p.size(); ++i) {
          const S gi = gv[i];
          v[i] = c * v[i] + (S(1) - c) * gi * gi;
          p[i] -= step * gi / (std::sqrt(v[i]) + eps);
        }
      }
    }
    const double mean_loss = loss_sum / double(data.size());
    result.loss_history.push_back(mean_loss);
    result.epochs_run = epoch + 1;
    if (hook && hook(epoch, mean_loss, model)) {
      result.stopped_early = true;
      break;
    }
  }
  return result;
}

}  // namespace spr

#endif  // SPR_MODEL_HPP
