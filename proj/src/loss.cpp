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

#include "loss.hpp"

#include <cmath>
#include <cstdlib>

#include "error.hpp"

namespace spr {

void validate_config(const LossConfig& cfg) {
  if (!(cfg.beta > 0.0)) throw Error::data("loss config: beta must be > 0");
  if (!(cfg.smooth_l1_delta > 0.0))
    throw Error::data("loss config: delta must be > 0");
}

LossResult l2_conf_loss(const ConfidenceMap& pred,
                        const ConfidenceMap& target) {
  if (pred.height != target.height || pred.width != target.width) {
    throw Error::data("l2_conf_loss: map dims differ");
  }
  const size_t n = pred.values.size();
  LossResult res;
  res.grad.assign(n, 0.0);
  double sum = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double r = pred.values[i] - target.values[i];
    sum += r * r;
    res.grad[i] = 2.0 * r / double(n);
  }
  res.value = sum / double(n);
  return res;
}

LossResult smooth_l1_disp_loss(const DisplacementMapStack& pred,
                               const DisplacementMapStack& target,
                               const std::vector<uint16_t>& mask,
                               const LossConfig& cfg) {
  validate_config(cfg);
  if (pred.height != target.height || pred.width != target.width ||
      pred.dim != target.dim || pred.k != target.k) {
    throw Error::data("smooth_l1_disp_loss: stack dims differ");
  }
  const size_t cells = size_t(pred.k) * pred.height * pred.width;
  if (cfg.mask_mode == MaskMode::masked && mask.size() != cells) {
    throw Error::data("smooth_l1_disp_loss: mask size mismatch");
  }

  LossResult res;
  res.grad.assign(pred.values.size(), 0.0);
  const double delta = cfg.smooth_l1_delta;

  // First count supervised components so gradients carry the final 1/count.
  size_t supervised;
  if (cfg.mask_mode == MaskMode::unmasked) {
    supervised = pred.values.size();
  } else {
    size_t defined_cells = 0;
    for (size_t i = 0; i < cells; ++i) defined_cells += mask[i] > 0;
    supervised = defined_cells * size_t(pred.dim);
  }
  if (supervised == 0) return res;  // value 0, zero gradient by convention

  double sum = 0.0;
  for (int j = 0; j < pred.k; ++j) {
    for (int y = 0; y < pred.height; ++y) {
      for (int x = 0; x < pred.width; ++x) {
        if (cfg.mask_mode == MaskMode::masked &&
            mask[(size_t(j) * pred.height + y) * pred.width + x] == 0) {
          continue;
        }
        for (int c = 0; c < pred.dim; ++c) {
          const size_t idx = pred.value_index(j, c, y, x);
          const double r = pred.values[idx] - target.values[idx];
          const double a = std::abs(r);
          if (a < delta) {
            sum += 0.5 * r * r / delta;
            res.grad[idx] = (r / delta) / double(supervised);
          } else {
            sum += a - 0.5 * delta;
            res.grad[idx] = (r > 0 ? 1.0 : -1.0) / double(supervised);
          }
        }
      }
    }
  }
  res.value = sum / double(supervised);
  return res;
}

LossResult smooth_l1_disp_loss(const DisplacementMapStack& pred,
                               const DisplacementMapStack& target,
                               const LossConfig& cfg) {
  return smooth_l1_disp_loss(pred, target, target.contributors, cfg);
}

TotalLoss total_loss(const std::vector<StagePrediction>& stage_preds,
                     const ConfidenceMap& target_conf,
                     const DisplacementMapStack& target_disp,
                     const LossConfig& cfg) {
  validate_config(cfg);
  if (stage_preds.empty()) {
    throw Error::data("total_loss: need at least one stage");
  }
  TotalLoss total;
  for (const StagePrediction& sp : stage_preds) {
    LossResult lc = l2_conf_loss(sp.confidence, target_conf);
    LossResult ld = smooth_l1_disp_loss(sp.displacements, target_disp, cfg);
    total.value += lc.value + cfg.beta * ld.value;
    total.confidence_part += lc.value;
    total.displacement_part += ld.value;
    StageGrad g;
    g.d_confidence = std::move(lc.grad);
    g.d_displacements = std::move(ld.grad);
    for (double& v : g.d_displacements) v *= cfg.beta;
    total.stage_grads.push_back(std::move(g));
  }
  return total;
}

double grad_check(const std::function<double(const std::vector<double>&)>& f,
                  const std::vector<double>& x,
                  const std::vector<double>& analytic, double step) {
  if (!(step > 0.0)) throw Error::data("grad_check: step must be > 0");
  if (analytic.size() != x.size()) {
    throw Error::data("grad_check: gradient length mismatch");
  }
  double scale = 1e-8;
  for (const double g : analytic) scale = std::max(scale, std::abs(g));
  double worst = 0.0;
  std::vector<double> probe = x;
  for (size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + step;
    const double hi = f(probe);
    probe[i] = x[i] - step;
    const double lo = f(probe);
    probe[i] = x[i];
    const double numeric = (hi - lo) / (2.0 * step);
    const double denom =
        std::max(std::abs(numeric) + std::abs(analytic[i]), scale);
    const double rel = std::abs(numeric - analytic[i]) / denom;
    if (rel > worst) worst = rel;
  }
  return worst;
}

}  // namespace spr
