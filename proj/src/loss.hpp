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

#ifndef SPR_LOSS_HPP
#define SPR_LOSS_HPP

#include <functional>
#include <vector>

#include "encoder.hpp"

namespace spr {

enum class MaskMode { masked, unmasked };

struct LossConfig {
  double beta = 0.01;          // weight on the displacement term
  double smooth_l1_delta = 1.0;
  MaskMode mask_mode = MaskMode::masked;
};

void validate_config(const LossConfig& cfg);  // throws Error(data)

struct LossResult {
  double value = 0.0;
  std::vector<double> grad;  // same layout as the prediction values
};

// Mean over cells of (pred - target)^2; gradient 2(pred - target)/count.
LossResult l2_conf_loss(const ConfidenceMap& pred, const ConfidenceMap& target);

// Huber-style per component: residual r contributes 0.5 r^2/delta when
// |r| < delta, else |r| - 0.5 delta. Value is the mean over supervised
// components; gradients are zero elsewhere. In masked mode supervision
// covers components of (joint, cell) entries with mask > 0; an empty mask
// yields value 0. In unmasked mode every component is supervised.
LossResult smooth_l1_disp_loss(const DisplacementMapStack& pred,
                               const DisplacementMapStack& target,
                               const std::vector<uint16_t>& mask,
                               const LossConfig& cfg);

// Convenience: mask = target.contributors.
LossResult smooth_l1_disp_loss(const DisplacementMapStack& pred,
                               const DisplacementMapStack& target,
                               const LossConfig& cfg);

struct StagePrediction {
  ConfidenceMap confidence;
  DisplacementMapStack displacements;
};

struct StageGrad {
  std::vector<double> d_confidence;
  std::vector<double> d_displacements;
};

struct TotalLoss {
  double value = 0.0;
  double confidence_part = 0.0;   // sum over stages of the l2 term
  double displacement_part = 0.0; // sum over stages of the smooth-l1 term
  std::vector<StageGrad> stage_grads;
};

// Sum over stages of l2 + beta * smooth-l1, every stage supervised against
// the same targets.
TotalLoss total_loss(const std::vector<StagePrediction>& stage_preds,
                     const ConfidenceMap& target_conf,
                     const DisplacementMapStack& target_disp,
                     const LossConfig& cfg);

// Central-difference gradient verification. f evaluates the scalar loss at a
// parameter vector; analytic is its claimed gradient at x. Returns the
// maximum relative error over components. The error denominator is floored
// at the gradient's infinity norm so that components far below the
// gradient's own scale are judged by normalized absolute error; a pure
// component-wise ratio would amplify central-difference roundoff on
// near-zero components into spurious failures.
double grad_check(const std::function<double(const std::vector<double>&)>& f,
                  const std::vector<double>& x,
                  const std::vector<double>& analytic, double step);

}  // namespace spr

#endif  // SPR_LOSS_HPP
