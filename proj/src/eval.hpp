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

#ifndef SPR_EVAL_HPP
#define SPR_EVAL_HPP

#include <optional>
#include <vector>

#include "decoder.hpp"
#include "repr.hpp"
#include "skeleton.hpp"

namespace spr {

// The matching and AP protocol here is fully specified and deliberately
// simple: greedy score-ordered one-to-one person assignment, all-points
// precision-recall interpolation. It is a documented stand-in, not a
// re-implementation of any benchmark toolkit.

struct MatchPair {
  int pred_index = -1;
  int gt_index = -1;
};

// True iff the planar distance is at most alpha * head_size (boundary
// inclusive). Throws Error(data) on non-positive head_size.
bool pckh_correct(const Vec& pred, const Vec& gt, double head_size,
                  double alpha = 0.5);

// Greedy one-to-one assignment: predictions in descending score order (ties
// by lower prediction index), each taking the unmatched ground truth with
// the highest fraction of PCKh-correct joints (ties by lower ground-truth
// index). Predictions with zero correct joints stay unmatched.
std::vector<MatchPair> match_persons(const std::vector<DecodedPose>& preds,
                                     const std::vector<Pose>& gts,
                                     const SkeletonSpec& spec,
                                     const std::vector<double>& ref_lengths,
                                     double alpha = 0.5);

struct MetricReport {
  // Absent when that joint is never annotated in the ground truth.
  std::vector<std::optional<double>> per_joint_ap;
  double total_map = 0.0;  // mean over the defined per-joint APs
  std::vector<double> per_joint_pck;
  std::vector<std::vector<MatchPair>> matching;  // per image
};

// Dataset-level mAP: per joint, matched detections are ranked by person
// score across all images; average precision uses all-points interpolation;
// invisible ground-truth joints never enter the recall denominator.
MetricReport mean_ap(const std::vector<std::vector<DecodedPose>>& preds,
                     const std::vector<std::vector<Pose>>& gts,
                     const SkeletonSpec& spec,
                     const std::vector<std::vector<double>>& ref_lengths,
                     double alpha = 0.5);

struct Pck3dReport {
  std::vector<double> per_joint_pct;  // percentages in [0, 100]
  double total_pct = 0.0;
  std::vector<std::vector<MatchPair>> matching;
};

// 3D-PCK: persons matched greedily by score with a root-proximity gate
// (centroid distance at most root_gate), then a joint counts as correct iff
// its 3D error is at most radius (boundary inclusive). Fractions are over
// annotated ground-truth joints, matched or not.
Pck3dReport pck3d(const std::vector<std::vector<DecodedPose>>& preds,
                  const std::vector<std::vector<Pose>>& gts,
                  const SkeletonSpec& spec, double radius = 150.0,
                  double root_gate = 500.0);

// Reference length for PCKh: 0.6 times the head segment (head_top to
// upper_neck) when the skeleton has one and both joints are visible;
// otherwise the recorded reference length. Throws Error(data) when neither
// is available.
double head_size(const Pose& gt, const SkeletonSpec& spec,
                 double recorded_ref = 0.0);

}  // namespace spr

#endif  // SPR_EVAL_HPP
