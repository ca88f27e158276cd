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

#include "eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "error.hpp"

namespace spr {

namespace {

double planar_dist(const Vec& a, const Vec& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

double dist3(const Vec& a, const Vec& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

// Prediction indices in descending score order; equal scores keep index
// order so the outcome never depends on sort internals.
std::vector<int> score_order(const std::vector<DecodedPose>& preds) {
  std::vector<int> order(preds.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&preds](int a, int b) {
    return preds[a].score > preds[b].score;
  });
  return order;
}

// Count of PCKh-correct joints for a candidate pairing, and the number of
// annotated ground-truth joints it is measured against.
void pair_correctness(const DecodedPose& pred, const Pose& gt,
                      double ref_length, double alpha, int& correct,
                      int& annotated) {
  correct = 0;
  annotated = 0;
  for (size_t j = 0; j < gt.joints.size(); ++j) {
    if (!gt.joints[j].visible) continue;
    ++annotated;
    if (j < pred.pose.joints.size() && pred.pose.joints[j].visible &&
        pckh_correct(pred.pose.joints[j].p, gt.joints[j].p, ref_length,
                     alpha)) {
      ++correct;
    }
  }
}

// All-points interpolated average precision over a ranked list of
// correctness flags.
double average_precision(const std::vector<bool>& ranked_correct, int n_gt) {
  std::vector<double> precision;
  std::vector<double> recall;
  int tp = 0;
  int seen = 0;
  for (bool c : ranked_correct) {
    ++seen;
    if (c) ++tp;
    precision.push_back(double(tp) / double(seen));
    recall.push_back(double(tp) / double(n_gt));
  }
  // Make precision non-increasing from the tail, then sum the area under
  // the step curve at points where recall advances.
  for (int i = static_cast<int>(precision.size()) - 2; i >= 0; --i) {
    precision[i] = std::max(precision[i], precision[i + 1]);
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (size_t i = 0; i < precision.size(); ++i) {
    if (recall[i] > prev_recall) {
      ap += (recall[i] - prev_recall) * precision[i];
      prev_recall = recall[i];
    }
  }
  return ap;
}

}  // namespace

bool pckh_correct(const Vec& pred, const Vec& gt, double head_size,
                  double alpha) {
  if (!(head_size > 0.0)) {
    throw Error::data("pckh_correct: head_size must be positive");
  }
  return planar_dist(pred, gt) <= alpha * head_size;
}

std::vector<MatchPair> match_persons(const std::vector<DecodedPose>& preds,
                                     const std::vector<Pose>& gts,
                                     const SkeletonSpec& spec,
                                     const std::vector<double>& ref_lengths,
                                     double alpha) {
  if (ref_lengths.size() != gts.size()) {
    throw Error::data("match_persons: one reference length per ground truth");
  }
  for (const Pose& gt : gts) {
    if (gt.joint_count() != spec.joint_count()) {
      throw Error::data("match_persons: ground truth does not match skeleton");
    }
  }
  std::vector<bool> gt_taken(gts.size(), false);
  std::vector<MatchPair> matches;
  for (int pi : score_order(preds)) {
    int best_gt = -1;
    double best_fraction = 0.0;
    int best_correct = 0;
    for (size_t gi = 0; gi < gts.size(); ++gi) {
      if (gt_taken[gi]) continue;
      int correct = 0;
      int annotated = 0;
      pair_correctness(preds[pi], gts[gi], ref_lengths[gi], alpha, correct,
                       annotated);
      if (correct == 0) continue;
      const double fraction = double(correct) / double(annotated);
      if (fraction > best_fraction) {
        best_fraction = fraction;
        best_gt = static_cast<int>(gi);
        best_correct = correct;
      }
    }
    if (best_gt >= 0 && best_correct > 0) {
      gt_taken[best_gt] = true;
      matches.push_back(MatchPair{pi, best_gt});
    }
  }
  return matches;
}

MetricReport mean_ap(const std::vector<std::vector<DecodedPose>>& preds,
                     const std::vector<std::vector<Pose>>& gts,
                     const SkeletonSpec& spec,
                     const std::vector<std::vector<double>>& ref_lengths,
                     double alpha) {
  if (preds.size() != gts.size() || ref_lengths.size() != gts.size()) {
    throw Error::data("mean_ap: image lists must be aligned");
  }
  const int k = spec.joint_count();
  MetricReport report;
  report.per_joint_ap.assign(k, std::nullopt);
  report.per_joint_pck.assign(k, 0.0);

  struct Detection {
    double score;
    bool correct;
  };
  std::vector<std::vector<Detection>> detections(k);
  std::vector<int> n_gt(k, 0);

  for (size_t img = 0; img < gts.size(); ++img) {
    for (const Pose& gt : gts[img]) {
      for (int j = 0; j < k; ++j) {
        if (gt.joints[j].visible) ++n_gt[j];
      }
    }
    const std::vector<MatchPair> matches =
        match_persons(preds[img], gts[img], spec, ref_lengths[img], alpha);
    report.matching.push_back(matches);
    for (const MatchPair& m : matches) {
      const DecodedPose& pred = preds[img][m.pred_index];
      const Pose& gt = gts[img][m.gt_index];
      const double ref = ref_lengths[img][m.gt_index];
      for (int j = 0; j < k; ++j) {
        if (!gt.joints[j].visible) continue;
        // A matched person whose joint j came back invisible is simply a
        // miss for that joint: no detection row, recall pays for it.
        if (!pred.pose.joints[j].visible) continue;
        const bool ok =
            pckh_correct(pred.pose.joints[j].p, gt.joints[j].p, ref, alpha);
        detections[j].push_back(Detection{pred.score, ok});
      }
    }
  }

  double ap_sum = 0.0;
  int ap_count = 0;
  for (int j = 0; j < k; ++j) {
    if (n_gt[j] == 0) continue;  // AP undefined for never-annotated joints
    // Detections were appended image by image in match order; a stable sort
    // by score keeps that order among equals.
    std::stable_sort(detections[j].begin(), detections[j].end(),
                     [](const Detection& a, const Detection& b) {
                       return a.score > b.score;
                     });
    std::vector<bool> ranked;
    int correct_total = 0;
    for (const Detection& d : detections[j]) {
      ranked.push_back(d.correct);
      if (d.correct) ++correct_total;
    }
    report.per_joint_ap[j] = average_precision(ranked, n_gt[j]);
    report.per_joint_pck[j] = double(correct_total) / double(n_gt[j]);
    ap_sum += *report.per_joint_ap[j];
    ++ap_count;
  }
  report.total_map = ap_count > 0 ? ap_sum / ap_count : 0.0;
  return report;
}

Pck3dReport pck3d(const std::vector<std::vector<DecodedPose>>& preds,
                  const std::vector<std::vector<Pose>>& gts,
                  const SkeletonSpec& spec, double radius, double root_gate) {
  if (preds.size() != gts.size()) {
    throw Error::data("pck3d: image lists must be aligned");
  }
  if (spec.dim != 3) {
    throw Error::data("pck3d: requires a 3D skeleton");
  }
  const int k = spec.joint_count();
  Pck3dReport report;
  std::vector<long long> correct(k, 0);
  std::vector<long long> annotated(k, 0);

  for (size_t img = 0; img < gts.size(); ++img) {
    const std::vector<Pose>& gt_list = gts[img];
    for (const Pose& gt : gt_list) {
      if (gt.joint_count() != k) {
        throw Error::data("pck3d: ground truth does not match skeleton");
      }
      if (gt.dim != 3) throw Error::data("pck3d: ground truth is not 3D");
      for (int j = 0; j < k; ++j) {
        if (gt.joints[j].visible) ++annotated[j];
      }
    }
    std::vector<Vec> gt_roots(gt_list.size());
    std::vector<bool> gt_has_root(gt_list.size(), false);
    for (size_t gi = 0; gi < gt_list.size(); ++gi) {
      bool any = false;
      for (const Joint& jt : gt_list[gi].joints) any = any || jt.visible;
      if (any) {
        gt_roots[gi] = centroid_root(gt_list[gi]);
        gt_has_root[gi] = true;
      }
    }

    std::vector<bool> taken(gt_list.size(), false);
    std::vector<MatchPair> matches;
    for (int pi : score_order(preds[img])) {
      int best = -1;
      double best_dist = root_gate;
      for (size_t gi = 0; gi < gt_list.size(); ++gi) {
        if (taken[gi] || !gt_has_root[gi]) continue;
        const double d = dist3(preds[img][pi].root, gt_roots[gi]);
        if (d <= best_dist) {
          // Boundary inclusive; the earlier (lower) index wins exact ties.
          if (best < 0 || d < best_dist) {
            best = static_cast<int>(gi);
            best_dist = d;
          }
        }
      }
      if (best >= 0) {
        taken[best] = true;
        matches.push_back(MatchPair{pi, best});
        const DecodedPose& pred = preds[img][pi];
        const Pose& gt = gt_list[best];
        for (int j = 0; j < k; ++j) {
          if (!gt.joints[j].visible) continue;
          if (j < pred.pose.joint_count() && pred.pose.joints[j].visible &&
              dist3(pred.pose.joints[j].p, gt.joints[j].p) <= radius) {
            ++correct[j];
          }
        }
      }
    }
    report.matching.push_back(matches);
  }

  report.per_joint_pct.assign(k, 0.0);
  long long total_correct = 0;
  long long total_annotated = 0;
  for (int j = 0; j < k; ++j) {
    total_correct += correct[j];
    total_annotated += annotated[j];
    if (annotated[j] > 0) {
      report.per_joint_pct[j] = 100.0 * double(correct[j]) / double(annotated[j]);
    }
  }
  report.total_pct = total_annotated > 0
                         ? 100.0 * double(total_correct) / double(total_annotated)
                         : 0.0;
  return report;
}

double head_size(const Pose& gt, const SkeletonSpec& spec,
                 double recorded_ref) {
  const int top = spec.joint_index("head_top");
  const int neck = spec.joint_index("upper_neck");
  if (top >= 0 && neck >= 0 && gt.joints[top].visible &&
      gt.joints[neck].visible) {
    return 0.6 * planar_dist(gt.joints[top].p, gt.joints[neck].p);
  }
  if (recorded_ref > 0.0) return recorded_ref;
  throw Error::data(
      "head_size: no head segment available and no recorded reference length");
}

}  // namespace spr
