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

#ifndef SPR_DECODER_HPP
#define SPR_DECODER_HPP

#include <vector>

#include "encoder.hpp"
#include "repr.hpp"
#include "skeleton.hpp"

namespace spr {

struct Peak {
  int cell_y = 0;  // map cell of the maximum, used for map reads
  int cell_x = 0;
  double y = 0.0;  // map-cell coordinates, sub-cell refined when enabled
  double x = 0.0;
  double score = 0.0;
};

struct NmsParams {
  int window = 3;          // odd
  double threshold = 0.3;  // peaks below are dropped
  int max_peaks = 30;
  bool refine = false;  // shift peaks 0.25 cell toward the larger neighbor
};

struct DecodedPose {
  Pose pose;
  Vec root;  // input pixels (z in the depth unit for 3D)
  double score = 0.0;
  std::vector<double> per_joint_scores;  // 1 when the read cell was defined
};

// Strict local maxima of the window x window neighborhood with value >=
// threshold, sorted by score descending and truncated to max_peaks. On a
// constant plateau the row-major-first cell wins. Throws Error(usage) when
// window is even or < 1.
std::vector<Peak> nms_peaks(const ConfidenceMap& cmap, int window,
                            double threshold, int max_peaks);
std::vector<Peak> nms_peaks(const ConfidenceMap& cmap, const NmsParams& nms);

// Root-anchored decode: one pose per peak; joint j = root_pixels + Z *
// (vector at the peak cell in channel j). Joints whose channel is undefined
// at the peak cell come back invisible. Throws Error(data) on dimension or
// mode mismatches.
std::vector<DecodedPose> decode_vanilla(const ConfidenceMap& cmap,
                                        const DisplacementMapStack& stack,
                                        const EncoderConfig& cfg,
                                        const SkeletonSpec& spec,
                                        const NmsParams& nms);

// Sequential decode: level-2 joints read at the root peak cell, each deeper
// joint reads at the cell nearest its decoded parent. A joint's planar
// position is anchored at the cell it was read from (that is where the
// stored vector points from); its z accumulates from the parent. A missing
// parent makes all descendants invisible.
std::vector<DecodedPose> decode_hierarchical(const ConfidenceMap& cmap,
                                             const DisplacementMapStack& stack,
                                             const EncoderConfig& cfg,
                                             const SkeletonSpec& spec,
                                             const NmsParams& nms);

// Dispatch on stack.mode.
std::vector<DecodedPose> decode(const ConfidenceMap& cmap,
                                const DisplacementMapStack& stack,
                                const EncoderConfig& cfg,
                                const SkeletonSpec& spec,
                                const NmsParams& nms);

// Deterministic synthetic maps for latency measurement: n well-separated
// Gaussian roots on an height x width grid with k displacement channels.
struct BenchFixture {
  SkeletonSpec spec;
  ConfidenceMap cmap;
  DisplacementMapStack stack;
  EncoderConfig cfg;
};

BenchFixture make_bench_fixture(int height, int width, int k, int n);

struct BenchStats {
  double min_ms = 0.0;
  double median_ms = 0.0;
  double mean_ms = 0.0;
  double cv = 0.0;  // stddev / mean over repetitions
  int repetitions = 0;
  int peaks = 0;  // persons recovered per decode
};

// Times decode_vanilla on the synthetic fixture. Wall times exclude fixture
// construction. Throws Error(usage) when repetitions < 1.
BenchStats benchmark_decode(int height, int width, int k, int n,
                            int repetitions);

}  // namespace spr

#endif  // SPR_DECODER_HPP
