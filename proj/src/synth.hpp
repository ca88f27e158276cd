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

#ifndef SPR_SYNTH_HPP
#define SPR_SYNTH_HPP

#include <cstdint>
#include <vector>

#include "repr.hpp"
#include "skeleton.hpp"

namespace spr {

// Deterministic scene generation: identical (config, index) pairs produce
// bit-identical scenes and renders on every platform, because all sampling
// goes through the fixed integer-state generator and uses only +,-,*,/ and
// sqrt.

struct LimbRange {
  double min_len = 4.0;
  double max_len = 8.0;
};

struct SynthConfig {
  uint64_t seed = 1;
  int n_min = 1;
  int n_max = 3;
  int image_height = 96;
  int image_width = 96;
  SkeletonSpec skeleton;  // defaults to toy6 when joint_names is empty
  // Limb length ranges indexed by the child joint's hierarchy level.
  LimbRange len_level2{5.0, 9.0};
  LimbRange len_level3{4.0, 8.0};
  LimbRange len_level4{3.0, 7.0};
  // 0 keeps roots at least 2*sigma cells apart; 1 removes the constraint.
  double overlap = 0.0;
  double sigma = 7.0;  // matches the encoder default, used for separation
  bool render = false;
  int dim = 2;
  double depth_min = 2000.0;  // 3D root depth range, in the depth unit
  double depth_max = 8000.0;
  double z_limb_scale = 30.0;  // depth spread of limbs relative to planar
  // PCKh reference length recorded for skeletons without a head segment.
  double ref_length = 12.0;
};

void validate_config(const SynthConfig& cfg);  // throws Error(data)

// The skeleton scenes are built on: cfg.skeleton, or the dim-matched
// default preset when cfg.skeleton is empty. Throws Error(data) when the
// skeleton is invalid or its dim conflicts with cfg.dim.
SkeletonSpec resolved_skeleton(const SynthConfig& cfg);

// Planar RGB image, values in [0,1], layout [3][height][width].
struct RenderedImage {
  int height = 0;
  int width = 0;
  std::vector<float> rgb;
};

struct GeneratedScene {
  Scene scene;
  std::vector<Vec> roots;  // the sampled roots; person centroids land here
  RenderedImage image;     // empty unless cfg.render
};

// Builds persons by sampling limb directions and lengths along the
// skeleton's parent chains, then translating each pose so its visible-joint
// centroid coincides with the sampled root. Retries bounded; throws
// Error(data) when separation or bounds cannot be satisfied.
GeneratedScene generate_scene(const SynthConfig& cfg, uint64_t index);

// Adds seeded isotropic noise of the given magnitude to every visible
// joint; magnitude 0 returns the scene unchanged. Visibility is untouched.
Scene perturb_poses(const Scene& scene, double magnitude, uint64_t seed);

}  // namespace spr

#endif  // SPR_SYNTH_HPP
