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

#ifndef SPR_SKELETON_HPP
#define SPR_SKELETON_HPP

#include <string>
#include <vector>

namespace spr {

// Parent value for joints whose parent is the (virtual) root joint.
inline constexpr int kRootParent = -1;

// A joint taxonomy with the four-hierarchy division. The root joint is the
// person centroid and occupies hierarchy level 1; it is not listed among the
// joints. Body joints carry levels 2..4 and parent links that step exactly
// one level at a time, so every parent chain reaches the root in at most
// three hops.
struct SkeletonSpec {
  std::string name;
  int dim = 2;  // 2 or 3
  std::vector<std::string> joint_names;
  std::vector<int> hierarchy_level;  // per joint, in {2,3,4}
  std::vector<int> parent;           // per joint, kRootParent or a joint index

  int joint_count() const { return static_cast<int>(joint_names.size()); }
  int joint_index(const std::string& joint_name) const;  // -1 if absent
};

// Chain of joints from the first post-root joint down to the target joint,
// following parent links. Length is at most 3.
struct ArticulatedPath {
  int joint_index = -1;
  std::vector<int> ordered_joints;
};

// Returns the list of violated invariants, one message per violation.
// An empty report means the spec is valid. Pure; never throws.
std::vector<std::string> validate(const SkeletonSpec& spec);

// Parent chain of joint j, root side first, excluding the root itself.
// Requires a valid spec; throws Error(data) when j is out of range or the
// chain is malformed.
ArticulatedPath articulated_path(const SkeletonSpec& spec, int joint);

// Built-in presets.
SkeletonSpec default_mpii16();
SkeletonSpec default_coco17();
SkeletonSpec default_panoptic15_3d();
// Six-joint 2D skeleton used by the synthetic fixtures and the toy trainer.
SkeletonSpec default_toy6();

// Preset lookup by name ("mpii16", "coco17", "panoptic15-3d", "toy6").
// Throws Error(data) for unknown names.
SkeletonSpec skeleton_preset(const std::string& name);
bool is_skeleton_preset(const std::string& name);

}  // namespace spr

#endif  // SPR_SKELETON_HPP
