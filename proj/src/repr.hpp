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

#ifndef SPR_REPR_HPP
#define SPR_REPR_HPP

#include <optional>
#include <vector>

#include "skeleton.hpp"

namespace spr {

// Coordinate triple. 2D data keeps z at 0 so component arithmetic never
// branches on dimensionality; x and y are in input pixels, z is in the
// dataset's depth unit (millimeters for the 3D preset).
struct Vec {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

inline Vec operator+(const Vec& a, const Vec& b) {
  return {a.x + b.x, a.y + b.y, a.z + b.z};
}
inline Vec operator-(const Vec& a, const Vec& b) {
  return {a.x - b.x, a.y - b.y, a.z - b.z};
}
inline Vec operator*(double s, const Vec& a) {
  return {s * a.x, s * a.y, s * a.z};
}

struct Joint {
  Vec p;
  bool visible = false;
};

// Conventional per-person representation: one coordinate entry per joint of
// the governing skeleton. Invisible joints carry no coordinate meaning and
// never enter arithmetic.
struct Pose {
  int dim = 2;
  std::vector<Joint> joints;

  int joint_count() const { return static_cast<int>(joints.size()); }
};

// Root position plus one displacement per joint relative to the root.
// A displacement is present iff the source joint was visible.
struct StructuredPose {
  int dim = 2;
  Vec root;
  std::vector<std::optional<Vec>> displacements;

  int joint_count() const { return static_cast<int>(displacements.size()); }
};

// Root position plus per-joint displacements relative to the
// adjacent-hierarchy parent. An entry is present only if the joint and every
// ancestor on its articulated path are visible. The skeleton reference is
// non-owning; callers keep the spec alive while the pose is in use.
struct HierStructuredPose {
  int dim = 2;
  Vec root;
  std::vector<std::optional<Vec>> hier_displacements;
  const SkeletonSpec* skeleton = nullptr;

  int joint_count() const {
    return static_cast<int>(hier_displacements.size());
  }
};

struct Scene {
  int image_height = 0;
  int image_width = 0;
  int dim = 2;
  std::vector<Pose> persons;

  int person_count() const { return static_cast<int>(persons.size()); }
};

// Component-wise mean of the visible joints. Throws Error(data) when the
// pose has no visible joint.
Vec centroid_root(const Pose& pose);

StructuredPose encode_spr(const Pose& pose, const Vec& root);

// Inverse of encode_spr: joint = root + displacement; a joint is visible iff
// its displacement is present.
Pose decode_spr(const StructuredPose& sp);

HierStructuredPose encode_hier(const Pose& pose, const Vec& root,
                               const SkeletonSpec& spec);

// Accumulates displacements along each joint's articulated path. Throws
// Error(data) when a joint has an entry but an ancestor on its path does
// not.
Pose decode_hier(const HierStructuredPose& hp);

HierStructuredPose spr_to_hier(const StructuredPose& sp,
                               const SkeletonSpec& spec);
StructuredPose hier_to_spr(const HierStructuredPose& hp);

}  // namespace spr

#endif  // SPR_REPR_HPP
