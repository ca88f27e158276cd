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

#include "repr.hpp"

#include <string>

#include "error.hpp"

namespace spr {

namespace {

void require_matching_k(int have, int want, const char* what) {
  if (have != want) {
    throw Error::data(std::string(what) + ": joint count " +
                      std::to_string(have) + " does not match skeleton K=" +
                      std::to_string(want));
  }
}

}  // namespace

Vec centroid_root(const Pose& pose) {
  Vec sum;
  int visible = 0;
  for (const Joint& j : pose.joints) {
    if (!j.visible) continue;
    sum = sum + j.p;
    ++visible;
  }
  if (visible == 0) {
    throw Error::data("centroid_root: pose has no visible joints");
  }
  const double inv = 1.0 / static_cast<double>(visible);
  return {sum.x * inv, sum.y * inv, sum.z * inv};
}

StructuredPose encode_spr(const Pose& pose, const Vec& root) {
  StructuredPose sp;
  sp.dim = pose.dim;
  sp.root = root;
  sp.displacements.resize(pose.joints.size());
  for (size_t j = 0; j < pose.joints.size(); ++j) {
    if (pose.joints[j].visible) {
      sp.displacements[j] = pose.joints[j].p - root;
    }
  }
  return sp;
}

Pose decode_spr(const StructuredPose& sp) {
  Pose pose;
  pose.dim = sp.dim;
  pose.joints.resize(sp.displacements.size());
  for (size_t j = 0; j < sp.displacements.size(); ++j) {
    if (sp.displacements[j]) {
      pose.joints[j].p = sp.root + *sp.displacements[j];
      pose.joints[j].visible = true;
    }
  }
  return pose;
}

HierStructuredPose encode_hier(const Pose& pose, const Vec& root,
                               const SkeletonSpec& spec) {
  require_matching_k(pose.joint_count(), spec.joint_count(), "encode_hier");
  HierStructuredPose hp;
  hp.dim = pose.dim;
  hp.root = root;
  hp.skeleton = &spec;
  hp.hier_displacements.resize(pose.joints.size());
  for (int j = 0; j < pose.joint_count(); ++j) {
    if (!pose.joints[j].visible) continue;
    // Present only when the whole path is visible, so decoding never needs a
    // displacement that does not exist.
    bool chain_visible = true;
    for (int cur = spec.parent[j]; cur != kRootParent; cur = spec.parent[cur]) {
      if (!pose.joints[cur].visible) {
        chain_visible = false;
        break;
      }
    }
    if (!chain_visible) continue;
    const int par = spec.parent[j];
    const Vec anchor = (par == kRootParent) ? root : pose.joints[par].p;
    hp.hier_displacements[j] = pose.joints[j].p - anchor;
  }
  return hp;
}

Pose decode_hier(const HierStructuredPose& hp) {
  if (hp.skeleton == nullptr) {
    throw Error::data("decode_hier: pose has no skeleton");
  }
  const SkeletonSpec& spec = *hp.skeleton;
  require_matching_k(hp.joint_count(), spec.joint_count(), "decode_hier");
  Pose pose;
  pose.dim = hp.dim;
  pose.joints.resize(hp.hier_displacements.size());
  for (int j = 0; j < spec.joint_count(); ++j) {
    if (!hp.hier_displacements[j]) continue;
    Vec acc = hp.root;
    for (int step : articulated_path(spec, j).ordered_joints) {
      if (!hp.hier_displacements[step]) {
        throw Error::data("decode_hier: joint '" + spec.joint_names[j] +
                          "' present but ancestor '" +
                          spec.joint_names[step] + "' missing");
      }
      acc = acc + *hp.hier_displacements[step];
    }
    pose.joints[j].p = acc;
    pose.joints[j].visible = true;
  }
  return pose;
}

HierStructuredPose spr_to_hier(const StructuredPose& sp,
                               const SkeletonSpec& spec) {
  require_matching_k(sp.joint_count(), spec.joint_count(), "spr_to_hier");
  HierStructuredPose hp;
  hp.dim = sp.dim;
  hp.root = sp.root;
  hp.skeleton = &spec;
  hp.hier_displacements.resize(sp.displacements.size());
  for (int j = 0; j < spec.joint_count(); ++j) {
    if (!sp.displacements[j]) continue;
    bool chain_present = true;
    for (int cur = spec.parent[j]; cur != kRootParent; cur = spec.parent[cur]) {
      if (!sp.displacements[cur]) {
        chain_present = false;
        break;
      }
    }
    if (!chain_present) continue;
    const int par = spec.parent[j];
    if (par == kRootParent) {
      hp.hier_displacements[j] = *sp.displacements[j];
    } else {
      hp.hier_displacements[j] = *sp.displacements[j] - *sp.displacements[par];
    }
  }
  return hp;
}

StructuredPose hier_to_spr(const HierStructuredPose& hp) {
  if (hp.skeleton == nullptr) {
    throw Error::data("hier_to_spr: pose has no skeleton");
  }
  const SkeletonSpec& spec = *hp.skeleton;
  require_matching_k(hp.joint_count(), spec.joint_count(), "hier_to_spr");
  StructuredPose sp;
  sp.dim = hp.dim;
  sp.root = hp.root;
  sp.displacements.resize(hp.hier_displacements.size());
  for (int j = 0; j < spec.joint_count(); ++j) {
    if (!hp.hier_displacements[j]) continue;
    Vec acc;
    bool complete = true;
    for (int step : articulated_path(spec, j).ordered_joints) {
      if (!hp.hier_displacements[step]) {
        complete = false;
        break;
      }
      acc = acc + *hp.hier_displacements[step];
    }
    if (complete) sp.displacements[j] = acc;
  }
  return sp;
}

}  // namespace spr
