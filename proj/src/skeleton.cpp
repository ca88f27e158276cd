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

#include "skeleton.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "error.hpp"

namespace spr {

namespace {

constexpr int kMaxChainHops = 3;  // four hierarchies, root excluded

std::string joint_label(const SkeletonSpec& spec, int j) {
  std::ostringstream os;
  if (j >= 0 && j < spec.joint_count()) {
    os << "'" << spec.joint_names[j] << "' (#" << j << ")";
  } else {
    os << "#" << j;
  }
  return os.str();
}

}  // namespace

int SkeletonSpec::joint_index(const std::string& joint_name) const {
  for (int j = 0; j < joint_count(); ++j) {
    if (joint_names[j] == joint_name) return j;
  }
  return -1;
}

std::vector<std::string> validate(const SkeletonSpec& spec) {
  std::vector<std::string> report;
  const int k = spec.joint_count();

  if (k < 1) report.push_back("skeleton must have at least one joint");
  if (spec.dim != 2 && spec.dim != 3)
    report.push_back("dim must be 2 or 3, got " + std::to_string(spec.dim));
  if (static_cast<int>(spec.hierarchy_level.size()) != k)
    report.push_back("hierarchy_level length does not match joint count");
  if (static_cast<int>(spec.parent.size()) != k)
    report.push_back("parent length does not match joint count");
  if (!report.empty()) return report;  // sizes broken, stop here

  std::set<std::string> seen;
  for (int j = 0; j < k; ++j) {
    if (!seen.insert(spec.joint_names[j]).second)
      report.push_back("duplicate joint name '" + spec.joint_names[j] + "'");
  }

  for (int j = 0; j < k; ++j) {
    const int level = spec.hierarchy_level[j];
    const int par = spec.parent[j];
    if (level < 2 || level > 4) {
      report.push_back("level out of range: joint " + joint_label(spec, j) +
                       " has level " + std::to_string(level));
    }
    if (par != kRootParent && (par < 0 || par >= k)) {
      report.push_back("parent out of range: joint " + joint_label(spec, j));
      continue;
    }
    if (par == j) {
      report.push_back("cycle: joint " + joint_label(spec, j) +
                       " parents itself");
      continue;
    }
    if (par == kRootParent) {
      if (level != 2)
        report.push_back("level gap: joint " + joint_label(spec, j) +
                         " has the root parent but level " +
                         std::to_string(level));
    } else if (level != spec.hierarchy_level[par] + 1) {
      report.push_back("level gap: joint " + joint_label(spec, j) +
                       " (level " + std::to_string(level) + ") has parent " +
                       joint_label(spec, par) + " (level " +
                       std::to_string(spec.hierarchy_level[par]) + ")");
    }
  }

  // Walk every chain; anything that does not hit the root within three hops
  // is a cycle or an over-deep chain.
  for (int j = 0; j < k; ++j) {
    int cur = j;
    int hops = 0;
    while (cur != kRootParent && hops <= kMaxChainHops) {
      cur = spec.parent[cur];
      ++hops;
      if (cur == j) {
        report.push_back("cycle: parent chain of joint " +
                         joint_label(spec, j) + " revisits it");
        break;
      }
      if (cur != kRootParent && (cur < 0 || cur >= k)) break;  // reported above
    }
    if (cur != kRootParent && hops > kMaxChainHops) {
      report.push_back("chain too deep: joint " + joint_label(spec, j) +
                       " does not reach the root within " +
                       std::to_string(kMaxChainHops) + " hops");
    }
  }

  return report;
}

ArticulatedPath articulated_path(const SkeletonSpec& spec, int joint) {
  if (joint < 0 || joint >= spec.joint_count()) {
    throw Error::data("articulated_path: joint index " +
                      std::to_string(joint) + " out of range [0, " +
                      std::to_string(spec.joint_count()) + ")");
  }
  ArticulatedPath path;
  path.joint_index = joint;
  int cur = joint;
  int hops = 0;
  while (cur != kRootParent) {
    if (hops > kMaxChainHops || cur < 0 || cur >= spec.joint_count()) {
      throw Error::data("articulated_path: malformed parent chain at joint " +
                        std::to_string(joint));
    }
    path.ordered_joints.push_back(cur);
    cur = spec.parent[cur];
    ++hops;
  }
  std::reverse(path.ordered_joints.begin(), path.ordered_joints.end());
  return path;
}

SkeletonSpec default_mpii16() {
  SkeletonSpec s;
  s.name = "mpii16";
  s.dim = 2;
  s.joint_names = {"r_ankle",    "r_knee",  "r_hip",      "l_hip",
                   "l_knee",     "l_ankle", "pelvis",     "thorax",
                   "upper_neck", "head_top", "r_wrist",   "r_elbow",
                   "r_shoulder", "l_shoulder", "l_elbow", "l_wrist"};
  s.hierarchy_level = {4, 3, 2, 2, 3, 4, 2, 2, 3, 3, 4, 3, 2, 2, 3, 4};
  const int R = kRootParent;
  //           ank kne hip hip kne ank pel tho nek hed wri elb sho sho elb wri
  s.parent = {1, 2, R, R, 3, 4, R, R, 7, 7, 11, 12, R, R, 13, 14};
  return s;
}

SkeletonSpec default_coco17() {
  SkeletonSpec s;
  s.name = "coco17";
  s.dim = 2;
  s.joint_names = {"nose",       "l_eye",      "r_eye",     "l_ear",
                   "r_ear",      "l_shoulder", "r_shoulder", "l_elbow",
                   "r_elbow",    "l_wrist",    "r_wrist",   "l_hip",
                   "r_hip",      "l_knee",     "r_knee",    "l_ankle",
                   "r_ankle"};
  s.hierarchy_level = {2, 3, 3, 4, 4, 2, 2, 3, 3, 4, 4, 2, 2, 3, 3, 4, 4};
  const int R = kRootParent;
  // Face chain runs nose -> eye -> ear; limbs follow shoulder -> elbow ->
  // wrist and hip -> knee -> ankle.
  s.parent = {R, 0, 0, 1, 2, R, R, 5, 6, 7, 8, R, R, 11, 12, 13, 14};
  return s;
}

SkeletonSpec default_panoptic15_3d() {
  SkeletonSpec s;
  s.name = "panoptic15-3d";
  s.dim = 3;
  s.joint_names = {"neck",    "nose",    "mid_hip",    "l_shoulder",
                   "l_elbow", "l_wrist", "l_hip",      "l_knee",
                   "l_ankle", "r_shoulder", "r_elbow", "r_wrist",
                   "r_hip",   "r_knee",  "r_ankle"};
  s.hierarchy_level = {2, 3, 2, 2, 3, 4, 2, 3, 4, 2, 3, 4, 2, 3, 4};
  const int R = kRootParent;
  s.parent = {R, 0, R, R, 3, 4, R, 6, 7, R, 9, 10, R, 12, 13};
  return s;
}

SkeletonSpec default_toy6() {
  SkeletonSpec s;
  s.name = "toy6";
  s.dim = 2;
  s.joint_names = {"chest", "hip", "elbow", "hand", "knee", "foot"};
  s.hierarchy_level = {2, 2, 3, 4, 3, 4};
  const int R = kRootParent;
  s.parent = {R, R, 0, 2, 1, 4};
  return s;
}

SkeletonSpec skeleton_preset(const std::string& name) {
  if (name == "mpii16") return default_mpii16();
  if (name == "coco17") return default_coco17();
  if (name == "panoptic15-3d") return default_panoptic15_3d();
  if (name == "toy6") return default_toy6();
  throw Error::data("unknown skeleton preset '" + name + "'");
}

bool is_skeleton_preset(const std::string& name) {
  return name == "mpii16" || name == "coco17" || name == "panoptic15-3d" ||
         name == "toy6";
}

}  // namespace spr
