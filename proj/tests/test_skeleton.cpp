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

#include <string>
#include <vector>

#include "doctest.h"
#include "error.hpp"
#include "skeleton.hpp"

using namespace spr;

namespace {

bool contains(const std::vector<std::string>& report,
              const std::string& needle) {
  for (const std::string& line : report) {
    if (line.find(needle) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("mpii16 preset is valid and has 16 joints") {
  const SkeletonSpec s = default_mpii16();
  CHECK(s.joint_count() == 16);
  CHECK(s.dim == 2);
  CHECK(validate(s).empty());
  // validate is pure: a second call sees the same spec and says the same.
  CHECK(validate(s).empty());
}

TEST_CASE("four-hierarchy levels of the mpii16 preset") {
  const SkeletonSpec s = default_mpii16();
  CHECK(s.hierarchy_level[size_t(s.joint_index("r_ankle"))] == 4);
  CHECK(s.hierarchy_level[size_t(s.joint_index("l_wrist"))] == 4);
  CHECK(s.hierarchy_level[size_t(s.joint_index("r_elbow"))] == 3);
  CHECK(s.hierarchy_level[size_t(s.joint_index("l_knee"))] == 3);
  CHECK(s.hierarchy_level[size_t(s.joint_index("l_shoulder"))] == 2);
  CHECK(s.hierarchy_level[size_t(s.joint_index("r_hip"))] == 2);
  CHECK(s.hierarchy_level[size_t(s.joint_index("thorax"))] == 2);
  CHECK(s.hierarchy_level[size_t(s.joint_index("pelvis"))] == 2);
}

TEST_CASE("level gap between parent and child is rejected") {
  SkeletonSpec s = default_mpii16();
  // Re-parent a wrist (level 4) onto a hip (level 2): skips level 3.
  s.parent[size_t(s.joint_index("l_wrist"))] = s.joint_index("l_hip");
  CHECK(contains(validate(s), "level gap"));
}

TEST_CASE("self-parenting is reported as a cycle") {
  SkeletonSpec s = default_mpii16();
  const int j = s.joint_index("l_elbow");
  s.parent[size_t(j)] = j;
  CHECK(contains(validate(s), "cycle"));
}

TEST_CASE("duplicate joint names are rejected") {
  SkeletonSpec s = default_mpii16();
  s.joint_names[0] = "l_wrist";
  CHECK(contains(validate(s), "duplicate"));
}

TEST_CASE("articulated path of a wrist runs shoulder, elbow, wrist") {
  const SkeletonSpec s = default_mpii16();
  const ArticulatedPath p = articulated_path(s, s.joint_index("l_wrist"));
  REQUIRE(p.ordered_joints.size() == 3);
  CHECK(p.ordered_joints[0] == s.joint_index("l_shoulder"));
  CHECK(p.ordered_joints[1] == s.joint_index("l_elbow"));
  CHECK(p.ordered_joints[2] == s.joint_index("l_wrist"));
}

TEST_CASE("articulated path of an ankle runs hip, knee, ankle") {
  const SkeletonSpec s = default_mpii16();
  const ArticulatedPath p = articulated_path(s, s.joint_index("l_ankle"));
  REQUIRE(p.ordered_joints.size() == 3);
  CHECK(p.ordered_joints[0] == s.joint_index("l_hip"));
  CHECK(p.ordered_joints[1] == s.joint_index("l_knee"));
  CHECK(p.ordered_joints[2] == s.joint_index("l_ankle"));
}

TEST_CASE("root-parented joint has a single-link path") {
  const SkeletonSpec s = default_mpii16();
  const int j = s.joint_index("thorax");
  const ArticulatedPath p = articulated_path(s, j);
  REQUIRE(p.ordered_joints.size() == 1);
  CHECK(p.ordered_joints[0] == j);
}

TEST_CASE("every path ends at its joint and starts at a root-parented one") {
  for (const char* preset : {"mpii16", "coco17", "panoptic15-3d", "toy6"}) {
    const SkeletonSpec s = skeleton_preset(preset);
    for (int j = 0; j < s.joint_count(); ++j) {
      const ArticulatedPath p = articulated_path(s, j);
      REQUIRE(!p.ordered_joints.empty());
      CHECK(p.joint_index == j);
      CHECK(p.ordered_joints.back() == j);
      CHECK(s.parent[size_t(p.ordered_joints.front())] == kRootParent);
      // Levels step one at a time from 2.
      for (size_t i = 0; i < p.ordered_joints.size(); ++i) {
        CHECK(s.hierarchy_level[size_t(p.ordered_joints[i])] ==
              2 + static_cast<int>(i));
      }
    }
  }
}

TEST_CASE("articulated path rejects out-of-range joints") {
  const SkeletonSpec s = default_mpii16();
  CHECK_THROWS_AS(articulated_path(s, -1), Error);
  CHECK_THROWS_AS(articulated_path(s, s.joint_count()), Error);
}

TEST_CASE("all presets validate cleanly") {
  CHECK(validate(default_mpii16()).empty());
  CHECK(validate(default_coco17()).empty());
  CHECK(validate(default_panoptic15_3d()).empty());
  CHECK(validate(default_toy6()).empty());
}

TEST_CASE("preset lookup by name") {
  CHECK(skeleton_preset("mpii16").joint_count() == 16);
  CHECK(skeleton_preset("coco17").joint_count() == 17);
  CHECK(skeleton_preset("panoptic15-3d").joint_count() == 15);
  CHECK(skeleton_preset("panoptic15-3d").dim == 3);
  CHECK(skeleton_preset("toy6").joint_count() == 6);
  CHECK(is_skeleton_preset("mpii16"));
  CHECK(!is_skeleton_preset("mpii17"));
  CHECK_THROWS_AS(skeleton_preset("mpii17"), Error);
}

TEST_CASE("joint_index resolves names and signals absence") {
  const SkeletonSpec s = default_toy6();
  CHECK(s.joint_index("chest") == 0);
  CHECK(s.joint_index("foot") == 5);
  CHECK(s.joint_index("tail") == -1);
}
