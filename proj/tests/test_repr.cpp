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

#include <cmath>
#include <cstdint>

#include "doctest.h"
#include "error.hpp"
#include "oracles.hpp"
#include "repr.hpp"
#include "rng.hpp"
#include "skeleton.hpp"

using namespace spr;

namespace {

Pose make_pose(std::initializer_list<Vec> coords, int dim = 2) {
  Pose p;
  p.dim = dim;
  for (const Vec& v : coords) p.joints.push_back({v, true});
  return p;
}

bool same_joint(const Joint& a, const Joint& b) {
  return a.visible == b.visible &&
         (!a.visible || (a.p.x == b.p.x && a.p.y == b.p.y && a.p.z == b.p.z));
}

bool same_pose(const Pose& a, const Pose& b) {
  if (a.joint_count() != b.joint_count()) return false;
  for (int j = 0; j < a.joint_count(); ++j) {
    if (!same_joint(a.joints[size_t(j)], b.joints[size_t(j)])) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("centroid of two points is their midpoint") {
  const Pose p = make_pose({{0, 0}, {10, 20}});
  const Vec r = centroid_root(p);
  CHECK(r.x == 5.0);
  CHECK(r.y == 10.0);
}

TEST_CASE("centroid of a single visible joint is that joint") {
  const Pose p = make_pose({{4, 7}});
  const Vec r = centroid_root(p);
  CHECK(r.x == 4.0);
  CHECK(r.y == 7.0);
}

TEST_CASE("centroid of three points matches the hand mean") {
  const Pose p = make_pose({{0, 0}, {6, 0}, {0, 6}});
  const Vec r = centroid_root(p);
  CHECK(r.x == 2.0);
  CHECK(r.y == 2.0);
}

TEST_CASE("centroid skips invisible joints") {
  Pose p = make_pose({{0, 0}, {10, 20}, {1000, 1000}});
  p.joints[2].visible = false;
  const Vec r = centroid_root(p);
  CHECK(r.x == 5.0);
  CHECK(r.y == 10.0);
}

TEST_CASE("centroid of an all-invisible pose is an error") {
  Pose p = make_pose({{1, 2}});
  p.joints[0].visible = false;
  CHECK_THROWS_AS(centroid_root(p), Error);
}

TEST_CASE("root-relative displacement is a direct subtraction") {
  const Pose p = make_pose({{13, 14}});
  const StructuredPose sp = encode_spr(p, {10, 10});
  REQUIRE(sp.displacements[0].has_value());
  CHECK(sp.displacements[0]->x == 3.0);
  CHECK(sp.displacements[0]->y == 4.0);
}

TEST_CASE("joint on the root gives a zero displacement") {
  const Pose p = make_pose({{10, 10}});
  const StructuredPose sp = encode_spr(p, {10, 10});
  REQUIRE(sp.displacements[0].has_value());
  CHECK(sp.displacements[0]->x == 0.0);
  CHECK(sp.displacements[0]->y == 0.0);
}

TEST_CASE("3D displacement subtracts per component") {
  Pose p = make_pose({{13, 14, 96}}, 3);
  const StructuredPose sp = encode_spr(p, {10, 10, 100});
  REQUIRE(sp.displacements[0].has_value());
  CHECK(sp.displacements[0]->x == 3.0);
  CHECK(sp.displacements[0]->y == 4.0);
  CHECK(sp.displacements[0]->z == -4.0);
}

TEST_CASE("decode places joints at root plus displacement") {
  StructuredPose sp;
  sp.dim = 2;
  sp.root = {0, 0};
  sp.displacements = {Vec{1, 0}, Vec{0, 1}};
  const Pose p = decode_spr(sp);
  CHECK(p.joints[0].p.x == 1.0);
  CHECK(p.joints[0].p.y == 0.0);
  CHECK(p.joints[1].p.x == 0.0);
  CHECK(p.joints[1].p.y == 1.0);
}

TEST_CASE("all-zero displacements decode to the root") {
  StructuredPose sp;
  sp.root = {5, 6};
  sp.displacements = {Vec{0, 0}, Vec{0, 0}};
  const Pose p = decode_spr(sp);
  for (const Joint& j : p.joints) {
    CHECK(j.p.x == 5.0);
    CHECK(j.p.y == 6.0);
  }
}

TEST_CASE("hier displacements along a chain subtract successively") {
  // Chain: root (0,0) -> shoulder (0,5) -> elbow (2,8) -> wrist (3,10),
  // levels 2, 3, 4.
  SkeletonSpec s;
  s.name = "chain3";
  s.dim = 2;
  s.joint_names = {"shoulder", "elbow", "wrist"};
  s.hierarchy_level = {2, 3, 4};
  s.parent = {kRootParent, 0, 1};
  REQUIRE(validate(s).empty());
  const Pose p = make_pose({{0, 5}, {2, 8}, {3, 10}});
  const HierStructuredPose hp = encode_hier(p, {0, 0}, s);
  REQUIRE(hp.hier_displacements[0].has_value());
  CHECK(hp.hier_displacements[0]->x == 0.0);
  CHECK(hp.hier_displacements[0]->y == 5.0);
  CHECK(hp.hier_displacements[1]->x == 2.0);
  CHECK(hp.hier_displacements[1]->y == 3.0);
  CHECK(hp.hier_displacements[2]->x == 1.0);
  CHECK(hp.hier_displacements[2]->y == 2.0);

  // Accumulating the same three links lands on the wrist.
  const Pose back = decode_hier(hp);
  CHECK(back.joints[2].p.x == 3.0);
  CHECK(back.joints[2].p.y == 10.0);
}

TEST_CASE("root-parented joints carry their root-relative displacement") {
  const SkeletonSpec s = default_mpii16();
  SplitMix64 rng(91);
  const Pose p = testutil::continuous_pose(rng, s.joint_count(), 2, 0.0, 50.0);
  const Vec root = centroid_root(p);
  const StructuredPose sp = encode_spr(p, root);
  const HierStructuredPose hp = encode_hier(p, root, s);
  for (int j = 0; j < s.joint_count(); ++j) {
    if (s.parent[size_t(j)] != kRootParent) continue;
    CHECK(hp.hier_displacements[size_t(j)]->x == sp.displacements[size_t(j)]->x);
    CHECK(hp.hier_displacements[size_t(j)]->y == sp.displacements[size_t(j)]->y);
  }
}

TEST_CASE("invisible joint stays absent, visible parent stays present") {
  const SkeletonSpec s = default_mpii16();
  SplitMix64 rng(92);
  Pose p = testutil::continuous_pose(rng, s.joint_count(), 2, 0.0, 50.0);
  const int wrist = s.joint_index("l_wrist");
  const int elbow = s.joint_index("l_elbow");
  p.joints[size_t(wrist)].visible = false;
  const HierStructuredPose hp = encode_hier(p, centroid_root(p), s);
  CHECK(!hp.hier_displacements[size_t(wrist)].has_value());
  CHECK(hp.hier_displacements[size_t(elbow)].has_value());
}

TEST_CASE("invisible ancestor removes the whole descendant chain") {
  const SkeletonSpec s = default_mpii16();
  SplitMix64 rng(93);
  Pose p = testutil::continuous_pose(rng, s.joint_count(), 2, 0.0, 50.0);
  p.joints[size_t(s.joint_index("l_elbow"))].visible = false;
  const HierStructuredPose hp = encode_hier(p, centroid_root(p), s);
  CHECK(!hp.hier_displacements[size_t(s.joint_index("l_elbow"))].has_value());
  CHECK(!hp.hier_displacements[size_t(s.joint_index("l_wrist"))].has_value());
  CHECK(hp.hier_displacements[size_t(s.joint_index("l_shoulder"))].has_value());
}

TEST_CASE("3D chain accumulates z additively") {
  SkeletonSpec s;
  s.name = "chain2z";
  s.dim = 3;
  s.joint_names = {"a", "b"};
  s.hierarchy_level = {2, 3};
  s.parent = {kRootParent, 0};
  REQUIRE(validate(s).empty());
  HierStructuredPose hp;
  hp.dim = 3;
  hp.root = {0, 0, 10};
  hp.hier_displacements = {Vec{0, 0, 2}, Vec{0, 0, 3}};
  hp.skeleton = &s;
  const Pose p = decode_hier(hp);
  CHECK(p.joints[1].p.z == 15.0);
}

TEST_CASE("spr/hier conversion subtracts the parent displacement") {
  SkeletonSpec s;
  s.name = "chain2";
  s.dim = 2;
  s.joint_names = {"shoulder", "elbow"};
  s.hierarchy_level = {2, 3};
  s.parent = {kRootParent, 0};
  StructuredPose sp;
  sp.root = {0, 0};
  sp.displacements = {Vec{0, 5}, Vec{2, 8}};
  const HierStructuredPose hp = spr_to_hier(sp, s);
  CHECK(hp.hier_displacements[1]->x == 2.0);
  CHECK(hp.hier_displacements[1]->y == 3.0);
  const StructuredPose back = hier_to_spr(hp);
  CHECK(back.displacements[1]->x == 2.0);
  CHECK(back.displacements[1]->y == 8.0);
}

TEST_CASE("lattice round trips are bit-exact across representations") {
  // Coordinates on the 1/16-pixel lattice make every difference and short
  // sum exact in doubles, so the identities must hold bitwise.
  const SkeletonSpec s = default_mpii16();
  SplitMix64 rng(101);
  for (int trial = 0; trial < 2000; ++trial) {
    const Pose p = testutil::lattice_pose(rng, s.joint_count(), 2, 96.0);
    const Vec root = testutil::oracle_centroid(p);
    const StructuredPose sp = encode_spr(p, root);
    CHECK(same_pose(decode_spr(sp), p));
    const HierStructuredPose hp = encode_hier(p, root, s);
    CHECK(same_pose(decode_hier(hp), p));
    const StructuredPose sp2 = hier_to_spr(spr_to_hier(sp, s));
    CHECK(same_pose(decode_spr(sp2), p));
  }
}

TEST_CASE("hier accumulation equals the direct displacement within 1e-9") {
  const SkeletonSpec s = default_mpii16();
  SplitMix64 rng(102);
  double worst = 0.0;
  for (int trial = 0; trial < 2000; ++trial) {
    const Pose p = testutil::continuous_pose(rng, s.joint_count(), 2, 0.0, 500.0);
    const Vec root = centroid_root(p);
    const StructuredPose sp = encode_spr(p, root);
    const HierStructuredPose hp = encode_hier(p, root, s);
    for (int j = 0; j < s.joint_count(); ++j) {
      Vec sum = {0, 0, 0};
      const ArticulatedPath path = articulated_path(s, j);
      for (int link : path.ordered_joints) {
        sum = sum + *hp.hier_displacements[size_t(link)];
      }
      worst = std::max(worst, std::abs(sum.x - sp.displacements[size_t(j)]->x));
      worst = std::max(worst, std::abs(sum.y - sp.displacements[size_t(j)]->y));
    }
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("translation leaves displacements unchanged, moves decodes") {
  const SkeletonSpec s = default_mpii16();
  SplitMix64 rng(103);
  const Pose p = testutil::continuous_pose(rng, s.joint_count(), 2, 0.0, 50.0);
  const Vec root = centroid_root(p);
  const Vec t = {17.0, -4.0, 0.0};
  Pose moved = p;
  for (Joint& j : moved.joints) j.p = j.p + t;
  const StructuredPose a = encode_spr(p, root);
  const StructuredPose b = encode_spr(moved, root + t);
  for (int j = 0; j < s.joint_count(); ++j) {
    CHECK(b.displacements[size_t(j)]->x ==
          doctest::Approx(a.displacements[size_t(j)]->x).epsilon(1e-12));
    CHECK(b.displacements[size_t(j)]->y ==
          doctest::Approx(a.displacements[size_t(j)]->y).epsilon(1e-12));
  }
}

TEST_CASE("decode_hier rejects a visible joint with an absent ancestor") {
  SkeletonSpec s;
  s.name = "chain2";
  s.dim = 2;
  s.joint_names = {"shoulder", "elbow"};
  s.hierarchy_level = {2, 3};
  s.parent = {kRootParent, 0};
  HierStructuredPose hp;
  hp.root = {0, 0};
  hp.hier_displacements = {std::nullopt, Vec{1, 1}};
  hp.skeleton = &s;
  CHECK_THROWS_AS(decode_hier(hp), Error);
}
