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
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "synth.hpp"

using namespace spr;

namespace {

bool same_scene(const Scene& a, const Scene& b) {
  if (a.image_height != b.image_height || a.image_width != b.image_width ||
      a.persons.size() != b.persons.size())
    return false;
  for (size_t p = 0; p < a.persons.size(); ++p) {
    const Pose& pa = a.persons[p];
    const Pose& pb = b.persons[p];
    if (pa.dim != pb.dim || pa.joints.size() != pb.joints.size()) return false;
    for (size_t j = 0; j < pa.joints.size(); ++j) {
      if (pa.joints[j].visible != pb.joints[j].visible) return false;
      if (pa.joints[j].p.x != pb.joints[j].p.x) return false;
      if (pa.joints[j].p.y != pb.joints[j].p.y) return false;
      if (pa.dim == 3 && pa.joints[j].p.z != pb.joints[j].p.z) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("a single constrained person stays inside the image") {
  SynthConfig cfg;
  cfg.seed = 5;
  cfg.n_min = cfg.n_max = 1;
  cfg.image_height = cfg.image_width = 64;
  for (uint64_t i = 0; i < 20; ++i) {
    const GeneratedScene g = generate_scene(cfg, i);
    REQUIRE(g.scene.persons.size() == 1);
    for (const Joint& j : g.scene.persons[0].joints) {
      REQUIRE(j.visible);
      CHECK(j.p.x >= 0.0);
      CHECK(j.p.y >= 0.0);
      CHECK(j.p.x <= 63.0);
      CHECK(j.p.y <= 63.0);
    }
  }
}

TEST_CASE("identical seeds reproduce scenes exactly") {
  SynthConfig cfg;
  cfg.seed = 77;
  cfg.n_min = 1;
  cfg.n_max = 3;
  for (uint64_t i = 0; i < 5; ++i) {
    const GeneratedScene a = generate_scene(cfg, i);
    const GeneratedScene b = generate_scene(cfg, i);
    CHECK(same_scene(a.scene, b.scene));
  }
  SynthConfig other = cfg;
  other.seed = 78;
  CHECK(!same_scene(generate_scene(cfg, 0).scene,
                    generate_scene(other, 0).scene));
}

TEST_CASE("rendering is deterministic and dimensioned like the image") {
  SynthConfig cfg;
  cfg.seed = 9;
  cfg.render = true;
  cfg.image_height = 48;
  cfg.image_width = 40;
  const GeneratedScene a = generate_scene(cfg, 3);
  const GeneratedScene b = generate_scene(cfg, 3);
  REQUIRE(a.image.height == 48);
  REQUIRE(a.image.width == 40);
  REQUIRE(a.image.rgb.size() == size_t(3) * 48 * 40);
  CHECK(a.image.rgb == b.image.rgb);
  for (const float v : a.image.rgb) {
    CHECK(v >= 0.0f);
    CHECK(v <= 1.0f);
  }
  SynthConfig plain = cfg;
  plain.render = false;
  CHECK(generate_scene(plain, 3).image.rgb.empty());
}

TEST_CASE("zero overlap keeps roots two sigmas apart") {
  SynthConfig cfg;
  cfg.seed = 101;
  cfg.n_min = 2;
  cfg.n_max = 3;
  cfg.overlap = 0.0;
  for (uint64_t i = 0; i < 100; ++i) {
    const GeneratedScene g = generate_scene(cfg, i);
    for (size_t a = 0; a < g.roots.size(); ++a)
      for (size_t b = a + 1; b < g.roots.size(); ++b) {
        const double dx = g.roots[a].x - g.roots[b].x;
        const double dy = g.roots[a].y - g.roots[b].y;
        CHECK(std::sqrt(dx * dx + dy * dy) >= 2.0 * cfg.sigma - 1e-9);
      }
  }
}

TEST_CASE("sampled roots are the visible-joint centroids") {
  SynthConfig cfg;
  cfg.seed = 103;
  cfg.n_min = 2;
  cfg.n_max = 2;
  const GeneratedScene g = generate_scene(cfg, 1);
  REQUIRE(g.roots.size() == g.scene.persons.size());
  for (size_t p = 0; p < g.roots.size(); ++p) {
    const Vec c = testutil::oracle_centroid(g.scene.persons[p]);
    CHECK(c.x == doctest::Approx(g.roots[p].x).epsilon(1e-9));
    CHECK(c.y == doctest::Approx(g.roots[p].y).epsilon(1e-9));
  }
}

TEST_CASE("generated poses respect the skeleton contract") {
  SynthConfig cfg;
  cfg.seed = 107;
  cfg.n_min = 1;
  cfg.n_max = 3;
  const SkeletonSpec spec = resolved_skeleton(cfg);
  CHECK(spec.validate().empty());
  for (uint64_t i = 0; i < 10; ++i) {
    const GeneratedScene g = generate_scene(cfg, i);
    for (const Pose& p : g.scene.persons) {
      CHECK(p.dim == spec.dim);
      CHECK(int(p.joints.size()) == spec.joint_count());
    }
  }
}

TEST_CASE("three-dimensional scenes sample depth inside the range") {
  SynthConfig cfg;
  cfg.seed = 109;
  cfg.dim = 3;
  cfg.n_min = 1;
  cfg.n_max = 2;
  const SkeletonSpec spec = resolved_skeleton(cfg);
  CHECK(spec.dim == 3);
  for (uint64_t i = 0; i < 10; ++i) {
    const GeneratedScene g = generate_scene(cfg, i);
    // Roots sample depth inside [depth_min, depth_max]; limbs spread at most
    // three links of z_limb_scale around it, recentered on the chain.
    for (const Pose& p : g.scene.persons)
      for (const Joint& j : p.joints) {
        CHECK(j.p.z >= cfg.depth_min - cfg.z_limb_scale * 6.0);
        CHECK(j.p.z <= cfg.depth_max + cfg.z_limb_scale * 6.0);
      }
  }
}

TEST_CASE("zero-magnitude perturbation is the identity") {
  SynthConfig cfg;
  cfg.seed = 113;
  const GeneratedScene g = generate_scene(cfg, 2);
  const Scene p = perturb_poses(g.scene, 0.0, 999);
  CHECK(same_scene(g.scene, p));
}

TEST_CASE("perturbation displacement grows linearly with magnitude") {
  // Isotropic noise of magnitude m: mean joint displacement is proportional
  // to m, checked at two magnitudes over thousands of joints.
  SynthConfig cfg;
  cfg.seed = 127;
  cfg.n_min = 3;
  cfg.n_max = 3;
  double sum1 = 0.0, sum4 = 0.0;
  int count = 0;
  for (uint64_t i = 0; i < 100; ++i) {
    const GeneratedScene g = generate_scene(cfg, i);
    const Scene s1 = perturb_poses(g.scene, 1.0, i);
    const Scene s4 = perturb_poses(g.scene, 4.0, i);
    for (size_t p = 0; p < g.scene.persons.size(); ++p)
      for (size_t j = 0; j < g.scene.persons[p].joints.size(); ++j) {
        if (!g.scene.persons[p].joints[j].visible) continue;
        const Vec& base = g.scene.persons[p].joints[j].p;
        const Vec& m1 = s1.persons[p].joints[j].p;
        const Vec& m4 = s4.persons[p].joints[j].p;
        sum1 += std::hypot(m1.x - base.x, m1.y - base.y);
        sum4 += std::hypot(m4.x - base.x, m4.y - base.y);
        ++count;
      }
  }
  REQUIRE(count > 1000);
  const double mean1 = sum1 / count;
  const double mean4 = sum4 / count;
  CHECK(mean1 > 0.0);
  CHECK(mean4 == doctest::Approx(4.0 * mean1).epsilon(0.05));
}

TEST_CASE("perturbation never touches visibility flags") {
  SynthConfig cfg;
  cfg.seed = 131;
  cfg.n_min = 2;
  cfg.n_max = 3;
  const GeneratedScene g = generate_scene(cfg, 4);
  const Scene p = perturb_poses(g.scene, 10.0, 5);
  REQUIRE(p.persons.size() == g.scene.persons.size());
  for (size_t i = 0; i < p.persons.size(); ++i)
    for (size_t j = 0; j < p.persons[i].joints.size(); ++j)
      CHECK(p.persons[i].joints[j].visible ==
            g.scene.persons[i].joints[j].visible);
}

TEST_CASE("config validation guards degenerate settings") {
  SynthConfig cfg;
  cfg.n_min = 0;
  CHECK_THROWS_AS(validate_config(cfg), Error);
  cfg = SynthConfig{};
  cfg.n_min = 3;
  cfg.n_max = 2;
  CHECK_THROWS_AS(validate_config(cfg), Error);
  cfg = SynthConfig{};
  cfg.image_height = 0;
  CHECK_THROWS_AS(validate_config(cfg), Error);
  cfg = SynthConfig{};
  cfg.overlap = 1.5;
  CHECK_THROWS_AS(validate_config(cfg), Error);
  cfg = SynthConfig{};
  cfg.dim = 4;
  CHECK_THROWS_AS(validate_config(cfg), Error);
  CHECK_NOTHROW(validate_config(SynthConfig{}));
}

TEST_CASE("skeleton resolution rejects dimension conflicts") {
  SynthConfig cfg;
  cfg.dim = 3;
  cfg.skeleton = default_toy6();  // planar skeleton, conflicting dim
  CHECK_THROWS_AS(resolved_skeleton(cfg), Error);
  cfg = SynthConfig{};
  cfg.skeleton = default_toy6();
  CHECK_NOTHROW(resolved_skeleton(cfg));
  cfg = SynthConfig{};
  cfg.dim = 3;
  CHECK(resolved_skeleton(cfg).name == default_panoptic15_3d().name);
}

TEST_CASE("impossible separation constraints fail loudly") {
  // Ten people two sigmas apart cannot fit a tiny image; generation retries
  // then reports the contradiction.
  SynthConfig cfg;
  cfg.seed = 137;
  cfg.n_min = cfg.n_max = 10;
  cfg.image_height = cfg.image_width = 16;
  cfg.overlap = 0.0;
  CHECK_THROWS_AS(generate_scene(cfg, 0), Error);
}
