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

#include "synth.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"
#include "rng.hpp"

namespace spr {

namespace {

constexpr int kRootAttempts = 200;   // per person
constexpr int kPoseAttempts = 100;   // per person, bounds re-check
constexpr int kSceneAttempts = 20;   // whole-scene restarts

const LimbRange& range_for_level(const SynthConfig& cfg, int level) {
  switch (level) {
    case 2: return cfg.len_level2;
    case 3: return cfg.len_level3;
    default: return cfg.len_level4;
  }
}

// Unit planar direction by rejection; avoids tiny radii so the divide stays
// well conditioned.
void sample_direction(SplitMix64& rng, double& dx, double& dy) {
  double x, y;
  for (;;) {
    unit_disc(rng, x, y);
    const double r2 = x * x + y * y;
    if (r2 >= 0.01) {
      const double inv = 1.0 / std::sqrt(r2);
      dx = x * inv;
      dy = y * inv;
      return;
    }
  }
}

std::vector<int> level_order(const SkeletonSpec& spec) {
  std::vector<int> order;
  for (int level = 2; level <= 4; ++level) {
    for (int j = 0; j < spec.joint_count(); ++j) {
      if (spec.hierarchy_level[j] == level) order.push_back(j);
    }
  }
  return order;
}

// One candidate pose around `root`; returns false when a joint lands outside
// the safe image interior.
bool sample_pose(const SynthConfig& cfg, const SkeletonSpec& spec,
                 const Vec& root, const std::vector<int>& order,
                 SplitMix64& rng, Pose& out) {
  const int k = spec.joint_count();
  out.dim = cfg.dim;
  out.joints.assign(k, Joint{});
  for (int j : order) {
    const int par = spec.parent[j];
    const Vec anchor = (par == kRootParent) ? root : out.joints[par].p;
    double dx, dy;
    sample_direction(rng, dx, dy);
    const LimbRange& lr = range_for_level(cfg, spec.hierarchy_level[j]);
    const double len = rng.uniform(lr.min_len, lr.max_len);
    Joint& joint = out.joints[j];
    joint.p.x = anchor.x + len * dx;
    joint.p.y = anchor.y + len * dy;
    if (cfg.dim == 3) {
      joint.p.z = anchor.z + rng.uniform(-cfg.z_limb_scale, cfg.z_limb_scale);
    }
    joint.visible = true;
  }
  // Translate so the visible-joint centroid lands exactly on the sampled
  // root; every joint is visible here.
  Vec c{0, 0, 0};
  for (const Joint& joint : out.joints) c = c + joint.p;
  const double inv = 1.0 / double(k);
  c = Vec{c.x * inv, c.y * inv, c.z * inv};
  const Vec shift = root - c;
  for (Joint& joint : out.joints) joint.p = joint.p + shift;

  for (const Joint& joint : out.joints) {
    if (joint.p.x < 1.0 || joint.p.x > cfg.image_width - 2.0 ||
        joint.p.y < 1.0 || joint.p.y > cfg.image_height - 2.0) {
      return false;
    }
  }
  return true;
}

struct Palette {
  float r, g, b;
};

// Joint markers are colored by joint identity, not person, so every channel
// of the displacement head has a stable visual cue to regress toward.
constexpr Palette kJointColors[6] = {
    {0.95f, 0.25f, 0.25f}, {0.25f, 0.95f, 0.25f}, {0.30f, 0.45f, 0.95f},
    {0.95f, 0.85f, 0.25f}, {0.90f, 0.30f, 0.90f}, {0.25f, 0.90f, 0.90f},
};

void blend(RenderedImage& img, int y, int x, float cr, float cg, float cb,
           float alpha) {
  if (alpha <= 0.0f) return;
  if (alpha > 1.0f) alpha = 1.0f;
  const size_t plane = size_t(img.height) * img.width;
  const size_t i = size_t(y) * img.width + x;
  img.rgb[i] += alpha * (cr - img.rgb[i]);
  img.rgb[plane + i] += alpha * (cg - img.rgb[plane + i]);
  img.rgb[2 * plane + i] += alpha * (cb - img.rgb[2 * plane + i]);
}

void draw_segment(RenderedImage& img, const Vec& a, const Vec& b,
                  const Palette& color, double half_width) {
  const int x0 = std::max(0, int(std::floor(std::min(a.x, b.x) - 2)));
  const int x1 = std::min(img.width - 1, int(std::ceil(std::max(a.x, b.x) + 2)));
  const int y0 = std::max(0, int(std::floor(std::min(a.y, b.y) - 2)));
  const int y1 = std::min(img.height - 1, int(std::ceil(std::max(a.y, b.y) + 2)));
  const double vx = b.x - a.x;
  const double vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double px = x - a.x;
      const double py = y - a.y;
      double t = len2 > 0 ? (px * vx + py * vy) / len2 : 0.0;
      t = std::clamp(t, 0.0, 1.0);
      const double dx = px - t * vx;
      const double dy = py - t * vy;
      const double dist = std::sqrt(dx * dx + dy * dy);
      const double cov = half_width + 0.5 - dist;
      if (cov > 0) {
        blend(img, y, x, color.r, color.g, color.b,
              static_cast<float>(std::min(1.0, cov)));
      }
    }
  }
}

void draw_disc(RenderedImage& img, const Vec& center, const Palette& color,
               double radius) {
  const int x0 = std::max(0, int(std::floor(center.x - radius - 1)));
  const int x1 = std::min(img.width - 1, int(std::ceil(center.x + radius + 1)));
  const int y0 = std::max(0, int(std::floor(center.y - radius - 1)));
  const int y1 = std::min(img.height - 1, int(std::ceil(center.y + radius + 1)));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double dx = x - center.x;
      const double dy = y - center.y;
      const double cov = radius + 0.5 - std::sqrt(dx * dx + dy * dy);
      if (cov > 0) {
        blend(img, y, x, color.r, color.g, color.b,
              static_cast<float>(std::min(1.0, cov)));
      }
    }
  }
}

RenderedImage render_scene(const SynthConfig& cfg, const SkeletonSpec& spec,
                           const Scene& scene, const std::vector<Vec>& roots,
                           SplitMix64& rng) {
  RenderedImage img;
  img.height = cfg.image_height;
  img.width = cfg.image_width;
  img.rgb.assign(size_t(3) * img.height * img.width, 0.0f);

  // Smooth value-noise background with per-pixel jitter.
  const int cell = 8;
  const int gh = img.height / cell + 2;
  const int gw = img.width / cell + 2;
  std::vector<double> grid(size_t(gh) * gw);
  for (double& v : grid) v = rng.uniform(0.15, 0.45);
  const size_t plane = size_t(img.height) * img.width;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const double gy = double(y) / cell;
      const double gx = double(x) / cell;
      const int iy = int(gy);
      const int ix = int(gx);
      const double fy = gy - iy;
      const double fx = gx - ix;
      const double v00 = grid[size_t(iy) * gw + ix];
      const double v01 = grid[size_t(iy) * gw + ix + 1];
      const double v10 = grid[size_t(iy + 1) * gw + ix];
      const double v11 = grid[size_t(iy + 1) * gw + ix + 1];
      const double base = v00 * (1 - fy) * (1 - fx) + v01 * (1 - fy) * fx +
                          v10 * fy * (1 - fx) + v11 * fy * fx;
      const double jitter = rng.uniform(-0.02, 0.02);
      const size_t i = size_t(y) * img.width + x;
      img.rgb[i] = static_cast<float>(std::clamp(base * 0.95 + jitter, 0.0, 1.0));
      img.rgb[plane + i] =
          static_cast<float>(std::clamp(base + jitter, 0.0, 1.0));
      img.rgb[2 * plane + i] =
          static_cast<float>(std::clamp(base * 1.05 + jitter, 0.0, 1.0));
    }
  }

  const Palette limb{0.70f, 0.70f, 0.68f};
  const Palette marker{1.0f, 1.0f, 1.0f};
  for (int i = 0; i < scene.person_count(); ++i) {
    const Pose& pose = scene.persons[i];
    for (int j = 0; j < pose.joint_count(); ++j) {
      const int par = spec.parent[j];
      const Vec from = (par == kRootParent) ? roots[i] : pose.joints[par].p;
      draw_segment(img, from, pose.joints[j].p, limb, 0.9);
    }
    for (int j = 0; j < pose.joint_count(); ++j) {
      draw_disc(img, pose.joints[j].p, kJointColors[j % 6], 1.4);
    }
    // Centroid marker: the confidence target peaks here, and a bright
    // local blob keeps root localization learnable for a small network.
    draw_disc(img, roots[i], marker, 2.0);
  }
  return img;
}

}  // namespace

void validate_config(const SynthConfig& cfg) {
  if (cfg.n_min < 0 || cfg.n_max < cfg.n_min) {
    throw Error::data("synth config: need 0 <= n_min <= n_max");
  }
  if (cfg.image_height < 8 || cfg.image_width < 8) {
    throw Error::data("synth config: image dims must be at least 8");
  }
  if (cfg.dim != 2 && cfg.dim != 3) {
    throw Error::data("synth config: dim must be 2 or 3");
  }
  for (const LimbRange* r : {&cfg.len_level2, &cfg.len_level3, &cfg.len_level4}) {
    if (!(r->min_len > 0.0) || r->max_len < r->min_len) {
      throw Error::data("synth config: limb ranges must be positive and ordered");
    }
  }
  if (cfg.overlap < 0.0 || cfg.overlap > 1.0) {
    throw Error::data("synth config: overlap must be in [0, 1]");
  }
  if (!(cfg.sigma > 0.0)) throw Error::data("synth config: sigma must be > 0");
  if (cfg.dim == 3 && !(cfg.depth_max >= cfg.depth_min)) {
    throw Error::data("synth config: depth range must be ordered");
  }
  if (!(cfg.ref_length > 0.0)) {
    throw Error::data("synth config: ref_length must be > 0");
  }
}

SkeletonSpec resolved_skeleton(const SynthConfig& cfg) {
  SkeletonSpec spec = cfg.skeleton;
  if (spec.joint_names.empty()) {
    spec = cfg.dim == 3 ? default_panoptic15_3d() : default_toy6();
  }
  if (spec.dim != cfg.dim) {
    throw Error::data("synth config: skeleton dim does not match config dim");
  }
  const std::vector<std::string> report = validate(spec);
  if (!report.empty()) {
    throw Error::data("synth config: invalid skeleton: " + report.front());
  }
  return spec;
}

GeneratedScene generate_scene(const SynthConfig& cfg, uint64_t index) {
  validate_config(cfg);
  const SkeletonSpec spec = resolved_skeleton(cfg);

  SplitMix64 rng = SplitMix64::fork(cfg.seed, index * 2);
  const double min_sep = 2.0 * cfg.sigma * (1.0 - cfg.overlap);
  const double reach = cfg.len_level2.max_len + cfg.len_level3.max_len +
                       cfg.len_level4.max_len;
  const double margin = std::min(reach, 0.45 * std::min(cfg.image_width - 1,
                                                        cfg.image_height - 1));
  const std::vector<int> order = level_order(spec);

  GeneratedScene out;
  out.scene.dim = cfg.dim;
  out.scene.image_height = cfg.image_height;
  out.scene.image_width = cfg.image_width;

  const int span = cfg.n_max - cfg.n_min;
  const int n = cfg.n_min + (span > 0 ? int(rng.below(uint64_t(span) + 1)) : 0);

  for (int attempt = 0; attempt < kSceneAttempts; ++attempt) {
    std::vector<Vec> roots;
    std::vector<Pose> persons;
    bool ok = true;
    for (int i = 0; ok && i < n; ++i) {
      bool placed = false;
      for (int rt = 0; rt < kRootAttempts && !placed; ++rt) {
        Vec root;
        root.x = rng.uniform(margin, cfg.image_width - 1.0 - margin);
        root.y = rng.uniform(margin, cfg.image_height - 1.0 - margin);
        if (cfg.dim == 3) root.z = rng.uniform(cfg.depth_min, cfg.depth_max);
        bool separated = true;
        for (const Vec& other : roots) {
          const double dx = root.x - other.x;
          const double dy = root.y - other.y;
          if (dx * dx + dy * dy < min_sep * min_sep) {
            separated = false;
            break;
          }
        }
        if (!separated) continue;
        Pose pose;
        bool fits = false;
        for (int pt = 0; pt < kPoseAttempts && !fits; ++pt) {
          fits = sample_pose(cfg, spec, root, order, rng, pose);
        }
        if (!fits) continue;
        roots.push_back(root);
        persons.push_back(std::move(pose));
        placed = true;
      }
      if (!placed) ok = false;
    }
    if (ok) {
      out.roots = std::move(roots);
      out.scene.persons = std::move(persons);
      if (cfg.render) {
        SplitMix64 render_rng = SplitMix64::fork(cfg.seed, index * 2 + 1);
        out.image = render_scene(cfg, spec, out.scene, out.roots, render_rng);
      }
      return out;
    }
  }
  throw Error::data(
      "generate_scene: could not satisfy separation and bounds constraints; "
      "loosen overlap, shrink limbs, or enlarge the image");
}

Scene perturb_poses(const Scene& scene, double magnitude, uint64_t seed) {
  if (magnitude < 0.0) {
    throw Error::data("perturb_poses: magnitude must be >= 0");
  }
  if (magnitude == 0.0) return scene;
  Scene out = scene;
  SplitMix64 rng(seed);
  for (Pose& pose : out.persons) {
    for (Joint& joint : pose.joints) {
      if (!joint.visible) continue;
      if (scene.dim == 3) {
        double x, y, z;
        unit_ball(rng, x, y, z);
        joint.p.x += magnitude * x;
        joint.p.y += magnitude * y;
        joint.p.z += magnitude * z;
      } else {
        double x, y;
        unit_disc(rng, x, y);
        joint.p.x += magnitude * x;
        joint.p.y += magnitude * y;
      }
    }
  }
  return out;
}

}  // namespace spr
